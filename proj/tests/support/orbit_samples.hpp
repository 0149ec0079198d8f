// Randomized orbital states for property tests, built from classical elements
// through the standard perifocal construction (independent of library code).
#ifndef HELIOS_TESTS_ORBIT_SAMPLES_HPP
#define HELIOS_TESTS_ORBIT_SAMPLES_HPP

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cmath>

#include "helios/rng.hpp"

namespace helios::testing {

struct OrbitSample {
    Eigen::Vector3d r;
    Eigen::Vector3d v;
    double semi_major_axis;
    double eccentricity;
};

inline OrbitSample elements_to_state(double a, double e, double inc, double raan,
                                     double argp, double nu, double mu) {
    const double p = a * (1.0 - e * e);
    const double rn = p / (1.0 + e * std::cos(nu));
    const Eigen::Vector3d r_pf(rn * std::cos(nu), rn * std::sin(nu), 0.0);
    const double vs = std::sqrt(mu / p);
    const Eigen::Vector3d v_pf(-vs * std::sin(nu), vs * (e + std::cos(nu)), 0.0);
    const Eigen::Matrix3d rot =
        (Eigen::AngleAxisd(raan, Eigen::Vector3d::UnitZ()) *
         Eigen::AngleAxisd(inc, Eigen::Vector3d::UnitX()) *
         Eigen::AngleAxisd(argp, Eigen::Vector3d::UnitZ()))
            .toRotationMatrix();
    return {rot * r_pf, rot * v_pf, a, e};
}

/// Random elliptic orbit with a in [0.6, 2.2] and e in [0, 0.9], mu = 1.
inline OrbitSample random_elliptic_state(helios::RngStream& stream) {
    const double a = 0.6 + 1.6 * stream.uniform01();
    const double e = 0.9 * stream.uniform01();
    const double inc = M_PI * stream.uniform01();
    const double raan = 2.0 * M_PI * stream.uniform01();
    const double argp = 2.0 * M_PI * stream.uniform01();
    const double nu = 2.0 * M_PI * stream.uniform01();
    return elements_to_state(a, e, inc, raan, argp, nu, 1.0);
}

}  // namespace helios::testing

#endif
