// Two-body astrodynamics: nondimensional scales, universal-variable Kepler
// propagation with Lagrange coefficients, and the Tsiolkovsky mass update.
#ifndef HELIOS_ASTRO_HPP
#define HELIOS_ASTRO_HPP

#include <Eigen/Core>
#include <stdexcept>
#include <utility>

namespace helios {

using Vec3 = Eigen::Vector3d;

/// Mission constants in physical units (km, km/s, kg, days, N).
struct MissionConfig {
    int N = 40;                        // trajectory segments
    double tf_days = 358.79;           // transfer time
    double Tmax_N = 0.50;              // max thrust [N]
    double ueq_kms = 19.6133;          // effective exhaust velocity [km/s]
    double m0_kg = 1000.0;             // initial wet mass [kg]
    double mu_sun = 132712440018.0;    // solar gravitational parameter [km^3/s^2]
    Vec3 r_earth_km{-140699693.0, -51614428.0, 980.0};
    Vec3 v_earth_kms{9.774596, -28.07828, 4.337725e-4};
    Vec3 r_mars_km{-172682023.0, 176959469.0, 7948912.0};
    Vec3 v_mars_kms{-16.427384, -14.860506, 9.21486e-2};

    void validate() const;             // throws std::invalid_argument
};

/// Reference quantities used to nondimensionalize all internal state.
struct ScaleSet {
    double r_ref_km;    // length scale
    double v_ref_kms;   // velocity scale, sqrt(mu/r_ref)
    double m_ref_kg;    // mass scale, m0
    double t_ref_s;     // time scale, r_ref/v_ref
};

/// Spacecraft state at a discretization node, nondimensional units.
struct StateVector {
    Vec3 r = Vec3::Zero();
    Vec3 v = Vec3::Zero();
    double m = 1.0;
    int k = 0;
};

// Earth-Sun mean distance, the length scale of the mission [km].
inline constexpr double kEarthSunDistanceKm = 1.496e8;

ScaleSet make_scales(const MissionConfig& config);

struct LagrangeCoefficients {
    double f, g, fdot, gdot;
};

struct NonConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateOrbit : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Universal-variable Kepler solve for the transition over dt.
/// The returned coefficients satisfy r1 = f r0 + g v0, v1 = fdot r0 + gdot v0
/// and the conservation identity f*gdot - fdot*g = 1.
LagrangeCoefficients lagrange_coefficients(const Vec3& r0, const Vec3& v0,
                                           double dt, double mu);

/// Ballistic propagation of (r, v) through dt under two-body dynamics.
std::pair<Vec3, Vec3> kepler_propagate(const Vec3& r0, const Vec3& v0,
                                       double dt, double mu);

/// m * exp(-dv/u_eq); the propellant cost of an impulsive burn.
double tsiolkovsky_mass(double m, double dv_mag, double ueq);

}  // namespace helios

#endif
