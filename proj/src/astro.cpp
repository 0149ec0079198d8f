#include "helios/astro.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <limits>

namespace helios {

void MissionConfig::validate() const {
    if (N < 2) throw std::invalid_argument("MissionConfig: N must be >= 2");
    if (!(tf_days > 0)) throw std::invalid_argument("MissionConfig: t_f must be positive");
    if (!(Tmax_N > 0)) throw std::invalid_argument("MissionConfig: T_max must be positive");
    if (!(ueq_kms > 0)) throw std::invalid_argument("MissionConfig: u_eq must be positive");
    if (!(m0_kg > 0)) throw std::invalid_argument("MissionConfig: m0 must be positive");
    if (!(mu_sun > 0)) throw std::invalid_argument("MissionConfig: mu_sun must be positive");
}

ScaleSet make_scales(const MissionConfig& config) {
    config.validate();
    ScaleSet s;
    s.r_ref_km = kEarthSunDistanceKm;
    s.v_ref_kms = std::sqrt(config.mu_sun / s.r_ref_km);
    s.m_ref_kg = config.m0_kg;
    s.t_ref_s = s.r_ref_km / s.v_ref_kms;
    return s;
}

namespace {

// Stumpff functions C(z), S(z); series expansion near z = 0 where the
// closed forms lose precision.
double stumpff_c(double z) {
    if (std::abs(z) < 1e-2) {
        double sum = 0.0, term = 0.5;
        for (int k = 0; k < 8; ++k) {
            sum += term;
            term *= -z / double((2 * k + 3) * (2 * k + 4));
        }
        return sum;
    }
    if (z > 0) return (1.0 - std::cos(std::sqrt(z))) / z;
    return (std::cosh(std::sqrt(-z)) - 1.0) / (-z);
}

double stumpff_s(double z) {
    if (std::abs(z) < 1e-2) {
        double sum = 0.0, term = 1.0 / 6.0;
        for (int k = 0; k < 8; ++k) {
            sum += term;
            term *= -z / double((2 * k + 4) * (2 * k + 5));
        }
        return sum;
    }
    if (z > 0) {
        const double sz = std::sqrt(z);
        return (sz - std::sin(sz)) / (sz * sz * sz);
    }
    const double sz = std::sqrt(-z);
    return (std::sinh(sz) - sz) / (sz * sz * sz);
}

struct KeplerEval {
    double time_residual;  // t(chi) - dt
    double radius;         // orbital radius at chi, equals dt/dchi
    double z, stc, sts;
};

KeplerEval evaluate_chi(double chi, double r0n, double vr0, double alpha,
                        double sqmu, double dt) {
    KeplerEval e;
    e.z = alpha * chi * chi;
    e.stc = stumpff_c(e.z);
    e.sts = stumpff_s(e.z);
    const double chi2 = chi * chi;
    const double t_of_chi =
        (r0n * vr0 / sqmu * chi2 * e.stc +
         (1.0 - alpha * r0n) * chi2 * chi * e.sts + r0n * chi) / sqmu;
    e.time_residual = t_of_chi - dt;
    e.radius = chi2 * e.stc + r0n * vr0 / sqmu * chi * (1.0 - e.z * e.sts) +
               r0n * (1.0 - e.z * e.stc);
    return e;
}

constexpr int kMaxIterations = 50;
constexpr double kChiTolerance = 1e-12;
constexpr double kDegenerateMomentum = 1e-12;

}  // namespace

LagrangeCoefficients lagrange_coefficients(const Vec3& r0, const Vec3& v0,
                                           double dt, double mu) {
    const double r0n = r0.norm();
    if (!(r0n > 0) || !std::isfinite(dt)) {
        throw DegenerateOrbit("lagrange_coefficients: invalid initial state");
    }
    if (r0.cross(v0).norm() < kDegenerateMomentum) {
        throw DegenerateOrbit("lagrange_coefficients: zero angular momentum");
    }
    if (dt == 0.0) return {1.0, 0.0, 0.0, 1.0};

    const double sqmu = std::sqrt(mu);
    const double vr0 = r0.dot(v0) / r0n;
    const double alpha = 2.0 / r0n - v0.squaredNorm() / mu;

    // Initial guess: exact mean-motion scaling for ellipses, generic otherwise.
    double chi = (alpha > 1e-6) ? sqmu * dt * alpha
                                : sqmu * dt / r0n;

    // Bracket the root: t(chi) is monotone increasing (dt/dchi = radius > 0).
    double lo = chi, hi = chi;
    KeplerEval e = evaluate_chi(chi, r0n, vr0, alpha, sqmu, dt);
    {
        double span = std::max(1.0, std::abs(chi));
        int guard = 0;
        KeplerEval elo = e, ehi = e;
        while (elo.time_residual > 0 && guard++ < 200) {
            lo -= span;
            span *= 2;
            elo = evaluate_chi(lo, r0n, vr0, alpha, sqmu, dt);
        }
        span = std::max(1.0, std::abs(chi));
        guard = 0;
        while (ehi.time_residual < 0 && guard++ < 200) {
            hi += span;
            span *= 2;
            ehi = evaluate_chi(hi, r0n, vr0, alpha, sqmu, dt);
        }
        if (elo.time_residual > 0 || ehi.time_residual < 0) {
            throw NonConvergence("lagrange_coefficients: failed to bracket universal anomaly");
        }
    }

    // Newton with bisection fallback. 1e-12 on the anomaly step is the
    // required tolerance; iteration continues below it until the step
    // stagnates at machine precision, so the coefficients stay mutually
    // consistent for eccentric orbits.
    bool converged = false;
    double prev_step = std::numeric_limits<double>::infinity();
    for (int it = 0; it < kMaxIterations; ++it) {
        double step = -e.time_residual / e.radius;
        double next = chi + step;
        if (!(next > lo && next < hi) || !std::isfinite(next)) {
            next = 0.5 * (lo + hi);
            step = next - chi;
        }
        chi = next;
        e = evaluate_chi(chi, r0n, vr0, alpha, sqmu, dt);
        if (e.time_residual >= 0) hi = chi; else lo = chi;
        const double scale = std::max(1.0, std::abs(chi));
        if (std::abs(step) <= kChiTolerance * scale) {
            converged = true;
            const bool stagnated = std::abs(step) >= prev_step;
            if (step == 0.0 || stagnated ||
                std::abs(step) <= 8.0 * std::numeric_limits<double>::epsilon() * scale) {
                break;
            }
        }
        prev_step = std::abs(step);
    }
    if (!converged) {
        throw NonConvergence("lagrange_coefficients: Kepler iteration exceeded cap");
    }

    const double chi2 = chi * chi;
    LagrangeCoefficients lc;
    lc.f = 1.0 - chi2 * e.stc / r0n;
    // g uses the time actually reached at chi, keeping f, g, fdot, gdot
    // consistent to machine precision.
    lc.g = (dt + e.time_residual) - chi2 * chi * e.sts / sqmu;
    const Vec3 r1 = lc.f * r0 + lc.g * v0;
    const double r1n = r1.norm();
    lc.fdot = sqmu / (r1n * r0n) * chi * (e.z * e.sts - 1.0);
    lc.gdot = 1.0 - chi2 * e.stc / r1n;
    return lc;
}

std::pair<Vec3, Vec3> kepler_propagate(const Vec3& r0, const Vec3& v0,
                                       double dt, double mu) {
    const LagrangeCoefficients lc = lagrange_coefficients(r0, v0, dt, mu);
    return {lc.f * r0 + lc.g * v0, lc.fdot * r0 + lc.gdot * v0};
}

double tsiolkovsky_mass(double m, double dv_mag, double ueq) {
    return m * std::exp(-dv_mag / ueq);
}

}  // namespace helios
