// Stochastic perturbation models: additive state/observation noise, control
// execution errors (small rotation + magnitude scaling), and missed thrust
// events with geometric persistence.
#ifndef HELIOS_UNCERTAINTY_HPP
#define HELIOS_UNCERTAINTY_HPP

#include <Eigen/Core>
#include <string>
#include <vector>

#include "helios/rng.hpp"

namespace helios {

using Vec3 = Eigen::Vector3d;

enum class UncertaintyMode { kUnperturbed, kState, kObservation, kControl, kSingleMte, kMultiMte };

/// Mode labels used by the CLI and in run directories: unp, st, obs, ctr, mte1, mte2.
std::string to_string(UncertaintyMode mode);
UncertaintyMode parse_mode(const std::string& label);

struct UncertaintyConfig {
    double sigma_r_km = 1.0;       // position noise std
    double sigma_v_kms = 0.05;     // velocity noise std
    double sigma_phi_deg = 1.0;    // control rotation angles
    double sigma_theta_deg = 1.0;
    double sigma_psi_deg = 1.0;
    double sigma_u = 0.05;         // control magnitude error (fractional)
    double p_mte = 0.1;            // MTE persistence probability
    int n_mte = 3;                 // max consecutive MTE steps
    UncertaintyMode mode = UncertaintyMode::kUnperturbed;
    bool force_one_mte = true;     // at least one MTE per episode in MTE modes
    bool mte_recurrence = false;   // allow an independent later event after recovery

    void validate() const;
};

struct StateNoise {
    Vec3 dr = Vec3::Zero();
    Vec3 dv = Vec3::Zero();
};

/// dr ~ N(0, sigma_r^2 I3), dv ~ N(0, sigma_v^2 I3). Units follow the sigmas
/// passed in; mass is never perturbed.
StateNoise sample_state_noise(RngStream& stream, double sigma_r, double sigma_v);

/// Same covariance as the state noise, applied to observations only.
StateNoise sample_obs_noise(RngStream& stream, double sigma_r, double sigma_v);

/// First-order rotation matrix for small Euler angles (radians):
///   [[1, -dpsi, dtheta], [dpsi, 1, -dphi], [-dtheta, dphi, 1]].
Eigen::Matrix3d small_angle_rotation(double dphi, double dtheta, double dpsi);

struct ControlSigmas {
    double phi_rad = 0.0;
    double theta_rad = 0.0;
    double psi_rad = 0.0;
    double magnitude = 0.0;
};

/// Realized control u = (1 + du) * A * a with (dphi, dtheta, dpsi, du) drawn
/// from independent zero-mean Gaussians.
Vec3 control_execution(const Vec3& commanded, RngStream& stream,
                       const ControlSigmas& sigmas);

/// One missed-thrust episode schedule. `duration` is the drawn persistence
/// (truncated geometric); `blocked` holds the affected step indices in [0, N).
struct MteSchedule {
    int start = -1;
    int duration = 0;
    std::vector<int> blocked;

    bool blocks(int k) const;
    bool empty() const { return blocked.empty(); }
};

/// Draw an MTE schedule. The event starts uniformly in [0, N), persists each
/// following step with probability p_mte, and never exceeds n_mte steps.
/// With force_one unset the event itself only occurs with probability p_mte.
/// With recurrence set, an independent second event may follow after recovery.
MteSchedule mte_schedule(RngStream& stream, int N, double p_mte, int n_mte,
                         bool force_one, bool recurrence = false);

}  // namespace helios

#endif
