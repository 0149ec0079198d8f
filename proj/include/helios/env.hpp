// Time-discrete Earth-Mars rendezvous environment: bounded impulsive segments
// joined by Keplerian coasts, an algebraic terminal maneuver matching the
// target velocity, and a mass/penalty reward.
#ifndef HELIOS_ENV_HPP
#define HELIOS_ENV_HPP

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "helios/astro.hpp"
#include "helios/rng.hpp"
#include "helios/uncertainty.hpp"

namespace helios {

// Penalty factors of the reward: dv-bound violations and terminal errors.
inline constexpr double kLambdaControl = 100.0;
inline constexpr double kLambdaTerminal = 50.0;

// Default terminal-constraint tolerance.
inline constexpr double kDefaultTolerance = 1e-3;

struct Observation {
    Vec3 r = Vec3::Zero();   // nondim position
    Vec3 v = Vec3::Zero();   // nondim velocity
    double m = 1.0;          // nondim mass
    double t = 0.0;          // nondim time

    Eigen::Matrix<double, 8, 1> vec() const;
};

/// Commanded impulse a_k after the action mapping, nondim velocity units.
struct ImpulseCommand {
    Vec3 dv = Vec3::Zero();
};

struct StepInfo {
    double mass_spent = 0.0;      // mu_k, nondim
    double e_u = 0.0;             // dv-bound violation of the realized control
    double e_s = 0.0;             // terminal constraint violation (k = N only)
    Vec3 dv_commanded = Vec3::Zero();
    Vec3 dv_realized = Vec3::Zero();
    StateVector true_state;       // ground truth, never shown to the agent
    bool mte_active = false;
};

struct StepResult {
    Observation obs;
    double reward = 0.0;
    bool done = false;
    StepInfo info;
};

struct ConstraintReport {
    double pos_err = 0.0;              // |r_f - r_mars| / |r_mars|
    double vel_err = 0.0;              // |v_f - v_mars| / |v_mars|
    double m_f_kg = 0.0;               // final mass, physical units
    std::vector<double> dv_violations; // per-step e_u
};

/// One node of an episode trace, physical units (the CSV export schema).
struct TraceRow {
    int k = 0;
    double t_days = 0.0;
    Vec3 r_km = Vec3::Zero();
    Vec3 v_kms = Vec3::Zero();
    double m_kg = 0.0;
    Vec3 dv_cmd_kms = Vec3::Zero();
    Vec3 dv_real_kms = Vec3::Zero();
    double reward = 0.0;
};

struct EpisodeFinished : std::logic_error {
    using std::logic_error::logic_error;
};

/// Reward r_k = -mu_k - lambda1 e_{u,k-1} - lambda2 e_{s,k}.
double reward_value(double mass_spent, double e_u_prev, double e_s);

/// Constraint tolerance used during training: 0.01 for the first half of the
/// step budget, 0.001 afterwards.
double tolerance_schedule(double t, double T);

/// Terminal burn matching the target velocity, capped at dv_max. Returns the
/// applied impulse and the post-burn state.
std::pair<Vec3, StateVector> terminal_maneuver(const StateVector& state,
                                               const Vec3& v_target,
                                               double dv_max, double ueq);

class TransferEnv {
public:
    TransferEnv(const MissionConfig& mission, const UncertaintyConfig& uncertainty);

    /// Start a new episode. The stream drives all of the episode's noise; a
    /// forced MTE schedule overrides the random one (used for sweep analyses).
    Observation reset(RngStream stream,
                      std::optional<MteSchedule> forced_mte = std::nullopt);

    /// Policy-facing step: raw_action is squashed componentwise onto
    /// [-dv_max, dv_max] before the control model applies.
    StepResult step(const Vec3& raw_action);

    /// Open-loop step: dv_nd is applied as commanded, with no squashing.
    /// Violations of the segment bound are penalized, not rejected.
    StepResult step_command(const Vec3& dv_nd);

    /// Per-segment impulse bound (T_max / m) (t_f / N), nondim.
    double max_dv(double m_nd) const { return dv_bound_coef_ / m_nd; }

    /// Componentwise tanh squash onto the current segment's dv cube.
    Vec3 map_action(const Vec3& raw_action) const;

    void set_constraint_tolerance(double eps);
    double constraint_tolerance() const { return tolerance_; }

    int node() const { return state_.k; }
    bool done() const { return done_; }
    int segment_count() const { return mission_.N; }
    double segment_dt() const { return dt_; }
    double ueq_nd() const { return ueq_; }
    const StateVector& state() const { return state_; }
    const MteSchedule& mte() const { return mte_; }
    const MissionConfig& mission() const { return mission_; }
    const UncertaintyConfig& uncertainty() const { return uncertainty_; }
    const ScaleSet& scales() const { return scales_; }
    Vec3 target_position() const { return r_mars_; }
    Vec3 target_velocity() const { return v_mars_; }

    /// Valid once the episode is done.
    ConstraintReport report() const;

    /// Node-by-node record of the current episode, physical units.
    const std::vector<TraceRow>& trace() const { return trace_; }

private:
    StepResult advance(const Vec3& commanded);
    Observation observe();

    MissionConfig mission_;
    UncertaintyConfig uncertainty_;
    ScaleSet scales_;

    // nondim mission constants
    double dt_ = 0.0;            // segment coast time
    double ueq_ = 0.0;           // exhaust velocity
    double dv_bound_coef_ = 0.0; // dv_max = coef / m
    Vec3 r_earth_, v_earth_, r_mars_, v_mars_;
    double sigma_r_ = 0.0, sigma_v_ = 0.0;  // state/obs noise, nondim
    ControlSigmas control_sigmas_;

    StateVector state_;
    bool done_ = true;
    double tolerance_ = kDefaultTolerance;
    RngStream stream_;
    MteSchedule mte_;
    ConstraintReport report_;
    std::vector<TraceRow> trace_;
};

/// Writes an episode trace as CSV; the exact header is part of the public
/// file contract (see README).
void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace);
std::string trace_csv_header();

}  // namespace helios

#endif
