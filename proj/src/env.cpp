#include "helios/env.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace helios {

Eigen::Matrix<double, 8, 1> Observation::vec() const {
    Eigen::Matrix<double, 8, 1> o;
    o << r, v, m, t;
    return o;
}

double reward_value(double mass_spent, double e_u_prev, double e_s) {
    return -mass_spent - kLambdaControl * e_u_prev - kLambdaTerminal * e_s;
}

double tolerance_schedule(double t, double T) {
    return t < 0.5 * T ? 0.01 : 0.001;
}

std::pair<Vec3, StateVector> terminal_maneuver(const StateVector& state,
                                               const Vec3& v_target,
                                               double dv_max, double ueq) {
    const Vec3 mismatch = v_target - state.v;
    const double mag = mismatch.norm();
    Vec3 dv = Vec3::Zero();
    if (mag > 0.0) {
        dv = std::min(mag, dv_max) * (mismatch / mag);
    }
    StateVector final_state = state;
    final_state.v += dv;
    final_state.m = tsiolkovsky_mass(state.m, dv.norm(), ueq);
    return {dv, final_state};
}

TransferEnv::TransferEnv(const MissionConfig& mission,
                         const UncertaintyConfig& uncertainty)
    : mission_(mission), uncertainty_(uncertainty) {
    mission_.validate();
    uncertainty_.validate();
    scales_ = make_scales(mission_);

    const double segment_s = mission_.tf_days * 86400.0 / mission_.N;
    dt_ = segment_s / scales_.t_ref_s;
    ueq_ = mission_.ueq_kms / scales_.v_ref_kms;
    // T_max [N] * segment [s] / (m0 [kg] * 1000) gives km/s at full mass.
    dv_bound_coef_ =
        mission_.Tmax_N * segment_s / (mission_.m0_kg * 1000.0 * scales_.v_ref_kms);

    r_earth_ = mission_.r_earth_km / scales_.r_ref_km;
    v_earth_ = mission_.v_earth_kms / scales_.v_ref_kms;
    r_mars_ = mission_.r_mars_km / scales_.r_ref_km;
    v_mars_ = mission_.v_mars_kms / scales_.v_ref_kms;

    const auto mode = uncertainty_.mode;
    if (mode == UncertaintyMode::kState || mode == UncertaintyMode::kObservation) {
        sigma_r_ = uncertainty_.sigma_r_km / scales_.r_ref_km;
        sigma_v_ = uncertainty_.sigma_v_kms / scales_.v_ref_kms;
    }
    if (mode == UncertaintyMode::kControl) {
        constexpr double deg = M_PI / 180.0;
        control_sigmas_.phi_rad = uncertainty_.sigma_phi_deg * deg;
        control_sigmas_.theta_rad = uncertainty_.sigma_theta_deg * deg;
        control_sigmas_.psi_rad = uncertainty_.sigma_psi_deg * deg;
        control_sigmas_.magnitude = uncertainty_.sigma_u;
    }
}

void TransferEnv::set_constraint_tolerance(double eps) {
    if (!(eps > 0)) throw std::invalid_argument("constraint tolerance must be positive");
    tolerance_ = eps;
}

Observation TransferEnv::observe() {
    Observation o;
    o.r = state_.r;
    o.v = state_.v;
    o.m = state_.m;
    o.t = state_.k * dt_;
    if (uncertainty_.mode == UncertaintyMode::kObservation) {
        const StateNoise n = sample_obs_noise(stream_, sigma_r_, sigma_v_);
        o.r += n.dr;
        o.v += n.dv;
    }
    return o;
}

Observation TransferEnv::reset(RngStream stream,
                               std::optional<MteSchedule> forced_mte) {
    stream_ = std::move(stream);
    state_ = StateVector{r_earth_, v_earth_, 1.0, 0};
    done_ = false;
    report_ = ConstraintReport{};
    trace_.clear();

    mte_ = MteSchedule{};
    if (forced_mte) {
        mte_ = *forced_mte;
    } else if (uncertainty_.mode == UncertaintyMode::kSingleMte) {
        mte_ = mte_schedule(stream_, mission_.N, uncertainty_.p_mte, 1,
                            uncertainty_.force_one_mte);
    } else if (uncertainty_.mode == UncertaintyMode::kMultiMte) {
        mte_ = mte_schedule(stream_, mission_.N, uncertainty_.p_mte,
                            uncertainty_.n_mte, uncertainty_.force_one_mte,
                            uncertainty_.mte_recurrence);
    }

    TraceRow row;
    row.k = 0;
    row.r_km = state_.r * scales_.r_ref_km;
    row.v_kms = state_.v * scales_.v_ref_kms;
    row.m_kg = state_.m * scales_.m_ref_kg;
    trace_.push_back(row);

    return observe();
}

Vec3 TransferEnv::map_action(const Vec3& raw_action) const {
    const double bound = max_dv(state_.m);
    return bound * raw_action.array().tanh().matrix();
}

StepResult TransferEnv::step(const Vec3& raw_action) {
    if (done_) throw EpisodeFinished("step called on a finished episode");
    return advance(map_action(raw_action));
}

StepResult TransferEnv::step_command(const Vec3& dv_nd) {
    if (done_) throw EpisodeFinished("step_command called on a finished episode");
    return advance(dv_nd);
}

StepResult TransferEnv::advance(const Vec3& commanded) {
    const int k = state_.k;
    const double dv_bound = max_dv(state_.m);
    const double m_prev = state_.m;

    StepResult result;
    result.info.dv_commanded = commanded;
    result.info.mte_active = mte_.blocks(k);

    Vec3 realized = commanded;
    if (result.info.mte_active) {
        realized = Vec3::Zero();
    } else if (uncertainty_.mode == UncertaintyMode::kControl) {
        realized = control_execution(commanded, stream_, control_sigmas_);
    }
    result.info.dv_realized = realized;
    result.info.e_u = std::max(0.0, realized.norm() - dv_bound);
    report_.dv_violations.push_back(result.info.e_u);

    auto [r_next, v_next] = kepler_propagate(state_.r, state_.v + realized, dt_, 1.0);
    if (uncertainty_.mode == UncertaintyMode::kState) {
        const StateNoise n = sample_state_noise(stream_, sigma_r_, sigma_v_);
        r_next += n.dr;
        v_next += n.dv;
    }
    state_ = StateVector{r_next, v_next, tsiolkovsky_mass(m_prev, realized.norm(), ueq_),
                         k + 1};

    trace_[k].dv_cmd_kms = commanded * scales_.v_ref_kms;
    trace_[k].dv_real_kms = realized * scales_.v_ref_kms;

    TraceRow row;
    row.k = state_.k;
    row.t_days = state_.k * dt_ * scales_.t_ref_s / 86400.0;
    row.r_km = state_.r * scales_.r_ref_km;
    row.v_kms = state_.v * scales_.v_ref_kms;
    row.m_kg = state_.m * scales_.m_ref_kg;

    double e_s = 0.0;
    if (state_.k == mission_.N) {
        auto [dv_final, final_state] =
            terminal_maneuver(state_, v_mars_, max_dv(state_.m), ueq_);
        row.dv_cmd_kms = dv_final * scales_.v_ref_kms;
        row.dv_real_kms = row.dv_cmd_kms;
        state_ = final_state;
        done_ = true;

        report_.pos_err = (state_.r - r_mars_).norm() / r_mars_.norm();
        report_.vel_err = (state_.v - v_mars_).norm() / v_mars_.norm();
        report_.m_f_kg = state_.m * scales_.m_ref_kg;
        e_s = std::max(0.0, std::max(report_.pos_err, report_.vel_err) - tolerance_);
    }

    result.info.mass_spent = m_prev - state_.m;
    result.info.e_s = e_s;
    result.info.true_state = state_;
    result.reward = reward_value(result.info.mass_spent, result.info.e_u, e_s);
    result.done = done_;

    row.reward = result.reward;
    trace_.push_back(row);

    result.obs = observe();
    return result;
}

ConstraintReport TransferEnv::report() const {
    if (!done_) throw std::logic_error("constraint report requested before episode end");
    return report_;
}

std::string trace_csv_header() {
    return "k,t_days,rx_km,ry_km,rz_km,vx_kms,vy_kms,vz_kms,m_kg,"
           "dvx_cmd_kms,dvy_cmd_kms,dvz_cmd_kms,"
           "dvx_real_kms,dvy_real_kms,dvz_real_kms,reward";
}

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open trace file: " + path);
    out << trace_csv_header() << "\n";
    char buf[64];
    auto num = [&](double x) {
        std::snprintf(buf, sizeof(buf), "%.17g", x);
        return std::string(buf);
    };
    for (const TraceRow& row : trace) {
        out << row.k << ',' << num(row.t_days);
        for (int i = 0; i < 3; ++i) out << ',' << num(row.r_km[i]);
        for (int i = 0; i < 3; ++i) out << ',' << num(row.v_kms[i]);
        out << ',' << num(row.m_kg);
        for (int i = 0; i < 3; ++i) out << ',' << num(row.dv_cmd_kms[i]);
        for (int i = 0; i < 3; ++i) out << ',' << num(row.dv_real_kms[i]);
        out << ',' << num(row.reward) << "\n";
    }
}

}  // namespace helios
