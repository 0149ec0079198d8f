// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion is self-contained and uses independent oracles
// where the contract calls for one.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "helios/config.hpp"
#include "helios/mc.hpp"
#include "helios/ppo.hpp"
#include "support/feasible_schedule.hpp"
#include "support/orbit_samples.hpp"
#include "support/two_body_oracle.hpp"

using namespace helios;
using helios::testing::integrate_two_body;
using helios::testing::random_elliptic_state;
using helios::testing::solve_feasible_schedule;

namespace {

int failures = 0;
std::vector<std::string> notes;

void report(int index, const std::string& name, bool ok, double seconds,
            const std::string& detail) {
    std::printf("[%s] %d. %s (%.1f s)%s%s\n", ok ? "PASS" : "FAIL", index,
                name.c_str(), seconds, detail.empty() ? "" : " -- ",
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

void run(int index, const std::string& name,
         const std::function<bool(std::string&)>& body) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    report(index, name, ok, seconds, detail);
}

bool criterion_propagation(std::string& detail) {
    const MissionConfig mission;
    const ScaleSet scales = make_scales(mission);
    const double dt = mission.tf_days * 86400.0 / mission.N / scales.t_ref_s;
    RngStream stream(1001);
    double worst_state = 0.0, worst_energy = 0.0, worst_momentum = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto s = random_elliptic_state(stream);
        const auto [r1, v1] = kepler_propagate(s.r, s.v, dt, 1.0);
        const auto [ro, vo] = integrate_two_body(s.r, s.v, dt, 1.0, 1e-13);
        worst_state = std::max(worst_state, (r1 - ro).norm() / ro.norm());
        worst_state = std::max(worst_state, (v1 - vo).norm() / vo.norm());
        const double e0 = 0.5 * s.v.squaredNorm() - 1.0 / s.r.norm();
        const double e1 = 0.5 * v1.squaredNorm() - 1.0 / r1.norm();
        worst_energy = std::max(worst_energy, std::abs(e1 - e0) / std::abs(e0));
        const Vec3 h0 = s.r.cross(s.v);
        worst_momentum =
            std::max(worst_momentum, (r1.cross(v1) - h0).norm() / h0.norm());
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "state err %.2e (<=1e-9), energy %.2e, momentum %.2e (<=1e-10)",
                  worst_state, worst_energy, worst_momentum);
    detail = buf;
    return worst_state <= 1e-9 && worst_energy <= 1e-10 && worst_momentum <= 1e-10;
}

bool criterion_coast(std::string& detail) {
    const MissionConfig mission;
    UncertaintyConfig unc;
    TransferEnv env(mission, unc);

    env.reset(derive_stream(0, 0, 0));
    while (!env.done()) env.step(Vec3::Zero());
    const double pos_err = env.report().pos_err;

    const ScaleSet& s = env.scales();
    const Vec3 r0 = mission.r_earth_km / s.r_ref_km;
    const Vec3 v0 = mission.v_earth_kms / s.v_ref_kms;
    const auto [rf, vf] =
        integrate_two_body(r0, v0, mission.tf_days * 86400.0 / s.t_ref_s, 1.0);
    const double miss =
        (rf - env.target_position()).norm() / env.target_position().norm();
    const double coast_gap = std::abs(pos_err - miss) / miss;

    // J identity on a penalty-free episode: impulses kept inside the norm
    // bound so no e_u penalty can fire, tolerance widened so e_s stays zero.
    TransferEnv free_env(mission, unc);
    free_env.set_constraint_tolerance(10.0);
    free_env.reset(derive_stream(0, 0, 0));
    RngStream actions(1002);
    double total = 0.0;
    while (!free_env.done()) {
        Vec3 dir(actions.gaussian(), actions.gaussian(), actions.gaussian());
        dir.normalize();
        const double bound = free_env.max_dv(free_env.state().m);
        const StepResult res =
            free_env.step_command(0.5 * bound * actions.uniform01() * dir);
        if (res.info.e_u != 0.0 || res.info.e_s != 0.0) {
            detail = "episode unexpectedly penalized";
            return false;
        }
        total += res.reward;
    }
    const double m_f_nd = free_env.report().m_f_kg / s.m_ref_kg;
    const double identity_gap = std::abs(total + (1.0 - m_f_nd));

    // published-row identity: m_f = 600.23 kg corresponds to J = -0.3998
    const double j_row = -(1000.0 - 600.23) / 1000.0;
    const double row_gap = std::abs(j_row - (-0.3998));

    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "coast gap %.2e (<=1e-9), identity gap %.2e, row gap %.1e",
                  coast_gap, identity_gap, row_gap);
    detail = buf;
    return coast_gap <= 1e-9 && identity_gap <= 1e-14 && row_gap <= 5e-5;
}

bool criterion_gae(std::string& detail) {
    RngStream stream(1003);
    double worst = 0.0;
    for (int trial = 0; trial < 10000; ++trial) {
        const int n = 1 + stream.uniform_int(64);
        Eigen::VectorXd rewards(n), values(n + 1);
        std::vector<std::uint8_t> dones(size_t(n), 0);
        for (int i = 0; i < n; ++i) {
            rewards[i] = stream.gaussian();
            values[i] = stream.gaussian();
            if (stream.uniform01() < 0.1) dones[size_t(i)] = 1;
        }
        dones[size_t(n - 1)] = 1;
        values[n] = 0.0;
        const double gamma = 0.9 + 0.0999 * stream.uniform01();
        const double lambda = stream.uniform01();
        const auto [adv, ret] = compute_gae(rewards, values, dones, gamma, lambda);

        // brute-force double sum, truncated at each episode boundary
        for (int k = 0; k < n; ++k) {
            double acc = 0.0, weight = 1.0;
            for (int j = k; j < n; ++j) {
                const double v_next = dones[size_t(j)] ? 0.0 : values[j + 1];
                acc += weight * (rewards[j] + gamma * v_next - values[j]);
                if (dones[size_t(j)]) break;
                weight *= gamma * lambda;
            }
            worst = std::max(worst, std::abs(adv[k] - acc));
        }
    }
    char buf[80];
    std::snprintf(buf, sizeof(buf), "max |gae - double sum| = %.2e (<=1e-12)", worst);
    detail = buf;
    return worst <= 1e-12;
}

bool criterion_gradients(std::string& detail) {
    NetworkSpec spec;
    spec.input_dim = 8;
    spec.hidden = {8};
    RngStream stream(1004);
    PolicyParams params = PolicyParams::init(spec, stream);
    params.for_each([&](double& x) { x += 0.2 * stream.gaussian(); });

    const int B = 16;
    RolloutBuffer buf;
    buf.obs.resize(B, 8);
    buf.actions.resize(B, 3);
    buf.log_prob_old.resize(B);
    buf.advantages.resize(B);
    buf.returns.resize(B);
    buf.rewards = Eigen::VectorXd::Zero(B);
    buf.value_old = Eigen::VectorXd::Zero(B);
    buf.dones.assign(B, 0);
    for (int i = 0; i < B; ++i) {
        for (int j = 0; j < 8; ++j) buf.obs(i, j) = stream.gaussian();
        const Eigen::MatrixXd mean = head_forward(params.policy, buf.obs.row(i));
        DistributionParams dist{mean.row(0).transpose(), params.log_std};
        buf.actions.row(i) = sample_action(dist, stream).first.transpose();
        buf.log_prob_old[i] =
            log_prob(dist, buf.actions.row(i).transpose()) + 0.3 * stream.gaussian();
        buf.advantages[i] = stream.gaussian();
        buf.returns[i] = stream.gaussian();
    }
    std::vector<int> batch(B);
    for (int i = 0; i < B; ++i) batch[size_t(i)] = i;

    std::vector<double*> ptrs;
    params.for_each([&](double& x) { ptrs.push_back(&x); });

    double worst = 0.0;
    const struct { double c1, c2; } terms[] = {
        {0.0, 0.0}, {0.5, 0.0}, {0.0, 1e-3}, {0.5, 1e-3}};
    for (const auto& term : terms) {
        ParamGradient grad = ParamGradient::zeros_like(params);
        ppo_objective(buf, batch, params, 0.2, term.c1, term.c2, grad);
        std::vector<double> analytic;
        grad.for_each([&](double& g) { analytic.push_back(g); });

        const double h = 1e-5;
        for (size_t j = 0; j < ptrs.size(); ++j) {
            const double orig = *ptrs[j];
            ParamGradient scratch = ParamGradient::zeros_like(params);
            *ptrs[j] = orig + h;
            const double up =
                ppo_objective(buf, batch, params, 0.2, term.c1, term.c2, scratch).total;
            scratch = ParamGradient::zeros_like(params);
            *ptrs[j] = orig - h;
            const double down =
                ppo_objective(buf, batch, params, 0.2, term.c1, term.c2, scratch).total;
            *ptrs[j] = orig;
            const double fd = (up - down) / (2 * h);
            const double scale = std::max({std::abs(fd), std::abs(analytic[j]), 1e-6});
            worst = std::max(worst, std::abs(fd - analytic[j]) / scale);
        }
    }
    char buf2[80];
    std::snprintf(buf2, sizeof(buf2), "max relative gradient error %.2e (<=1e-4)", worst);
    detail = buf2;
    return worst <= 1e-4;
}

bool criterion_ratio_invariant(std::string& detail) {
    MissionConfig mission;
    UncertaintyConfig unc;
    HyperParams hp;
    hp.n_env = 2;
    hp.n_b = 2;
    NetworkSpec spec;
    RngStream init(1005);
    const PolicyParams params = PolicyParams::init(spec, init);
    std::vector<TransferEnv> envs;
    for (int e = 0; e < hp.n_env; ++e) envs.emplace_back(mission, unc);
    const RolloutBuffer buf = collect_rollouts(params, envs, hp.n_b, hp, 1006, 0);

    double worst_ratio = 0.0;
    for (int i = 0; i < buf.size(); ++i) {
        const Eigen::MatrixXd mean = head_forward(params.policy, buf.obs.row(i));
        DistributionParams dist{mean.row(0).transpose(), params.log_std};
        const double lpn = log_prob(dist, buf.actions.row(i).transpose());
        worst_ratio = std::max(
            worst_ratio, std::abs(probability_ratio(lpn, buf.log_prob_old[i]) - 1.0));
    }
    std::vector<int> batch(size_t(buf.size()));
    for (int i = 0; i < buf.size(); ++i) batch[size_t(i)] = i;
    ParamGradient grad = ParamGradient::zeros_like(params);
    const ObjectiveValue obj = ppo_objective(buf, batch, params, 0.3, 0.0, 0.0, grad);
    const double clip_gap = std::abs(obj.j_clip - buf.advantages.mean());

    char buf2[100];
    std::snprintf(buf2, sizeof(buf2), "|ratio-1| %.2e (<=1e-12), |Jclip-meanA| %.2e (<=1e-10)",
                  worst_ratio, clip_gap);
    detail = buf2;
    return worst_ratio <= 1e-12 && clip_gap <= 1e-10;
}

bool criterion_uncertainty_stats(std::string& detail) {
    RngStream stream(1007);
    const int n = 1000000;
    // state/observation noise at the documented sigmas
    double r_sq = 0.0, v_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const StateNoise noise = sample_state_noise(stream, 1.0, 0.05);
        r_sq += noise.dr.squaredNorm();
        v_sq += noise.dv.squaredNorm();
    }
    const double sigma_r = std::sqrt(r_sq / (3.0 * n));
    const double sigma_v = std::sqrt(v_sq / (3.0 * n));
    const bool gaussians_ok =
        std::abs(sigma_r - 1.0) < 0.01 && std::abs(sigma_v - 0.05) < 0.01 * 0.05;

    // MTE duration law
    const int m = 100000;
    int counts[4] = {0, 0, 0, 0};
    for (int i = 0; i < m; ++i) {
        ++counts[mte_schedule(stream, 40, 0.1, 3, true).duration];
    }
    const double expected[4] = {0, 0.9 * m, 0.09 * m, 0.01 * m};
    double chi2 = 0.0;
    for (int d = 1; d <= 3; ++d) {
        chi2 += (counts[d] - expected[d]) * (counts[d] - expected[d]) / expected[d];
    }
    char buf[140];
    std::snprintf(buf, sizeof(buf),
                  "sigma_r %.4f, sigma_v %.5f, mte chi2 %.2f (<13.82, 2 dof)", sigma_r,
                  sigma_v, chi2);
    detail = buf;
    return gaussians_ok && chi2 < 13.82;
}

bool criterion_training(std::string& detail) {
    MissionConfig mission;
    UncertaintyConfig unc;  // deterministic environment
    HyperParams hp;         // the documented hyperparameters
    hp.total_steps = 300000;
    NetworkSpec spec;

    const TrainResult result = train(mission, unc, hp, spec, 2024);

    // untrained baseline: the very first rollout and an untrained reference run
    const PolicyParams untrained = initial_params(spec, 2024);
    const EpisodeRecord untrained_ref =
        extract_reference_trajectory(untrained, mission);
    const EpisodeRecord trained_ref =
        extract_reference_trajectory(result.best_params, mission);

    const double first_return = result.metrics.front().mean_return;
    const double last_return = result.metrics.back().mean_return;
    const bool return_improved = last_return > first_return;
    const bool error_reduced =
        trained_ref.pos_err <= untrained_ref.pos_err / 10.0;

    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "return %.3f -> %.3f, pos_err %.4f -> %.4f (need <= %.4f)",
                  first_return, last_return, untrained_ref.pos_err,
                  trained_ref.pos_err, untrained_ref.pos_err / 10.0);
    detail = buf;
    return return_improved && error_reduced;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

bool criterion_reproducibility(std::string& detail) {
    namespace fs = std::filesystem;
    MissionConfig mission;
    UncertaintyConfig unc;
    unc.mode = UncertaintyMode::kState;
    HyperParams hp;
    hp.n_env = 2;
    hp.n_b = 1;
    hp.n_opt = 3;
    hp.total_steps = 4LL * 2 * mission.N;
    NetworkSpec spec;
    spec.hidden = {16};

    const auto dir_a = fs::temp_directory_path() / "helios_accept_repro_a";
    const auto dir_b = fs::temp_directory_path() / "helios_accept_repro_b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    train(mission, unc, hp, spec, 31, dir_a.string());
    train(mission, unc, hp, spec, 31, dir_b.string());

    const bool metrics_equal =
        slurp((dir_a / "metrics.ndjson").string()) ==
        slurp((dir_b / "metrics.ndjson").string());
    const bool best_equal = slurp((dir_a / "checkpoint_best.json").string()) ==
                            slurp((dir_b / "checkpoint_best.json").string());
    const bool final_equal = slurp((dir_a / "checkpoint_final.json").string()) ==
                             slurp((dir_b / "checkpoint_final.json").string());

    // campaign summaries must also repeat bitwise
    const PolicyParams params =
        load_params((dir_a / "checkpoint_best.json").string());
    const auto records_a = run_campaign(params, mission, unc, 20, 7);
    const auto records_b = run_campaign(params, mission, unc, 20, 7);
    bool campaigns_equal = true;
    for (size_t i = 0; i < records_a.size(); ++i) {
        campaigns_equal = campaigns_equal &&
                          records_a[i].pos_err == records_b[i].pos_err &&
                          records_a[i].m_f_kg == records_b[i].m_f_kg;
    }
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);

    detail = std::string("metrics ") + (metrics_equal ? "identical" : "DIFFER") +
             ", checkpoints " + (best_equal && final_equal ? "identical" : "DIFFER") +
             ", campaigns " + (campaigns_equal ? "identical" : "DIFFER");
    return metrics_equal && best_equal && final_equal && campaigns_equal;
}

bool criterion_mc_harness(std::string& detail) {
    MissionConfig mission;
    UncertaintyConfig unc;

    // a genuinely feasible open-loop schedule, found by the test-side solver
    const auto schedule = solve_feasible_schedule(mission);
    if (std::max(schedule.pos_err, schedule.vel_err) > 1e-3) {
        char buf[120];
        std::snprintf(buf, sizeof(buf),
                      "feasibility solver stalled: pos %.2e vel %.2e", schedule.pos_err,
                      schedule.vel_err);
        detail = buf;
        return false;
    }

    // open-loop replay of the recorded schedule across a small campaign
    std::vector<EpisodeRecord> records;
    for (int i = 0; i < 25; ++i) {
        TransferEnv env(mission, unc);
        EpisodeRecord rec;
        env.reset(derive_stream(0, 0, std::uint64_t(i)));
        for (const Vec3& dv : schedule.dv_nd) {
            rec.episode_return += env.step_command(dv).reward;
        }
        const ConstraintReport rep = env.report();
        rec.episode_index = i;
        rec.m_f_kg = rep.m_f_kg;
        rec.pos_err = rep.pos_err;
        rec.vel_err = rep.vel_err;
        records.push_back(rec);
    }
    const CampaignSummary summary = summarize(records, 1e-3);
    const bool replay_ok = summary.success_rate_pct == 100.0;

    // success counting equals a brute-force recount at arbitrary tolerances
    RngStream stream(1009);
    std::vector<EpisodeRecord> synthetic(500);
    for (auto& rec : synthetic) {
        rec.pos_err = std::abs(stream.gaussian()) * 2e-3;
        rec.vel_err = std::abs(stream.gaussian()) * 1e-3;
    }
    bool recount_ok = true;
    for (double eps : {1e-5, 1e-4, 1e-3, 2e-3, 1e-2}) {
        int count = 0;
        for (const auto& rec : synthetic) {
            if (std::max(rec.pos_err, rec.vel_err) <= eps) ++count;
        }
        const CampaignSummary s = summarize(synthetic, eps);
        recount_ok =
            recount_ok && s.success_rate_pct == 100.0 * count / double(synthetic.size());
    }

    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "schedule pos %.2e vel %.2e m_f %.1f kg, replay SR %.1f%%, recounts %s",
                  schedule.pos_err, schedule.vel_err, schedule.m_f_kg,
                  summary.success_rate_pct, recount_ok ? "exact" : "DIFFER");
    detail = buf;
    return replay_ok && recount_ok;
}

}  // namespace

int main() {
    std::printf("helios acceptance suite\n");
    run(1, "propagation matches the adaptive integration oracle", criterion_propagation);
    run(2, "ballistic coast and reward identity", criterion_coast);
    run(3, "gae equals the brute-force double sum", criterion_gae);
    run(4, "objective gradients match finite differences", criterion_gradients);
    run(5, "fresh-rollout probability ratios are one", criterion_ratio_invariant);
    run(6, "uncertainty model statistics", criterion_uncertainty_stats);
    run(7, "training improves return and shrinks the terminal error 10x",
        criterion_training);
    run(8, "fixed seeds reproduce runs bitwise", criterion_reproducibility);
    run(9, "open-loop replay succeeds and success counts recount exactly",
        criterion_mc_harness);

    if (failures == 0) {
        std::printf("all acceptance criteria passed\n");
        return 0;
    }
    std::printf("%d acceptance criterion(s) failed\n", failures);
    return 1;
}
