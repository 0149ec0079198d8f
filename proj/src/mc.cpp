#include "helios/mc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <numeric>

#include "helios/parallel.hpp"
#include "helios/rng.hpp"

namespace helios {

namespace {

constexpr std::uint64_t kDomainEnv = 0;
constexpr std::uint64_t kDomainPolicy = 1;

EpisodeRecord run_episode(const PolicyParams& params, TransferEnv& env,
                          RngStream env_stream, RngStream policy_stream,
                          bool sample_actions,
                          std::optional<MteSchedule> forced_mte = std::nullopt) {
    EpisodeRecord rec;
    Observation obs = env.reset(std::move(env_stream), std::move(forced_mte));
    while (!env.done()) {
        Eigen::Vector3d raw;
        if (sample_actions) {
            auto [mean, value] = forward(params, obs.vec());
            (void)value;
            raw = sample_action({mean, params.log_std}, policy_stream).first;
        } else {
            raw = deterministic_action(params, obs);
        }
        const StepResult res = env.step(raw);
        rec.episode_return += res.reward;
        obs = res.obs;
    }
    const ConstraintReport rep = env.report();
    rec.trace = env.trace();
    rec.m_f_kg = rep.m_f_kg;
    rec.pos_err = rep.pos_err;
    rec.vel_err = rep.vel_err;
    rec.mte = env.mte();
    return rec;
}

void mean_std(const std::vector<double>& xs, double& mean, double& std_out) {
    const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
    if (*lo == *hi) {  // constant sample: variance is exactly zero
        mean = *lo;
        std_out = 0.0;
        return;
    }
    mean = std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
    double sq = 0.0;
    for (double x : xs) sq += (x - mean) * (x - mean);
    std_out = std::sqrt(sq / double(xs.size()));  // population std
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace

Eigen::Vector3d deterministic_action(const PolicyParams& params,
                                     const Observation& obs) {
    return forward(params, obs.vec()).first;
}

EpisodeRecord extract_reference_trajectory(const PolicyParams& params,
                                           const MissionConfig& mission) {
    UncertaintyConfig unperturbed;
    TransferEnv env(mission, unperturbed);
    return run_episode(params, env, RngStream(0), RngStream(0), false);
}

std::vector<EpisodeRecord> run_campaign(const PolicyParams& params,
                                        const MissionConfig& mission,
                                        const UncertaintyConfig& uncertainty,
                                        int n_episodes, std::uint64_t global_seed,
                                        bool sample_actions) {
    if (n_episodes < 1) throw EmptyCampaign("campaign needs at least one episode");
    std::vector<EpisodeRecord> records(static_cast<size_t>(n_episodes));
    parallel_for(n_episodes, [&](int i) {
        TransferEnv env(mission, uncertainty);
        EpisodeRecord rec = run_episode(
            params, env, derive_stream(global_seed, 0, std::uint64_t(i), kDomainEnv),
            derive_stream(global_seed, 0, std::uint64_t(i), kDomainPolicy),
            sample_actions);
        rec.global_seed = global_seed;
        rec.env_index = 0;
        rec.episode_index = i;
        records[size_t(i)] = std::move(rec);
    });
    return records;
}

CampaignSummary summarize(const std::vector<EpisodeRecord>& records,
                          double tolerance) {
    if (records.empty()) throw EmptyCampaign("summarize called with no records");
    CampaignSummary s;
    s.n_episodes = int(records.size());
    s.tolerance = tolerance;
    std::vector<double> m_f, pos, vel;
    int successes = 0;
    for (const EpisodeRecord& rec : records) {
        m_f.push_back(rec.m_f_kg);
        pos.push_back(rec.pos_err);
        vel.push_back(rec.vel_err);
        if (rec.success(tolerance)) ++successes;
    }
    mean_std(m_f, s.m_f_mean_kg, s.m_f_std_kg);
    mean_std(pos, s.pos_err_mean, s.pos_err_std);
    mean_std(vel, s.vel_err_mean, s.vel_err_std);
    s.success_rate_pct = 100.0 * double(successes) / double(records.size());
    return s;
}

std::vector<MteSweepPoint> mte_sweep(const PolicyParams& params,
                                     const MissionConfig& mission,
                                     int k_hat_begin, int k_hat_end) {
    if (k_hat_end < 0) k_hat_end = mission.N;
    if (k_hat_begin < 0 || k_hat_end > mission.N || k_hat_begin >= k_hat_end) {
        throw std::invalid_argument("mte_sweep: locations must lie in [0, N)");
    }
    UncertaintyConfig unperturbed;
    const int count = k_hat_end - k_hat_begin;
    std::vector<MteSweepPoint> sweep(static_cast<size_t>(count));
    parallel_for(count, [&](int i) {
        const int k_hat = k_hat_begin + i;
        TransferEnv env(mission, unperturbed);
        MteSchedule forced;
        forced.start = k_hat;
        forced.duration = 1;
        forced.blocked = {k_hat};
        const EpisodeRecord rec =
            run_episode(params, env, RngStream(0), RngStream(0), false, forced);
        sweep[size_t(i)] = {k_hat, std::max(rec.pos_err, rec.vel_err), rec.m_f_kg};
    });
    return sweep;
}

void write_summary_json(const std::string& path, const CampaignSummary& s) {
    nlohmann::json doc{
        {"n_episodes", s.n_episodes},
        {"tolerance", s.tolerance},
        {"m_f_kg", {{"mean", s.m_f_mean_kg}, {"std", s.m_f_std_kg}}},
        {"pos_err", {{"mean", s.pos_err_mean}, {"std", s.pos_err_std}}},
        {"vel_err", {{"mean", s.vel_err_mean}, {"std", s.vel_err_std}}},
        {"success_rate_pct", s.success_rate_pct}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write summary: " + path);
    out << doc.dump(2) << "\n";
}

std::string episodes_csv_header() {
    return "episode,m_f_kg,pos_err,vel_err,J,success,mte_start,mte_duration";
}

void write_episodes_csv(const std::string& path,
                        const std::vector<EpisodeRecord>& records,
                        double tolerance) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write episodes csv: " + path);
    out << episodes_csv_header() << "\n";
    for (const EpisodeRecord& rec : records) {
        out << rec.episode_index << ',' << fmt(rec.m_f_kg) << ',' << fmt(rec.pos_err)
            << ',' << fmt(rec.vel_err) << ',' << fmt(rec.episode_return) << ','
            << (rec.success(tolerance) ? 1 : 0) << ',' << rec.mte.start << ','
            << rec.mte.duration << "\n";
    }
}

std::string sweep_csv_header() { return "k_hat,violation,m_f_kg"; }

void write_sweep_csv(const std::string& path,
                     const std::vector<MteSweepPoint>& sweep) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write sweep csv: " + path);
    out << sweep_csv_header() << "\n";
    for (const MteSweepPoint& p : sweep) {
        out << p.k_hat << ',' << fmt(p.violation) << ',' << fmt(p.m_f_kg) << "\n";
    }
}

}  // namespace helios
