// Closed-loop Monte Carlo campaigns, reference-trajectory extraction, and
// campaign statistics.
#ifndef HELIOS_MC_HPP
#define HELIOS_MC_HPP

#include <string>
#include <vector>

#include "helios/env.hpp"
#include "helios/net.hpp"

namespace helios {

struct EmptyCampaign : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct EpisodeRecord {
    std::uint64_t global_seed = 0;
    int env_index = 0;
    int episode_index = 0;
    std::vector<TraceRow> trace;   // N+1 nodes, physical units
    double m_f_kg = 0.0;
    double pos_err = 0.0;
    double vel_err = 0.0;
    double episode_return = 0.0;   // undiscounted sum of rewards
    MteSchedule mte;

    bool success(double tolerance) const {
        return std::max(pos_err, vel_err) <= tolerance;
    }
};

struct CampaignSummary {
    int n_episodes = 0;
    double tolerance = kDefaultTolerance;
    double m_f_mean_kg = 0.0, m_f_std_kg = 0.0;
    double pos_err_mean = 0.0, pos_err_std = 0.0;
    double vel_err_mean = 0.0, vel_err_std = 0.0;
    double success_rate_pct = 0.0;
};

/// The mode of the Gaussian policy: the raw network mean, which the
/// environment squashes onto the admissible dv cube.
Eigen::Vector3d deterministic_action(const PolicyParams& params,
                                     const Observation& obs);

/// Deterministic episode in the unperturbed environment; the robust
/// reference trajectory of a trained policy.
EpisodeRecord extract_reference_trajectory(const PolicyParams& params,
                                           const MissionConfig& mission);

/// n_episodes closed-loop episodes, episode i seeded by
/// derive_stream(global_seed, 0, i). Guidance is deterministic by default;
/// sample_actions draws from the stochastic policy instead.
std::vector<EpisodeRecord> run_campaign(const PolicyParams& params,
                                        const MissionConfig& mission,
                                        const UncertaintyConfig& uncertainty,
                                        int n_episodes, std::uint64_t global_seed,
                                        bool sample_actions = false);

CampaignSummary summarize(const std::vector<EpisodeRecord>& records,
                          double tolerance = kDefaultTolerance);

struct MteSweepPoint {
    int k_hat = 0;
    double violation = 0.0;  // max(pos_err, vel_err)
    double m_f_kg = 0.0;
};

/// One deterministic episode per forced single-step MTE location in
/// [k_hat_begin, k_hat_end); k_hat_end = -1 means the full horizon N.
/// Locations outside [0, N) are rejected.
std::vector<MteSweepPoint> mte_sweep(const PolicyParams& params,
                                     const MissionConfig& mission,
                                     int k_hat_begin = 0, int k_hat_end = -1);

void write_summary_json(const std::string& path, const CampaignSummary& summary);
void write_episodes_csv(const std::string& path,
                        const std::vector<EpisodeRecord>& records,
                        double tolerance);
void write_sweep_csv(const std::string& path,
                     const std::vector<MteSweepPoint>& sweep);
std::string episodes_csv_header();
std::string sweep_csv_header();

}  // namespace helios

#endif
