// PPO learning loop: parallel on-policy rollouts, generalized advantage
// estimation, clipped surrogate ascent with value and entropy terms, Adam
// with linear schedules.
#ifndef HELIOS_PPO_HPP
#define HELIOS_PPO_HPP

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "helios/env.hpp"
#include "helios/net.hpp"

namespace helios {

enum class ValueTarget { kLambdaReturns, kRewardsToGo };

struct HyperParams {
    double gamma = 0.9999;
    double lambda = 0.99;
    double alpha0 = 2.5e-4;    // learning-rate scale, decays linearly to 0
    double clip0 = 0.3;        // clip range, decays linearly to 0
    double c1 = 0.5;           // value-error coefficient
    double c2 = 4.75e-8;       // entropy coefficient
    int n_opt = 30;            // update epochs
    int n_env = 8;             // parallel environments
    int n_b = 4;               // episodes per environment per rollout
    long long total_steps = 300000;
    int minibatch_size = 0;    // 0 = n_env * N (one minibatch per n_b split)
    double grad_clip = 0.5;    // global gradient-norm cap
    ValueTarget value_target = ValueTarget::kLambdaReturns;

    void validate() const;
};

struct LengthMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct StaleBuffer : std::logic_error {
    using std::logic_error::logic_error;
};

/// GAE over concatenated episodes. `values` carries one extra bootstrap entry
/// after the final step; accumulation resets across done boundaries where the
/// bootstrap value is taken as 0.
std::pair<Eigen::VectorXd, Eigen::VectorXd> compute_gae(
    const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
    const std::vector<std::uint8_t>& dones, double gamma, double lambda);

double probability_ratio(double log_prob_new, double log_prob_old);

/// (alpha, clip_eps) at training step t of T; clip floored at 1e-6.
std::pair<double, double> schedules(double t, double T, const HyperParams& hp);

/// On-policy experience from the most recent rollout, row-per-transition.
struct RolloutBuffer {
    Eigen::MatrixXd obs;          // M x 8
    Eigen::MatrixXd actions;      // M x 3, pre-squash samples
    Eigen::VectorXd log_prob_old;
    Eigen::VectorXd value_old;
    Eigen::VectorXd rewards;
    std::vector<std::uint8_t> dones;
    Eigen::VectorXd advantages;   // normalized per rollout
    Eigen::VectorXd returns;      // value targets
    bool consumed = false;

    // per-episode summaries, in (env, episode) order
    std::vector<double> episode_returns;
    std::vector<double> episode_returns_discounted;
    std::vector<double> episode_m_f_kg;
    std::vector<double> episode_pos_err;
    std::vector<double> episode_vel_err;

    Eigen::Index size() const { return rewards.size(); }
};

struct ObjectiveValue {
    double total = 0.0;    // J^clip - c1 H + c2 S
    double j_clip = 0.0;
    double value_error = 0.0;
    double entropy_bonus = 0.0;
};

/// Evaluates the surrogate objective on the index subset `batch` and
/// accumulates its exact gradient (ascent direction) into `grad`.
ObjectiveValue ppo_objective(const RolloutBuffer& buffer,
                             const std::vector<int>& batch,
                             const PolicyParams& params, double clip_eps,
                             double c1, double c2, ParamGradient& grad);

/// Adam accumulator with one slot per parameter, visited in PolicyParams
/// order.
class AdamOptimizer {
public:
    explicit AdamOptimizer(const PolicyParams& params);

    /// theta += lr * direction (gradient ascent step).
    void ascend(PolicyParams& params, const ParamGradient& direction, double lr);

private:
    Eigen::VectorXd m_, v_;
    long long t_ = 0;
};

struct TrainMetrics {
    long long update = 0;
    long long steps = 0;           // env steps consumed before this update
    double mean_return = 0.0;      // undiscounted J over rollout episodes
    double mean_return_discounted = 0.0;
    double mean_m_f_kg = 0.0;
    double mean_pos_err = 0.0;
    double mean_vel_err = 0.0;
    double j_clip = 0.0;
    double value_error = 0.0;
    double entropy_bonus = 0.0;
    double alpha = 0.0;
    double clip_eps = 0.0;
    double constraint_tolerance = 0.0;
    double eval_return = 0.0;      // deterministic-policy episode return
    double eval_pos_err = 0.0;
    double eval_vel_err = 0.0;
};

/// Runs the current policy for n_b episodes in each of the `envs`; envs may
/// execute concurrently, results are merged in env-index order. Episode
/// streams derive from (seed, env_index, episode_counter + b).
RolloutBuffer collect_rollouts(const PolicyParams& params,
                               std::vector<TransferEnv>& envs, int n_b,
                               const HyperParams& hp, std::uint64_t seed,
                               long long episode_counter);

/// One PPO update: n_opt epochs of shuffled minibatch ascent. The buffer is
/// consumed and cannot be reused.
ObjectiveValue update(RolloutBuffer& buffer, PolicyParams& params,
                      AdamOptimizer& adam, const HyperParams& hp, double alpha,
                      double clip_eps, RngStream& shuffle_stream);

struct TrainResult {
    PolicyParams final_params;
    PolicyParams best_params;
    double best_eval_return = 0.0;
    std::vector<TrainMetrics> metrics;
};

/// The untrained parameters train() starts from for a given seed.
PolicyParams initial_params(const NetworkSpec& spec, std::uint64_t seed);

/// Full training run. When `run_dir` is non-empty, writes metrics.ndjson,
/// checkpoint_best.json and checkpoint_final.json there.
TrainResult train(const MissionConfig& mission, const UncertaintyConfig& uncertainty,
                  const HyperParams& hp, const NetworkSpec& spec,
                  std::uint64_t seed, const std::string& run_dir = "",
                  bool verbose = false);

}  // namespace helios

#endif
