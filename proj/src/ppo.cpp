#include "helios/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numeric>

#include "helios/parallel.hpp"

namespace helios {

namespace {

// Stream domains: one per independent consumer of the global seed.
constexpr std::uint64_t kDomainEnv = 0;
constexpr std::uint64_t kDomainPolicy = 1;
constexpr std::uint64_t kDomainShuffle = 2;
constexpr std::uint64_t kDomainInit = 3;

constexpr double kClipFloor = 1e-6;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

}  // namespace

void HyperParams::validate() const {
    if (!(gamma > 0 && gamma <= 1)) throw std::invalid_argument("gamma must lie in (0, 1]");
    if (!(lambda > 0 && lambda <= 1)) throw std::invalid_argument("lambda must lie in (0, 1]");
    if (!(clip0 > 0 && clip0 < 1)) throw std::invalid_argument("clip0 must lie in (0, 1)");
    if (n_opt < 0) throw std::invalid_argument("n_opt must be non-negative");
    if (n_env < 1 || n_b < 1) throw std::invalid_argument("n_env and n_b must be positive");
    if (total_steps < 1) throw std::invalid_argument("total_steps must be positive");
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> compute_gae(
    const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
    const std::vector<std::uint8_t>& dones, double gamma, double lambda) {
    const Eigen::Index n = rewards.size();
    if (values.size() != n + 1 || Eigen::Index(dones.size()) != n) {
        throw LengthMismatch("compute_gae: rewards, values and dones are misaligned");
    }
    Eigen::VectorXd advantages(n), returns(n);
    double acc = 0.0;
    for (Eigen::Index i = n - 1; i >= 0; --i) {
        const bool terminal = dones[size_t(i)] != 0;
        const double v_next = terminal ? 0.0 : values[i + 1];
        const double delta = rewards[i] + gamma * v_next - values[i];
        acc = delta + gamma * lambda * (terminal ? 0.0 : acc);
        advantages[i] = acc;
    }
    returns = advantages + values.head(n);
    return {advantages, returns};
}

double probability_ratio(double log_prob_new, double log_prob_old) {
    return std::exp(log_prob_new - log_prob_old);
}

std::pair<double, double> schedules(double t, double T, const HyperParams& hp) {
    const double frac = 1.0 - t / T;
    return {hp.alpha0 * frac, std::max(hp.clip0 * frac, kClipFloor)};
}

RolloutBuffer collect_rollouts(const PolicyParams& params,
                               std::vector<TransferEnv>& envs, int n_b,
                               const HyperParams& hp, std::uint64_t seed,
                               long long episode_counter) {
    const int n_env = int(envs.size());
    const int N = envs.front().segment_count();
    const Eigen::Index M = Eigen::Index(n_env) * n_b * N;

    RolloutBuffer buf;
    buf.obs.resize(M, 8);
    buf.actions.resize(M, 3);
    buf.log_prob_old.resize(M);
    buf.value_old.resize(M);
    buf.rewards.resize(M);
    buf.dones.assign(size_t(M), 0);
    const int episodes = n_env * n_b;
    buf.episode_returns.assign(episodes, 0.0);
    buf.episode_returns_discounted.assign(episodes, 0.0);
    buf.episode_m_f_kg.assign(episodes, 0.0);
    buf.episode_pos_err.assign(episodes, 0.0);
    buf.episode_vel_err.assign(episodes, 0.0);

    parallel_for(n_env, [&](int e) {
        TransferEnv& env = envs[size_t(e)];
        for (int b = 0; b < n_b; ++b) {
            const std::uint64_t episode = std::uint64_t(episode_counter) + b;
            RngStream policy_stream =
                derive_stream(seed, std::uint64_t(e), episode, kDomainPolicy);
            Observation obs =
                env.reset(derive_stream(seed, std::uint64_t(e), episode, kDomainEnv));
            const int ep = e * n_b + b;
            double undiscounted = 0.0, discounted = 0.0, gamma_pow = 1.0;
            for (int k = 0; k < N; ++k) {
                const Eigen::Index row = Eigen::Index(ep) * N + k;
                const auto obs_vec = obs.vec();
                auto [mean, value] = forward(params, obs_vec);
                auto [action, lp] =
                    sample_action({mean, params.log_std}, policy_stream);
                const StepResult res = env.step(action);
                buf.obs.row(row) = obs_vec.transpose();
                buf.actions.row(row) = action.transpose();
                buf.log_prob_old[row] = lp;
                buf.value_old[row] = value;
                buf.rewards[row] = res.reward;
                buf.dones[size_t(row)] = res.done ? 1 : 0;
                undiscounted += res.reward;
                discounted += gamma_pow * res.reward;
                gamma_pow *= hp.gamma;
                obs = res.obs;
            }
            const ConstraintReport rep = env.report();
            buf.episode_returns[size_t(ep)] = undiscounted;
            buf.episode_returns_discounted[size_t(ep)] = discounted;
            buf.episode_m_f_kg[size_t(ep)] = rep.m_f_kg;
            buf.episode_pos_err[size_t(ep)] = rep.pos_err;
            buf.episode_vel_err[size_t(ep)] = rep.vel_err;
        }
    });

    Eigen::VectorXd values(M + 1);
    values.head(M) = buf.value_old;
    values[M] = 0.0;
    auto [adv, ret] = compute_gae(buf.rewards, values, buf.dones, hp.gamma, hp.lambda);

    if (hp.value_target == ValueTarget::kRewardsToGo) {
        // Literal undiscounted rewards-to-go within each episode.
        double acc = 0.0;
        for (Eigen::Index i = M - 1; i >= 0; --i) {
            acc = buf.rewards[i] + (buf.dones[size_t(i)] ? 0.0 : acc);
            ret[i] = acc;
        }
    }
    buf.returns = ret;

    const double mean = adv.mean();
    const double stddev = std::sqrt((adv.array() - mean).square().mean());
    buf.advantages = (adv.array() - mean) / (stddev + 1e-8);
    return buf;
}

ObjectiveValue ppo_objective(const RolloutBuffer& buffer,
                             const std::vector<int>& batch,
                             const PolicyParams& params, double clip_eps,
                             double c1, double c2, ParamGradient& grad) {
    const Eigen::Index B = Eigen::Index(batch.size());
    const Eigen::Index act_dim = params.log_std.size();
    Eigen::MatrixXd X(B, buffer.obs.cols()), A(B, act_dim);
    Eigen::VectorXd lpo(B), adv(B), ret(B);
    for (Eigen::Index i = 0; i < B; ++i) {
        const Eigen::Index row = batch[size_t(i)];
        X.row(i) = buffer.obs.row(row);
        A.row(i) = buffer.actions.row(row);
        lpo[i] = buffer.log_prob_old[row];
        adv[i] = buffer.advantages[row];
        ret[i] = buffer.returns[row];
    }

    HeadCache cache_pi, cache_vf;
    const Eigen::MatrixXd mean = head_forward(params.policy, X, &cache_pi);
    const Eigen::VectorXd v = head_forward(params.value, X, &cache_vf).col(0);

    const Eigen::ArrayXd inv_std = (-params.log_std.array()).exp();
    Eigen::MatrixXd zn = (A - mean).array().rowwise() * inv_std.transpose();
    const double lp_const =
        -params.log_std.sum() - 0.5 * double(act_dim) * 1.8378770664093454836;
    const Eigen::VectorXd lpn =
        (lp_const - 0.5 * zn.array().square().rowwise().sum()).matrix();

    const Eigen::ArrayXd ratio = (lpn - lpo).array().exp();
    const Eigen::ArrayXd clipped =
        ratio.min(1.0 + clip_eps).max(1.0 - clip_eps);
    const Eigen::ArrayXd surr1 = ratio * adv.array();
    const Eigen::ArrayXd surr2 = clipped * adv.array();

    ObjectiveValue obj;
    obj.j_clip = surr1.min(surr2).mean();
    obj.value_error = 0.5 * (v - ret).array().square().mean();
    obj.entropy_bonus = entropy(params.log_std);
    obj.total = obj.j_clip - c1 * obj.value_error + c2 * obj.entropy_bonus;

    // d total / d ratio: the clipped branch has zero slope once active.
    const Eigen::ArrayXd d_ratio =
        (surr1 <= surr2).select(adv.array() / double(B), Eigen::ArrayXd::Zero(B));
    const Eigen::ArrayXd d_lpn = d_ratio * ratio;

    const Eigen::MatrixXd d_mean =
        (zn.array().rowwise() * inv_std.transpose()).colwise() * d_lpn;
    grad.log_std +=
        ((zn.array().square() - 1.0).colwise() * d_lpn).colwise().sum().matrix().transpose();
    grad.log_std.array() += c2;  // dS/dlog_std = 1 per component

    const Eigen::MatrixXd d_value = (-c1 / double(B)) * (v - ret);

    head_backward(params.policy, cache_pi, d_mean, grad.policy);
    head_backward(params.value, cache_vf, d_value, grad.value);
    return obj;
}

AdamOptimizer::AdamOptimizer(const PolicyParams& params) {
    long long count = 0;
    params.for_each([&](const double&) { ++count; });
    m_ = Eigen::VectorXd::Zero(count);
    v_ = Eigen::VectorXd::Zero(count);
}

void AdamOptimizer::ascend(PolicyParams& params, const ParamGradient& direction,
                           double lr) {
    ++t_;
    Eigen::VectorXd flat(m_.size());
    {
        Eigen::Index i = 0;
        direction.for_each([&](const double& g) { flat[i++] = g; });
    }
    const double bc1 = 1.0 - std::pow(kAdamBeta1, double(t_));
    const double bc2 = 1.0 - std::pow(kAdamBeta2, double(t_));
    Eigen::Index i = 0;
    params.for_each([&](double& p) {
        const double g = flat[i];
        m_[i] = kAdamBeta1 * m_[i] + (1.0 - kAdamBeta1) * g;
        v_[i] = kAdamBeta2 * v_[i] + (1.0 - kAdamBeta2) * g * g;
        p += lr * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + kAdamEps);
        ++i;
    });
}

ObjectiveValue update(RolloutBuffer& buffer, PolicyParams& params,
                      AdamOptimizer& adam, const HyperParams& hp, double alpha,
                      double clip_eps, RngStream& shuffle_stream) {
    if (buffer.consumed) {
        throw StaleBuffer("rollout buffer has already been consumed by an update");
    }
    buffer.consumed = true;

    const Eigen::Index M = buffer.size();
    const int mb_size = hp.minibatch_size > 0 ? hp.minibatch_size
                                              : int(M) / hp.n_b;
    if (mb_size < 1 || M % mb_size != 0) {
        throw std::invalid_argument("minibatch size must evenly divide the buffer");
    }

    std::vector<int> perm(static_cast<size_t>(M));
    std::iota(perm.begin(), perm.end(), 0);

    ObjectiveValue mean_obj;
    int evals = 0;
    for (int epoch = 0; epoch < hp.n_opt; ++epoch) {
        for (Eigen::Index i = M - 1; i > 0; --i) {
            std::swap(perm[size_t(i)], perm[size_t(shuffle_stream.uniform_int(int(i) + 1))]);
        }
        for (Eigen::Index start = 0; start < M; start += mb_size) {
            const std::vector<int> batch(perm.begin() + start,
                                         perm.begin() + start + mb_size);
            ParamGradient grad = ParamGradient::zeros_like(params);
            const ObjectiveValue obj =
                ppo_objective(buffer, batch, params, clip_eps, hp.c1, hp.c2, grad);
            const double norm = grad.norm();
            if (norm > hp.grad_clip) grad.scale(hp.grad_clip / norm);
            adam.ascend(params, grad, alpha);
            mean_obj.total += obj.total;
            mean_obj.j_clip += obj.j_clip;
            mean_obj.value_error += obj.value_error;
            mean_obj.entropy_bonus += obj.entropy_bonus;
            ++evals;
        }
    }
    if (evals > 0) {
        mean_obj.total /= evals;
        mean_obj.j_clip /= evals;
        mean_obj.value_error /= evals;
        mean_obj.entropy_bonus /= evals;
    }
    return mean_obj;
}

namespace {

struct DeterministicEval {
    double episode_return = 0.0;
    double pos_err = 0.0;
    double vel_err = 0.0;
};

DeterministicEval evaluate_deterministic(const PolicyParams& params,
                                         TransferEnv& env) {
    DeterministicEval ev;
    Observation obs = env.reset(RngStream(0));
    while (!env.done()) {
        auto [mean, value] = forward(params, obs.vec());
        (void)value;
        const StepResult res = env.step(mean);
        ev.episode_return += res.reward;
        obs = res.obs;
    }
    const ConstraintReport rep = env.report();
    ev.pos_err = rep.pos_err;
    ev.vel_err = rep.vel_err;
    return ev;
}

nlohmann::json metrics_to_json(const TrainMetrics& m) {
    return {{"update", m.update},
            {"steps", m.steps},
            {"mean_return", m.mean_return},
            {"mean_return_discounted", m.mean_return_discounted},
            {"mean_m_f_kg", m.mean_m_f_kg},
            {"mean_pos_err", m.mean_pos_err},
            {"mean_vel_err", m.mean_vel_err},
            {"j_clip", m.j_clip},
            {"value_error", m.value_error},
            {"entropy", m.entropy_bonus},
            {"alpha", m.alpha},
            {"clip_eps", m.clip_eps},
            {"constraint_tolerance", m.constraint_tolerance},
            {"eval_return", m.eval_return},
            {"eval_pos_err", m.eval_pos_err},
            {"eval_vel_err", m.eval_vel_err}};
}

double vec_mean(const std::vector<double>& xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
}

}  // namespace

PolicyParams initial_params(const NetworkSpec& spec, std::uint64_t seed) {
    RngStream init_stream = derive_stream(seed, 0, 0, kDomainInit);
    return PolicyParams::init(spec, init_stream);
}

TrainResult train(const MissionConfig& mission, const UncertaintyConfig& uncertainty,
                  const HyperParams& hp, const NetworkSpec& spec,
                  std::uint64_t seed, const std::string& run_dir, bool verbose) {
    mission.validate();
    uncertainty.validate();
    hp.validate();

    std::vector<TransferEnv> envs;
    envs.reserve(size_t(hp.n_env));
    for (int e = 0; e < hp.n_env; ++e) envs.emplace_back(mission, uncertainty);

    UncertaintyConfig eval_cfg = uncertainty;
    eval_cfg.mode = UncertaintyMode::kUnperturbed;
    TransferEnv eval_env(mission, eval_cfg);

    RngStream shuffle_stream = derive_stream(seed, 0, 0, kDomainShuffle);

    TrainResult result;
    result.final_params = initial_params(spec, seed);
    result.best_params = result.final_params;
    result.best_eval_return = -std::numeric_limits<double>::infinity();
    AdamOptimizer adam(result.final_params);

    std::ofstream metrics_out;
    if (!run_dir.empty()) {
        std::filesystem::create_directories(run_dir);
        metrics_out.open(run_dir + "/metrics.ndjson");
        if (!metrics_out) throw std::runtime_error("cannot write metrics in " + run_dir);
    }

    long long steps = 0;
    long long episode_counter = 0;
    long long update_index = 0;
    const double T = double(hp.total_steps);
    while (steps < hp.total_steps) {
        const double eps_cons = tolerance_schedule(double(steps), T);
        for (TransferEnv& env : envs) env.set_constraint_tolerance(eps_cons);

        RolloutBuffer buffer =
            collect_rollouts(result.final_params, envs, hp.n_b, hp, seed, episode_counter);
        episode_counter += hp.n_b;

        const auto [alpha, clip_eps] = schedules(double(steps), T, hp);
        const ObjectiveValue obj = update(buffer, result.final_params, adam, hp,
                                          alpha, clip_eps, shuffle_stream);

        TrainMetrics m;
        m.update = update_index;
        m.steps = steps;
        m.mean_return = vec_mean(buffer.episode_returns);
        m.mean_return_discounted = vec_mean(buffer.episode_returns_discounted);
        m.mean_m_f_kg = vec_mean(buffer.episode_m_f_kg);
        m.mean_pos_err = vec_mean(buffer.episode_pos_err);
        m.mean_vel_err = vec_mean(buffer.episode_vel_err);
        m.j_clip = obj.j_clip;
        m.value_error = obj.value_error;
        m.entropy_bonus = obj.entropy_bonus;
        m.alpha = alpha;
        m.clip_eps = clip_eps;
        m.constraint_tolerance = eps_cons;

        const DeterministicEval ev =
            evaluate_deterministic(result.final_params, eval_env);
        m.eval_return = ev.episode_return;
        m.eval_pos_err = ev.pos_err;
        m.eval_vel_err = ev.vel_err;
        if (ev.episode_return > result.best_eval_return) {
            result.best_eval_return = ev.episode_return;
            result.best_params = result.final_params;
        }

        result.metrics.push_back(m);
        if (metrics_out) metrics_out << metrics_to_json(m).dump() << "\n";
        if (verbose && (update_index % 10 == 0)) {
            std::printf("update %5lld steps %9lld mean_return %10.4f eval_return %10.4f "
                        "pos_err %.5f\n",
                        update_index, steps, m.mean_return, m.eval_return, m.eval_pos_err);
            std::fflush(stdout);
        }

        steps += buffer.size();
        ++update_index;
    }

    if (!run_dir.empty()) {
        save_params(result.best_params, run_dir + "/checkpoint_best.json");
        save_params(result.final_params, run_dir + "/checkpoint_final.json");
    }
    return result;
}

}  // namespace helios
