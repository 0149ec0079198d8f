// Two-head MLP (policy mean + state value) with a state-independent Gaussian
// log-std, exact reverse-mode gradients, and JSON checkpointing.
#ifndef HELIOS_NET_HPP
#define HELIOS_NET_HPP

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "helios/rng.hpp"

namespace helios {

struct NetworkSpec {
    int input_dim = 8;
    std::vector<int> hidden{64, 64};  // per head; tanh activations
    int policy_out = 3;
    int value_out = 1;

    long long param_count() const;
    bool operator==(const NetworkSpec&) const = default;
};

struct LayerParams {
    Eigen::MatrixXd W;  // out x in
    Eigen::VectorXd b;
};

using HeadParams = std::vector<LayerParams>;

struct ShapeMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct VersionMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// All learnable parameters: both heads plus the Gaussian log-std vector.
struct PolicyParams {
    NetworkSpec spec;
    HeadParams policy;
    HeadParams value;
    Eigen::VectorXd log_std;

    /// Orthogonal-style init: gain sqrt(2) on hidden layers, 0.01 on the
    /// policy output, 1.0 on the value output, zero biases, log_std = 0.
    static PolicyParams init(const NetworkSpec& spec, RngStream& stream);

    /// Visits every coefficient in a fixed order (policy, value, log_std).
    void for_each(const std::function<void(double&)>& fn);
    void for_each(const std::function<void(const double&)>& fn) const;
};

/// Gradient holder with the same shape as PolicyParams.
struct ParamGradient {
    HeadParams policy;
    HeadParams value;
    Eigen::VectorXd log_std;

    static ParamGradient zeros_like(const PolicyParams& params);
    void for_each(const std::function<void(double&)>& fn);
    void for_each(const std::function<void(const double&)>& fn) const;
    double norm() const;
    void scale(double factor);
};

/// Batched head evaluation. Rows of `input` are samples. `cache`, when given,
/// stores the input and every hidden activation for the backward pass.
struct HeadCache {
    std::vector<Eigen::MatrixXd> acts;
};

Eigen::MatrixXd head_forward(const HeadParams& head, const Eigen::MatrixXd& input,
                             HeadCache* cache = nullptr);

/// Accumulates d(loss)/d(params) into `grad` for d(loss)/d(output) = dout.
void head_backward(const HeadParams& head, const HeadCache& cache,
                   const Eigen::MatrixXd& dout, HeadParams& grad);

/// Single-observation convenience: (policy mean, value).
std::pair<Eigen::Vector3d, double> forward(const PolicyParams& params,
                                           const Eigen::Matrix<double, 8, 1>& obs);

struct DistributionParams {
    Eigen::VectorXd mean;
    Eigen::VectorXd log_std;
};

/// Draws action = mean + std .* z, z ~ N(0, I); returns the draw and its
/// log-density.
std::pair<Eigen::VectorXd, double> sample_action(const DistributionParams& dist,
                                                 RngStream& stream);

double log_prob(const DistributionParams& dist, const Eigen::VectorXd& action);

/// Closed-form diagonal-Gaussian entropy: sum(log_std) + d/2 (1 + log 2pi).
double entropy(const Eigen::VectorXd& log_std);

void save_params(const PolicyParams& params, const std::string& path);
PolicyParams load_params(const std::string& path);

/// Human-readable layer/shape/parameter-count summary.
std::string describe(const PolicyParams& params);

}  // namespace helios

#endif
