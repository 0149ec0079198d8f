#include "helios/net.hpp"

#include <Eigen/QR>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace helios {

using nlohmann::json;

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr int kFormatVersion = 1;

std::vector<int> layer_sizes(const NetworkSpec& spec, int out_dim) {
    std::vector<int> sizes{spec.input_dim};
    sizes.insert(sizes.end(), spec.hidden.begin(), spec.hidden.end());
    sizes.push_back(out_dim);
    return sizes;
}

Eigen::MatrixXd orthogonal_matrix(int rows, int cols, double gain, RngStream& stream) {
    const int big = std::max(rows, cols);
    Eigen::MatrixXd a(big, std::min(rows, cols));
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = stream.gaussian();
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(big, a.cols());
    const Eigen::MatrixXd r = qr.matrixQR().topLeftCorner(a.cols(), a.cols());
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
        if (r(j, j) < 0) q.col(j) = -q.col(j);
    }
    Eigen::MatrixXd w = (rows >= cols) ? q : Eigen::MatrixXd(q.transpose());
    return gain * w.topLeftCorner(rows, cols);
}

HeadParams init_head(const NetworkSpec& spec, int out_dim, double out_gain,
                     RngStream& stream) {
    const auto sizes = layer_sizes(spec, out_dim);
    HeadParams head;
    for (size_t i = 0; i + 1 < sizes.size(); ++i) {
        const bool last = i + 2 == sizes.size();
        const double gain = last ? out_gain : std::sqrt(2.0);
        LayerParams layer;
        layer.W = orthogonal_matrix(sizes[i + 1], sizes[i], gain, stream);
        layer.b = Eigen::VectorXd::Zero(sizes[i + 1]);
        head.push_back(std::move(layer));
    }
    return head;
}

void for_each_head(HeadParams& head, const std::function<void(double&)>& fn) {
    for (LayerParams& layer : head) {
        double* w = layer.W.data();
        for (Eigen::Index i = 0; i < layer.W.size(); ++i) fn(w[i]);
        double* b = layer.b.data();
        for (Eigen::Index i = 0; i < layer.b.size(); ++i) fn(b[i]);
    }
}

HeadParams zero_head_like(const HeadParams& head) {
    HeadParams z;
    for (const LayerParams& layer : head) {
        z.push_back({Eigen::MatrixXd::Zero(layer.W.rows(), layer.W.cols()),
                     Eigen::VectorXd::Zero(layer.b.size())});
    }
    return z;
}

}  // namespace

long long NetworkSpec::param_count() const {
    long long count = 0;
    for (int out : {policy_out, value_out}) {
        const auto sizes = layer_sizes(*this, out);
        for (size_t i = 0; i + 1 < sizes.size(); ++i) {
            count += (long long)(sizes[i] + 1) * sizes[i + 1];
        }
    }
    return count + policy_out;  // log_std
}

PolicyParams PolicyParams::init(const NetworkSpec& spec, RngStream& stream) {
    PolicyParams p;
    p.spec = spec;
    p.policy = init_head(spec, spec.policy_out, 0.01, stream);
    p.value = init_head(spec, spec.value_out, 1.0, stream);
    p.log_std = Eigen::VectorXd::Zero(spec.policy_out);
    return p;
}

void PolicyParams::for_each(const std::function<void(double&)>& fn) {
    for_each_head(policy, fn);
    for_each_head(value, fn);
    for (Eigen::Index i = 0; i < log_std.size(); ++i) fn(log_std[i]);
}

void PolicyParams::for_each(const std::function<void(const double&)>& fn) const {
    const_cast<PolicyParams*>(this)->for_each(
        [&](double& x) { fn(const_cast<const double&>(x)); });
}

ParamGradient ParamGradient::zeros_like(const PolicyParams& params) {
    ParamGradient g;
    g.policy = zero_head_like(params.policy);
    g.value = zero_head_like(params.value);
    g.log_std = Eigen::VectorXd::Zero(params.log_std.size());
    return g;
}

void ParamGradient::for_each(const std::function<void(double&)>& fn) {
    for_each_head(policy, fn);
    for_each_head(value, fn);
    for (Eigen::Index i = 0; i < log_std.size(); ++i) fn(log_std[i]);
}

void ParamGradient::for_each(const std::function<void(const double&)>& fn) const {
    const_cast<ParamGradient*>(this)->for_each(
        [&](double& x) { fn(const_cast<const double&>(x)); });
}

double ParamGradient::norm() const {
    double sq = 0.0;
    for_each([&](const double& x) { sq += x * x; });
    return std::sqrt(sq);
}

void ParamGradient::scale(double factor) {
    for_each([&](double& x) { x *= factor; });
}

Eigen::MatrixXd head_forward(const HeadParams& head, const Eigen::MatrixXd& input,
                             HeadCache* cache) {
    if (input.cols() != head.front().W.cols()) {
        std::ostringstream msg;
        msg << "head_forward: expected input width " << head.front().W.cols()
            << ", got " << input.cols();
        throw ShapeMismatch(msg.str());
    }
    if (cache) {
        cache->acts.clear();
        cache->acts.push_back(input);
    }
    Eigen::MatrixXd a = input;
    for (size_t i = 0; i < head.size(); ++i) {
        Eigen::MatrixXd z =
            (a * head[i].W.transpose()).rowwise() + head[i].b.transpose();
        a = (i + 1 < head.size()) ? z.array().tanh().matrix() : z;
        if (cache) cache->acts.push_back(a);
    }
    return a;
}

void head_backward(const HeadParams& head, const HeadCache& cache,
                   const Eigen::MatrixXd& dout, HeadParams& grad) {
    Eigen::MatrixXd da = dout;
    for (int i = int(head.size()) - 1; i >= 0; --i) {
        const Eigen::MatrixXd& a_in = cache.acts[i];
        Eigen::MatrixXd dz;
        if (i + 1 == int(head.size())) {
            dz = da;
        } else {
            const Eigen::MatrixXd& a_out = cache.acts[i + 1];
            dz = da.array() * (1.0 - a_out.array().square());
        }
        grad[i].W.noalias() += dz.transpose() * a_in;
        grad[i].b.noalias() += dz.colwise().sum().transpose();
        if (i > 0) da.noalias() = dz * head[i].W;
    }
}

std::pair<Eigen::Vector3d, double> forward(const PolicyParams& params,
                                           const Eigen::Matrix<double, 8, 1>& obs) {
    const Eigen::MatrixXd x = obs.transpose();
    const Eigen::MatrixXd mean = head_forward(params.policy, x);
    const Eigen::MatrixXd value = head_forward(params.value, x);
    return {mean.row(0).transpose(), value(0, 0)};
}

std::pair<Eigen::VectorXd, double> sample_action(const DistributionParams& dist,
                                                 RngStream& stream) {
    Eigen::VectorXd action(dist.mean.size());
    for (Eigen::Index i = 0; i < action.size(); ++i) {
        action[i] = dist.mean[i] + std::exp(dist.log_std[i]) * stream.gaussian();
    }
    return {action, log_prob(dist, action)};
}

double log_prob(const DistributionParams& dist, const Eigen::VectorXd& action) {
    const Eigen::ArrayXd z =
        (action - dist.mean).array() * (-dist.log_std.array()).exp();
    return -dist.log_std.sum() - 0.5 * dist.mean.size() * kLog2Pi -
           0.5 * z.square().sum();
}

double entropy(const Eigen::VectorXd& log_std) {
    return log_std.sum() + 0.5 * log_std.size() * (1.0 + kLog2Pi);
}

namespace {

json head_to_json(const HeadParams& head, const std::string& name) {
    json layers = json::array();
    for (size_t i = 0; i < head.size(); ++i) {
        const LayerParams& layer = head[i];
        json w = json::array();
        for (Eigen::Index r = 0; r < layer.W.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.W.cols(); ++c) w.push_back(layer.W(r, c));
        }
        json b = json::array();
        for (Eigen::Index r = 0; r < layer.b.size(); ++r) b.push_back(layer.b[r]);
        layers.push_back({{"name", name + "." + std::to_string(i)},
                          {"rows", layer.W.rows()},
                          {"cols", layer.W.cols()},
                          {"W", std::move(w)},
                          {"b", std::move(b)}});
    }
    return layers;
}

HeadParams head_from_json(const json& layers, const NetworkSpec& spec, int out_dim) {
    const auto sizes = layer_sizes(spec, out_dim);
    if (layers.size() != sizes.size() - 1) {
        throw ShapeMismatch("checkpoint layer count disagrees with network spec");
    }
    HeadParams head;
    for (size_t i = 0; i + 1 < sizes.size(); ++i) {
        const json& lj = layers.at(i);
        const Eigen::Index rows = lj.at("rows").get<Eigen::Index>();
        const Eigen::Index cols = lj.at("cols").get<Eigen::Index>();
        if (rows != sizes[i + 1] || cols != sizes[i]) {
            throw ShapeMismatch("checkpoint layer shape disagrees with network spec");
        }
        const auto& w = lj.at("W");
        const auto& b = lj.at("b");
        if ((Eigen::Index)w.size() != rows * cols || (Eigen::Index)b.size() != rows) {
            throw ShapeMismatch("checkpoint array length disagrees with layer shape");
        }
        LayerParams layer;
        layer.W.resize(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) {
                layer.W(r, c) = w.at(r * cols + c).get<double>();
            }
        }
        layer.b.resize(rows);
        for (Eigen::Index r = 0; r < rows; ++r) layer.b[r] = b.at(r).get<double>();
        head.push_back(std::move(layer));
    }
    return head;
}

}  // namespace

void save_params(const PolicyParams& params, const std::string& path) {
    json doc;
    doc["format_version"] = kFormatVersion;
    doc["network"] = {{"input_dim", params.spec.input_dim},
                      {"hidden", params.spec.hidden},
                      {"policy_out", params.spec.policy_out},
                      {"value_out", params.spec.value_out},
                      {"activation", "tanh"}};
    json ls = json::array();
    for (Eigen::Index i = 0; i < params.log_std.size(); ++i) ls.push_back(params.log_std[i]);
    doc["log_std"] = std::move(ls);
    doc["policy"] = head_to_json(params.policy, "policy");
    doc["value"] = head_to_json(params.value, "value");

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    out << doc.dump(2) << "\n";
}

PolicyParams load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open checkpoint: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed checkpoint: ") + e.what());
    }
    try {
        if (!doc.contains("format_version") ||
            doc.at("format_version").get<int>() != kFormatVersion) {
            throw VersionMismatch("unsupported checkpoint format version");
        }
        PolicyParams p;
        const json& net = doc.at("network");
        p.spec.input_dim = net.at("input_dim").get<int>();
        p.spec.hidden = net.at("hidden").get<std::vector<int>>();
        p.spec.policy_out = net.at("policy_out").get<int>();
        p.spec.value_out = net.at("value_out").get<int>();
        p.policy = head_from_json(doc.at("policy"), p.spec, p.spec.policy_out);
        p.value = head_from_json(doc.at("value"), p.spec, p.spec.value_out);
        const auto& ls = doc.at("log_std");
        if ((int)ls.size() != p.spec.policy_out) {
            throw ShapeMismatch("log_std length disagrees with policy output");
        }
        p.log_std.resize(ls.size());
        for (Eigen::Index i = 0; i < p.log_std.size(); ++i) {
            p.log_std[i] = ls.at(i).get<double>();
        }
        bool finite = true;
        p.for_each([&](const double& x) { finite = finite && std::isfinite(x); });
        if (!finite) throw ParseError("checkpoint contains non-finite parameters");
        return p;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed checkpoint: ") + e.what());
    }
}

std::string describe(const PolicyParams& params) {
    std::ostringstream out;
    out << "two-head MLP, tanh hidden activations\n";
    auto print_head = [&](const char* name, const HeadParams& head) {
        out << name << ":";
        for (const LayerParams& layer : head) {
            out << " [" << layer.W.rows() << "x" << layer.W.cols() << "+b]";
        }
        out << "\n";
    };
    print_head("policy head", params.policy);
    print_head("value head ", params.value);
    out << "log_std dim: " << params.log_std.size() << "\n";
    out << "parameters : " << params.spec.param_count() << "\n";
    return out.str();
}

}  // namespace helios
