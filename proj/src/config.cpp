#include "helios/config.hpp"

#include <fstream>
#include <json.hpp>

namespace helios {

using nlohmann::json;

namespace {

void get_if(const json& j, const char* key, double& out) {
    if (j.contains(key)) out = j.at(key).get<double>();
}
void get_if(const json& j, const char* key, int& out) {
    if (j.contains(key)) out = j.at(key).get<int>();
}
void get_if(const json& j, const char* key, long long& out) {
    if (j.contains(key)) out = j.at(key).get<long long>();
}
void get_if(const json& j, const char* key, bool& out) {
    if (j.contains(key)) out = j.at(key).get<bool>();
}
void get_if(const json& j, const char* key, std::uint64_t& out) {
    if (j.contains(key)) out = j.at(key).get<std::uint64_t>();
}
void get_if(const json& j, const char* key, std::string& out) {
    if (j.contains(key)) out = j.at(key).get<std::string>();
}
void get_if(const json& j, const char* key, Vec3& out) {
    if (j.contains(key)) {
        const auto v = j.at(key).get<std::vector<double>>();
        if (v.size() != 3) {
            throw std::invalid_argument(std::string("config field '") + key +
                                        "' must be a 3-vector");
        }
        out = Vec3(v[0], v[1], v[2]);
    }
}

json vec_to_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

}  // namespace

void RunConfig::validate() const {
    mission.validate();
    uncertainty.validate();
    hyper.validate();
    if (output_dir.empty()) throw std::invalid_argument("output_dir must be non-empty");
}

RunConfig parse_run_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed config: ") + e.what());
    }

    RunConfig cfg;
    if (doc.contains("mission")) {
        const json& m = doc.at("mission");
        get_if(m, "segments", cfg.mission.N);
        get_if(m, "transfer_time_days", cfg.mission.tf_days);
        get_if(m, "max_thrust_N", cfg.mission.Tmax_N);
        get_if(m, "exhaust_velocity_kms", cfg.mission.ueq_kms);
        get_if(m, "initial_mass_kg", cfg.mission.m0_kg);
        get_if(m, "mu_sun_km3s2", cfg.mission.mu_sun);
        get_if(m, "r_earth_km", cfg.mission.r_earth_km);
        get_if(m, "v_earth_kms", cfg.mission.v_earth_kms);
        get_if(m, "r_mars_km", cfg.mission.r_mars_km);
        get_if(m, "v_mars_kms", cfg.mission.v_mars_kms);
    }
    if (doc.contains("uncertainty")) {
        const json& u = doc.at("uncertainty");
        get_if(u, "sigma_r_km", cfg.uncertainty.sigma_r_km);
        get_if(u, "sigma_v_kms", cfg.uncertainty.sigma_v_kms);
        get_if(u, "sigma_phi_deg", cfg.uncertainty.sigma_phi_deg);
        get_if(u, "sigma_theta_deg", cfg.uncertainty.sigma_theta_deg);
        get_if(u, "sigma_psi_deg", cfg.uncertainty.sigma_psi_deg);
        get_if(u, "sigma_u", cfg.uncertainty.sigma_u);
        get_if(u, "p_mte", cfg.uncertainty.p_mte);
        get_if(u, "n_mte", cfg.uncertainty.n_mte);
        get_if(u, "force_one_mte", cfg.uncertainty.force_one_mte);
        get_if(u, "mte_recurrence", cfg.uncertainty.mte_recurrence);
        if (u.contains("mode")) {
            cfg.uncertainty.mode = parse_mode(u.at("mode").get<std::string>());
        }
    }
    if (doc.contains("hyper")) {
        const json& h = doc.at("hyper");
        get_if(h, "gamma", cfg.hyper.gamma);
        get_if(h, "lambda", cfg.hyper.lambda);
        get_if(h, "alpha0", cfg.hyper.alpha0);
        get_if(h, "clip0", cfg.hyper.clip0);
        get_if(h, "c1", cfg.hyper.c1);
        get_if(h, "c2", cfg.hyper.c2);
        get_if(h, "n_opt", cfg.hyper.n_opt);
        get_if(h, "n_env", cfg.hyper.n_env);
        get_if(h, "n_b", cfg.hyper.n_b);
        get_if(h, "total_steps", cfg.hyper.total_steps);
        get_if(h, "minibatch_size", cfg.hyper.minibatch_size);
        get_if(h, "grad_clip", cfg.hyper.grad_clip);
        if (h.contains("value_target")) {
            const std::string v = h.at("value_target").get<std::string>();
            if (v == "lambda") {
                cfg.hyper.value_target = ValueTarget::kLambdaReturns;
            } else if (v == "rewards_to_go") {
                cfg.hyper.value_target = ValueTarget::kRewardsToGo;
            } else {
                throw std::invalid_argument("value_target must be 'lambda' or 'rewards_to_go'");
            }
        }
    }
    if (doc.contains("network")) {
        const json& n = doc.at("network");
        get_if(n, "input_dim", cfg.network.input_dim);
        if (n.contains("hidden")) {
            cfg.network.hidden = n.at("hidden").get<std::vector<int>>();
        }
        get_if(n, "policy_out", cfg.network.policy_out);
        get_if(n, "value_out", cfg.network.value_out);
    }
    get_if(doc, "seed", cfg.seed);
    get_if(doc, "output_dir", cfg.output_dir);
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return parse_run_config(text);
}

std::string run_config_to_json(const RunConfig& cfg) {
    json doc;
    doc["mission"] = {{"segments", cfg.mission.N},
                      {"transfer_time_days", cfg.mission.tf_days},
                      {"max_thrust_N", cfg.mission.Tmax_N},
                      {"exhaust_velocity_kms", cfg.mission.ueq_kms},
                      {"initial_mass_kg", cfg.mission.m0_kg},
                      {"mu_sun_km3s2", cfg.mission.mu_sun},
                      {"r_earth_km", vec_to_json(cfg.mission.r_earth_km)},
                      {"v_earth_kms", vec_to_json(cfg.mission.v_earth_kms)},
                      {"r_mars_km", vec_to_json(cfg.mission.r_mars_km)},
                      {"v_mars_kms", vec_to_json(cfg.mission.v_mars_kms)}};
    doc["uncertainty"] = {{"sigma_r_km", cfg.uncertainty.sigma_r_km},
                          {"sigma_v_kms", cfg.uncertainty.sigma_v_kms},
                          {"sigma_phi_deg", cfg.uncertainty.sigma_phi_deg},
                          {"sigma_theta_deg", cfg.uncertainty.sigma_theta_deg},
                          {"sigma_psi_deg", cfg.uncertainty.sigma_psi_deg},
                          {"sigma_u", cfg.uncertainty.sigma_u},
                          {"p_mte", cfg.uncertainty.p_mte},
                          {"n_mte", cfg.uncertainty.n_mte},
                          {"mode", to_string(cfg.uncertainty.mode)},
                          {"force_one_mte", cfg.uncertainty.force_one_mte},
                          {"mte_recurrence", cfg.uncertainty.mte_recurrence}};
    doc["hyper"] = {{"gamma", cfg.hyper.gamma},
                    {"lambda", cfg.hyper.lambda},
                    {"alpha0", cfg.hyper.alpha0},
                    {"clip0", cfg.hyper.clip0},
                    {"c1", cfg.hyper.c1},
                    {"c2", cfg.hyper.c2},
                    {"n_opt", cfg.hyper.n_opt},
                    {"n_env", cfg.hyper.n_env},
                    {"n_b", cfg.hyper.n_b},
                    {"total_steps", cfg.hyper.total_steps},
                    {"minibatch_size", cfg.hyper.minibatch_size},
                    {"grad_clip", cfg.hyper.grad_clip},
                    {"value_target",
                     cfg.hyper.value_target == ValueTarget::kLambdaReturns
                         ? "lambda"
                         : "rewards_to_go"}};
    doc["network"] = {{"input_dim", cfg.network.input_dim},
                      {"hidden", cfg.network.hidden},
                      {"policy_out", cfg.network.policy_out},
                      {"value_out", cfg.network.value_out}};
    doc["seed"] = cfg.seed;
    doc["output_dir"] = cfg.output_dir;
    return doc.dump(2) + "\n";
}

void save_run_config(const RunConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write config snapshot: " + path);
    out << run_config_to_json(cfg);
}

}  // namespace helios
