// helios: train, evaluate and analyze low-thrust Earth-Mars rendezvous
// guidance policies.
#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "helios/config.hpp"
#include "helios/mc.hpp"
#include "helios/ppo.hpp"

namespace fs = std::filesystem;
using namespace helios;

namespace {

void write_report(const std::string& path, const EpisodeRecord& ref) {
    nlohmann::json doc{{"J", ref.episode_return},
                       {"m_f_kg", ref.m_f_kg},
                       {"pos_err", ref.pos_err},
                       {"vel_err", ref.vel_err}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report: " + path);
    out << doc.dump(2) << "\n";
}

int cmd_train(const std::string& config_path, const std::string& out_override,
              long long seed_override, bool quiet) {
    RunConfig cfg = load_run_config(config_path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (seed_override >= 0) cfg.seed = std::uint64_t(seed_override);

    fs::create_directories(cfg.output_dir);
    save_run_config(cfg, cfg.output_dir + "/config.json");

    const TrainResult result =
        train(cfg.mission, cfg.uncertainty, cfg.hyper, cfg.network, cfg.seed,
              cfg.output_dir, !quiet);

    const EpisodeRecord ref =
        extract_reference_trajectory(result.best_params, cfg.mission);
    write_report(cfg.output_dir + "/report.json", ref);
    write_trace_csv(cfg.output_dir + "/reference_trajectory.csv", ref.trace);

    std::printf("training complete: %zu updates, best eval return %.6f\n",
                result.metrics.size(), result.best_eval_return);
    std::printf("reference trajectory: J %.6f  m_f %.2f kg  pos_err %.6f  vel_err %.6f\n",
                ref.episode_return, ref.m_f_kg, ref.pos_err, ref.vel_err);
    std::printf("run directory: %s\n", cfg.output_dir.c_str());
    return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& mode_label,
             int episodes, long long seed, std::string out_dir,
             const std::string& config_path, bool sample_actions, double tolerance,
             bool export_traces) {
    RunConfig cfg =
        config_path.empty() ? RunConfig{} : load_run_config(config_path);
    cfg.uncertainty.mode = parse_mode(mode_label);
    cfg.seed = std::uint64_t(seed);
    if (out_dir.empty()) {
        out_dir = "runs/eval_" + mode_label + "_seed" + std::to_string(seed);
    }

    const PolicyParams params = load_params(checkpoint);
    const auto records = run_campaign(params, cfg.mission, cfg.uncertainty,
                                      episodes, cfg.seed, sample_actions);
    const CampaignSummary summary = summarize(records, tolerance);

    fs::create_directories(out_dir);
    cfg.output_dir = out_dir;
    save_run_config(cfg, out_dir + "/config.json");
    write_summary_json(out_dir + "/summary.json", summary);
    write_episodes_csv(out_dir + "/episodes.csv", records, tolerance);
    if (export_traces) {
        fs::create_directories(out_dir + "/traces");
        for (const EpisodeRecord& rec : records) {
            write_trace_csv(out_dir + "/traces/episode_" +
                                std::to_string(rec.episode_index) + ".csv",
                            rec.trace);
        }
    }

    std::printf("%s campaign, %d episodes: m_f %.2f +- %.2f kg, pos_err %.5f +- %.5f, "
                "vel_err %.5f +- %.5f, SR %.1f%%\n",
                mode_label.c_str(), summary.n_episodes, summary.m_f_mean_kg,
                summary.m_f_std_kg, summary.pos_err_mean, summary.pos_err_std,
                summary.vel_err_mean, summary.vel_err_std, summary.success_rate_pct);
    return 0;
}

std::vector<Vec3> load_schedule_csv(const std::string& path, int n_segments) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open schedule file: " + path);
    std::vector<Vec3> schedule(size_t(n_segments), Vec3::Zero());
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty schedule file");
    int impulses = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        int k;
        Vec3 dv;
        try {
            std::getline(row, cell, ',');
            k = std::stoi(cell);
            for (int i = 0; i < 3; ++i) {
                if (!std::getline(row, cell, ',')) throw std::invalid_argument("short row");
                dv[i] = std::stod(cell);
            }
        } catch (const std::exception&) {
            throw std::invalid_argument("malformed schedule row: " + line);
        }
        if (k < 0 || k >= n_segments) {
            throw std::invalid_argument("schedule index " + std::to_string(k) +
                                        " outside [0, N)");
        }
        schedule[size_t(k)] = dv;
        if (++impulses > n_segments) {
            throw std::invalid_argument("schedule has more impulses than segments");
        }
    }
    return schedule;
}

int cmd_propagate(const std::string& config_path, const std::string& schedule_path,
                  const std::string& out_dir) {
    RunConfig cfg =
        config_path.empty() ? RunConfig{} : load_run_config(config_path);
    cfg.uncertainty.mode = UncertaintyMode::kUnperturbed;

    const auto schedule = load_schedule_csv(schedule_path, cfg.mission.N);
    TransferEnv env(cfg.mission, cfg.uncertainty);
    env.reset(RngStream(0));
    const double v_ref = env.scales().v_ref_kms;
    double episode_return = 0.0;
    for (const Vec3& dv_kms : schedule) {
        episode_return += env.step_command(dv_kms / v_ref).reward;
    }
    const ConstraintReport rep = env.report();

    fs::create_directories(out_dir);
    cfg.output_dir = out_dir;
    save_run_config(cfg, out_dir + "/config.json");
    write_trace_csv(out_dir + "/trajectory.csv", env.trace());

    double worst_violation = 0.0;
    for (double e : rep.dv_violations) worst_violation = std::max(worst_violation, e);
    nlohmann::json doc{{"J", episode_return},
                       {"m_f_kg", rep.m_f_kg},
                       {"pos_err", rep.pos_err},
                       {"vel_err", rep.vel_err},
                       {"max_dv_violation", worst_violation}};
    std::ofstream out(out_dir + "/report.json");
    out << doc.dump(2) << "\n";

    std::printf("open-loop propagation: J %.6f  m_f %.2f kg  pos_err %.6f  vel_err %.6f  "
                "max dv violation %.6f\n",
                episode_return, rep.m_f_kg, rep.pos_err, rep.vel_err, worst_violation);
    return 0;
}

int cmd_sweep_mte(const std::string& checkpoint, const std::string& config_path,
                  const std::string& out_dir) {
    RunConfig cfg =
        config_path.empty() ? RunConfig{} : load_run_config(config_path);
    const PolicyParams params = load_params(checkpoint);
    const auto sweep = mte_sweep(params, cfg.mission);

    fs::create_directories(out_dir);
    write_sweep_csv(out_dir + "/mte_sweep.csv", sweep);
    std::printf("mte sweep written: %zu locations -> %s/mte_sweep.csv\n", sweep.size(),
                out_dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust low-thrust Earth-Mars rendezvous guidance via PPO"};
    app.require_subcommand(1);

    std::string config_path, checkpoint, mode = "unp", out_dir, schedule_path;
    int episodes = 500;
    long long seed = -1;
    bool quiet = false, sample_actions = false, export_traces = false;
    double tolerance = kDefaultTolerance;

    CLI::App* train_cmd = app.add_subcommand("train", "train a policy from a config file");
    train_cmd->add_option("--config", config_path, "run configuration (JSON)")
        ->required();
    train_cmd->add_option("--out", out_dir, "override the config's output directory");
    train_cmd->add_option("--seed", seed, "override the config's seed");
    train_cmd->add_flag("--quiet", quiet, "suppress progress lines");

    CLI::App* eval_cmd =
        app.add_subcommand("eval", "run a Monte Carlo campaign with a trained policy");
    eval_cmd->add_option("--checkpoint", checkpoint, "policy checkpoint (JSON)")
        ->required();
    eval_cmd->add_option("--mode", mode, "environment: unp/st/obs/ctr/mte1/mte2");
    eval_cmd->add_option("--episodes", episodes, "number of episodes");
    eval_cmd->add_option("--seed", seed, "campaign seed");
    eval_cmd->add_option("--out", out_dir,
                         "output directory (default runs/eval_<mode>_seed<seed>)");
    eval_cmd->add_option("--config", config_path, "mission/uncertainty config (JSON)");
    eval_cmd->add_option("--tolerance", tolerance, "success tolerance");
    eval_cmd->add_flag("--sample", sample_actions,
                       "sample the stochastic policy instead of its mode");
    eval_cmd->add_flag("--traces", export_traces,
                       "write a per-episode trajectory CSV under traces/");

    CLI::App* prop_cmd = app.add_subcommand(
        "propagate", "replay an open-loop dv schedule in the unperturbed environment");
    prop_cmd->add_option("--schedule", schedule_path, "CSV: k,dvx_kms,dvy_kms,dvz_kms")
        ->required();
    prop_cmd->add_option("--config", config_path, "mission config (JSON)");
    prop_cmd->add_option("--out", out_dir, "output directory")->required();

    CLI::App* sweep_cmd = app.add_subcommand(
        "sweep-mte", "deterministic episodes with a forced single MTE at each location");
    sweep_cmd->add_option("--checkpoint", checkpoint, "policy checkpoint (JSON)")
        ->required();
    sweep_cmd->add_option("--config", config_path, "mission config (JSON)");
    sweep_cmd->add_option("--out", out_dir, "output directory")->required();

    CLI::App* describe_cmd =
        app.add_subcommand("describe", "print checkpoint shapes and parameter count");
    describe_cmd->add_option("--checkpoint", checkpoint, "policy checkpoint (JSON)")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed()) return cmd_train(config_path, out_dir, seed, quiet);
        if (eval_cmd->parsed()) {
            return cmd_eval(checkpoint, mode, episodes, seed < 0 ? 0 : seed, out_dir,
                            config_path, sample_actions, tolerance, export_traces);
        }
        if (prop_cmd->parsed()) return cmd_propagate(config_path, schedule_path, out_dir);
        if (sweep_cmd->parsed()) return cmd_sweep_mte(checkpoint, config_path, out_dir);
        if (describe_cmd->parsed()) {
            std::cout << describe(load_params(checkpoint));
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
