// gliderwatch: synthetic glider deployments plus speed/flow anomaly
// detection over dense (post-recovery) or sparse (per-surfacing) records.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "glider/harness.hpp"

namespace {

namespace fs = std::filesystem;

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    long long seed = -1;
    double v_min = -1.0;
    double v_max = -1.0;
    double gamma_f = -1.0;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required) {
    auto* c = cmd->add_option("--config", opts.config_path, "run configuration file");
    if (config_required) c->required();
    cmd->add_option("--out", opts.out_dir,
                    "output directory (default $GLIDERWATCH_OUT_ROOT/<scenario>-<mode>)");
    cmd->add_option("--seed", opts.seed, "override the scenario seed");
    cmd->add_option("--v-min", opts.v_min, "override detection.v_min");
    cmd->add_option("--v-max", opts.v_max, "override detection.v_max");
    cmd->add_option("--gamma-f", opts.gamma_f, "override detection.gamma_f");
}

glider::RunConfig load_with_overrides(const CommonOpts& opts) {
    glider::RunConfig cfg = opts.config_path.empty()
                                ? glider::RunConfig{}
                                : glider::load_config(opts.config_path);
    if (opts.seed >= 0) cfg.sim_seed = static_cast<std::uint64_t>(opts.seed);
    if (opts.v_min > 0.0) cfg.det_v_min = opts.v_min;
    if (opts.v_max > 0.0) cfg.det_v_max = opts.v_max;
    if (opts.gamma_f > 0.0) cfg.det_gamma_f = opts.gamma_f;
    return cfg;
}

fs::path resolve_out(const CommonOpts& opts, const glider::RunConfig& cfg,
                     const std::string& mode) {
    if (!opts.out_dir.empty()) return opts.out_dir;
    const char* root = std::getenv("GLIDERWATCH_OUT_ROOT");
    const fs::path base = root != nullptr && *root != '\0' ? fs::path(root) : fs::path("out");
    return base / (cfg.scenario_id + "-" + mode);
}

void print_warnings(const glider::Warnings& w) {
    for (const auto& msg : w.messages) std::cerr << "warning: " << msg << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"glider deployment simulator and anomaly detector"};
    app.require_subcommand(1);

    CommonOpts sim_opts, off_opts, on_opts, replay_opts;
    std::string dense_path, off_sparse_path, on_sparse_path, replay_sparse_path;
    double cadence = 0.0;
    bool realtime = false;
    int stop_after = 0;

    auto* sim = app.add_subcommand("simulate", "generate a synthetic deployment");
    add_common(sim, sim_opts, false);

    auto* off = app.add_subcommand("detect-offline", "hindcast detection over dense records");
    add_common(off, off_opts, false);
    off->add_option("--dense", dense_path, "dense record file")->required();
    off->add_option("--sparse", off_sparse_path, "sparse record file (glider flow source)")
        ->required();

    auto* on = app.add_subcommand("detect-online", "one-shot detection over sparse records");
    add_common(on, on_opts, false);
    on->add_option("--sparse", on_sparse_path, "sparse record file")->required();

    auto* replay = app.add_subcommand(
        "replay-online", "replay sparse records through a spool directory");
    add_common(replay, replay_opts, false);
    replay->add_option("--sparse", replay_sparse_path, "sparse record file")->required();
    replay->add_option("--cadence", cadence, "seconds per record (0 = flush immediately)");
    replay->add_flag("--realtime", realtime, "pace the cadence on the wall clock");
    replay->add_option("--stop-after", stop_after,
                       "stop after this many records are consumed (resume later)");

    CLI11_PARSE(app, argc, argv);

    try {
        glider::Warnings warnings;
        int code = glider::kExitOk;
        if (sim->parsed()) {
            const auto cfg = load_with_overrides(sim_opts);
            const auto out = resolve_out(sim_opts, cfg, "simulate");
            const auto files = glider::cmd_simulate(cfg, sim_opts.config_path, out, &warnings);
            std::cout << "dense:  " << files.dense.string() << "\n"
                      << "sparse: " << files.sparse.string() << "\n"
                      << "truth:  " << files.truth.string() << "\n";
        } else if (off->parsed()) {
            const auto cfg = load_with_overrides(off_opts);
            const auto out = resolve_out(off_opts, cfg, "offline");
            code = glider::cmd_detect_offline(dense_path, off_sparse_path, cfg,
                                              off_opts.config_path, out, &warnings);
            std::cout << "report: " << out.string() << "\n";
        } else if (on->parsed()) {
            const auto cfg = load_with_overrides(on_opts);
            const auto out = resolve_out(on_opts, cfg, "online");
            code = glider::cmd_detect_online(on_sparse_path, cfg, on_opts.config_path, out,
                                             &warnings);
            std::cout << "report: " << out.string() << "\n";
        } else if (replay->parsed()) {
            const auto cfg = load_with_overrides(replay_opts);
            const auto out = resolve_out(replay_opts, cfg, "replay");
            code = glider::cmd_replay_online(replay_sparse_path, cfg, replay_opts.config_path,
                                             out, cadence, realtime, stop_after, &warnings);
            std::cout << "report: " << out.string() << "\n";
        }
        print_warnings(warnings);
        return code;
    } catch (const glider::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return glider::kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return glider::kExitUsage;
    }
}
