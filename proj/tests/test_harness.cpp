#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "glider/data_io.hpp"
#include "glider/harness.hpp"

using namespace glider;
namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    const char* p = std::getenv("GLIDERWATCH_BIN");
    REQUIRE_MESSAGE(p != nullptr, "GLIDERWATCH_BIN must point at the CLI binary");
    return p;
}

int run_cli(const std::string& args) {
    const std::string cmd = cli_path() + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / "gliderwatch_cli_test") {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

// One-day scenario, fast to simulate and estimate.
RunConfig day_config(bool with_injection) {
    RunConfig cfg;
    cfg.scenario_id = with_injection ? "cli-anomaly" : "cli-clean";
    cfg.sim_duration = 86400.0;
    cfg.sim_seed = 7;
    cfg.det_debounce = 600.0;
    if (with_injection) {
        AnomalyInjection inj;
        inj.kind = AnomalyKind::speed_degradation;
        inj.t_start = 43200.0;
        inj.magnitude = 0.5;
        cfg.injections.push_back(inj);
    }
    return cfg;
}

}  // namespace

TEST_CASE("simulate writes the full file set with the expected record counts") {
    TempDir tmp;
    const fs::path cfg_path = tmp.path / "run.cfg";
    write_config(cfg_path, day_config(true));
    const fs::path out = tmp.path / "sim";
    CHECK(run_cli("simulate --config " + cfg_path.string() + " --out " + out.string()) == 0);

    const auto dense = read_dense(out / "dense.csv");
    CHECK(dense.records.size() == 8641);  // duration/dt + 1
    const auto sparse = read_sparse(out / "sparse.csv");
    CHECK(sparse.records.size() == 6);
    const auto truth = read_truth(out / "truth.csv");
    REQUIRE(truth.injections.size() == 1);
    CHECK(truth.injections[0].t_start == 43200.0);
    CHECK(fs::exists(out / "scenario_resolved.cfg"));
    CHECK(fs::exists(out / "manifest.txt"));
}

TEST_CASE("same seed gives byte-identical outputs, different seed differs") {
    TempDir tmp;
    RunConfig cfg = day_config(false);
    cfg.sim_noise_position_std = 5.0;  // exercise the noise path too
    const fs::path cfg_path = tmp.path / "run.cfg";
    write_config(cfg_path, cfg);

    const fs::path out1 = tmp.path / "a", out2 = tmp.path / "b", out3 = tmp.path / "c";
    CHECK(run_cli("simulate --config " + cfg_path.string() + " --out " + out1.string()) == 0);
    CHECK(run_cli("simulate --config " + cfg_path.string() + " --out " + out2.string()) == 0);
    CHECK(run_cli("simulate --config " + cfg_path.string() + " --out " + out3.string() +
                  " --seed 8") == 0);
    for (const char* name : {"dense.csv", "sparse.csv", "truth.csv"}) {
        CHECK(slurp(out1 / name) == slurp(out2 / name));
        CHECK(slurp(out1 / name) != slurp(out3 / name));
    }
}

TEST_CASE("offline detection exits 0 on clean data and 2 on a degraded run") {
    TempDir tmp;
    const fs::path clean_cfg = tmp.path / "clean.cfg";
    write_config(clean_cfg, day_config(false));
    const fs::path anom_cfg = tmp.path / "anom.cfg";
    write_config(anom_cfg, day_config(true));

    const fs::path clean_sim = tmp.path / "clean-sim";
    const fs::path anom_sim = tmp.path / "anom-sim";
    REQUIRE(run_cli("simulate --config " + clean_cfg.string() + " --out " +
                    clean_sim.string()) == 0);
    REQUIRE(run_cli("simulate --config " + anom_cfg.string() + " --out " +
                    anom_sim.string()) == 0);

    const fs::path clean_out = tmp.path / "clean-off";
    CHECK(run_cli("detect-offline --config " + clean_cfg.string() + " --dense " +
                  (clean_sim / "dense.csv").string() + " --sparse " +
                  (clean_sim / "sparse.csv").string() + " --out " + clean_out.string()) ==
          kExitOk);
    CHECK(read_events(clean_out / "events.csv").empty());

    const fs::path anom_out = tmp.path / "anom-off";
    CHECK(run_cli("detect-offline --config " + anom_cfg.string() + " --dense " +
                  (anom_sim / "dense.csv").string() + " --sparse " +
                  (anom_sim / "sparse.csv").string() + " --out " + anom_out.string()) ==
          kExitAnomaly);
    const auto events = read_events(anom_out / "events.csv");
    REQUIRE(!events.empty());
    CHECK(events[0].kind == EventKind::anomaly);
    CHECK(events[0].t >= 43200.0);
    CHECK(events[0].t <= 43200.0 + 4.0 * 3600.0);
    CHECK(slurp(anom_out / "summary.txt").find("anomaly") != std::string::npos);
}

TEST_CASE("corrupt inputs exit 1 with a message") {
    TempDir tmp;
    const fs::path bad = tmp.path / "bad.csv";
    std::ofstream(bad) << "not a record file\n";
    CHECK(run_cli("detect-online --sparse " + bad.string() + " --out " +
                  (tmp.path / "x").string()) == kExitUsage);
    CHECK(run_cli("detect-offline --dense " + bad.string() + " --sparse " + bad.string() +
                  " --out " + (tmp.path / "y").string()) == kExitUsage);
    CHECK(run_cli("simulate --config " + bad.string() + " --out " +
                  (tmp.path / "z").string()) == kExitUsage);
}

TEST_CASE("replay at cadence zero reproduces the one-shot online bundle") {
    TempDir tmp;
    const fs::path cfg_path = tmp.path / "run.cfg";
    write_config(cfg_path, day_config(true));
    const fs::path sim = tmp.path / "sim";
    REQUIRE(run_cli("simulate --config " + cfg_path.string() + " --out " + sim.string()) == 0);

    const fs::path oneshot = tmp.path / "online";
    const int code_oneshot =
        run_cli("detect-online --config " + cfg_path.string() + " --sparse " +
                (sim / "sparse.csv").string() + " --out " + oneshot.string());

    const fs::path replay = tmp.path / "replay";
    const int code_replay =
        run_cli("replay-online --config " + cfg_path.string() + " --sparse " +
                (sim / "sparse.csv").string() + " --out " + replay.string() + " --cadence 0");

    CHECK(code_oneshot == code_replay);
    for (const char* name : {"series.csv", "events.csv", "summary.txt", "clle.csv",
                             "flow_comparison.csv", "speed_band.csv",
                             "trajectory_comparison.csv"}) {
        INFO(name);
        CHECK(slurp(oneshot / name) == slurp(replay / name));
    }
    CHECK(fs::exists(replay / "consumed.txt"));
    CHECK(fs::exists(replay / "events.log"));
}

TEST_CASE("replay can stop, restart, and finish without duplicate events") {
    TempDir tmp;
    const fs::path cfg_path = tmp.path / "run.cfg";
    write_config(cfg_path, day_config(true));
    const fs::path sim = tmp.path / "sim";
    REQUIRE(run_cli("simulate --config " + cfg_path.string() + " --out " + sim.string()) == 0);

    const fs::path replay = tmp.path / "replay";
    // First leg: stop after three of the six records.
    CHECK(run_cli("replay-online --config " + cfg_path.string() + " --sparse " +
                  (sim / "sparse.csv").string() + " --out " + replay.string() +
                  " --cadence 1 --stop-after 3") == 0);
    const std::string log_mid = slurp(replay / "events.log");

    // Resume; the ledger prevents reprocessing of the first three.
    const int code = run_cli("replay-online --config " + cfg_path.string() + " --sparse " +
                             (sim / "sparse.csv").string() + " --out " + replay.string() +
                             " --cadence 1");
    CHECK(code == kExitAnomaly);

    // A fresh uninterrupted replay is the baseline.
    const fs::path full = tmp.path / "full";
    REQUIRE(run_cli("replay-online --config " + cfg_path.string() + " --sparse " +
                    (sim / "sparse.csv").string() + " --out " + full.string() +
                    " --cadence 1") == kExitAnomaly);
    CHECK(slurp(replay / "events.log") == slurp(full / "events.log"));
    CHECK(slurp(replay / "events.csv") == slurp(full / "events.csv"));
    CHECK(slurp(replay / "series.csv") == slurp(full / "series.csv"));
    CHECK(log_mid.size() <= slurp(replay / "events.log").size());

    // Running the finished replay again must not add anything.
    const std::string before = slurp(replay / "events.log");
    CHECK(run_cli("replay-online --config " + cfg_path.string() + " --sparse " +
                  (sim / "sparse.csv").string() + " --out " + replay.string() +
                  " --cadence 1") == kExitAnomaly);
    CHECK(slurp(replay / "events.log") == before);
}

TEST_CASE("malformed spooled files are skipped with a warning") {
    TempDir tmp;
    const fs::path cfg_path = tmp.path / "run.cfg";
    write_config(cfg_path, day_config(false));
    const fs::path sim = tmp.path / "sim";
    REQUIRE(run_cli("simulate --config " + cfg_path.string() + " --out " + sim.string()) == 0);

    // Pre-poison the spool with a malformed record file; the feeder will
    // drop the real ones around it.
    const fs::path replay = tmp.path / "replay";
    fs::create_directories(replay / "spool");
    std::ofstream(replay / "spool" / "rec_00000.sparse") << "garbage\n";
    CHECK(run_cli("replay-online --config " + cfg_path.string() + " --sparse " +
                  (sim / "sparse.csv").string() + " --out " + replay.string() +
                  " --cadence 1") == kExitOk);
    CHECK(slurp(replay / "consumed.txt").find("!rec_00000.sparse") != std::string::npos);
    // All six real records were still consumed: the series reaches into the
    // final segment.
    const auto series = read_series(replay / "series.csv");
    CHECK(series.series.samples.back().t > 86400.0 - 2.0 * RunConfig{}.est_emit_dt);
}

TEST_CASE("detection threshold overrides reach the detector") {
    TempDir tmp;
    const fs::path cfg_path = tmp.path / "run.cfg";
    write_config(cfg_path, day_config(false));
    const fs::path sim = tmp.path / "sim";
    REQUIRE(run_cli("simulate --config " + cfg_path.string() + " --out " + sim.string()) == 0);

    // A clean run flagged anomalous once the band excludes the true speed.
    const fs::path out = tmp.path / "off";
    CHECK(run_cli("detect-offline --config " + cfg_path.string() + " --dense " +
                  (sim / "dense.csv").string() + " --sparse " +
                  (sim / "sparse.csv").string() + " --out " + out.string() +
                  " --v-min 0.21 --v-max 0.3") == kExitAnomaly);
}
