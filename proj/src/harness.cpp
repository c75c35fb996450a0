#include "glider/harness.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>
#include <thread>

namespace glider {

namespace fs = std::filesystem;

int exit_code_for(const std::vector<DetectionEvent>& events) {
    bool any_false_alarm = false;
    for (const auto& ev : events) {
        if (ev.kind == EventKind::anomaly) return kExitAnomaly;
        if (ev.kind == EventKind::false_alarm) any_false_alarm = true;
    }
    return any_false_alarm ? kExitFalseAlarm : kExitOk;
}

void write_manifest(const fs::path& path, const RunManifest& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << "#version glider-manifest 1\n";
    out << "scenario.id = " << m.scenario_id << "\n";
    out << "mode = " << m.mode << "\n";
    out << "config = " << m.config_path << "\n";
    for (std::size_t i = 0; i < m.input_paths.size(); ++i)
        out << "input." << i + 1 << " = " << m.input_paths[i] << "\n";
    out << "out = " << m.out_dir << "\n";
    out << "seed = " << m.seed << "\n";
}

namespace {

FileHeader make_header(const RunConfig& cfg) {
    FileHeader h;
    h.epoch_utc = cfg.epoch_utc;
    h.has_origin = true;
    h.origin_lat = cfg.frame_lat0;
    h.origin_lon = cfg.frame_lon0;
    return h;
}

DeploymentMeta make_meta(const RunConfig& cfg, const FileHeader& data_header) {
    DeploymentMeta meta;
    meta.scenario_id = cfg.scenario_id;
    meta.epoch_utc =
        data_header.epoch_utc.empty() ? cfg.epoch_utc : data_header.epoch_utc;
    meta.origin_lat = data_header.has_origin ? data_header.origin_lat : cfg.frame_lat0;
    meta.origin_lon = data_header.has_origin ? data_header.origin_lon : cfg.frame_lon0;
    return meta;
}

// Detection needs the surfacing cadence to resolve gaps; take it from the
// config (the sparse file itself is the other option, but the config is
// authoritative for the deployment design).
int run_detection_and_report(const EstimateSeries& series,
                             const std::vector<SegmentFlow>& segments, const RunConfig& cfg,
                             const fs::path& out_dir, const DeploymentMeta& meta,
                             Warnings* warnings) {
    const DetectionConfig dc = make_detection_config(cfg);
    const DetectionResult result = detect(series, segments, dc, warnings);
    write_report(out_dir, series, segments, result, dc, meta);
    return exit_code_for(result.events);
}

}  // namespace

SimulateOutputs cmd_simulate(const RunConfig& cfg, const std::string& config_path,
                             const fs::path& out_dir, Warnings* warnings) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (!fs::exists(out_dir))
        throw IoError("cannot create output directory '" + out_dir.string() + "'");

    const BasisSet basis = resolved_basis(cfg);
    const FlowParameters theta = resolved_theta(cfg, basis);
    const SimConfig sim = make_sim_config(cfg, basis, theta);
    const GroundTruth gt = simulate(sim, cfg.injections);
    const LocalFrame frame(cfg.frame_lat0, cfg.frame_lon0);

    const auto coverage = coverage_check(basis, gt.positions, cfg.coverage_floor);
    if (coverage.flagged_count() > 0)
        warn(warnings, std::to_string(coverage.flagged_count()) +
                           " trajectory points fall below the basis coverage floor; "
                           "parameter estimates may not converge there");

    SimulateOutputs outs;
    outs.dense = out_dir / "dense.csv";
    outs.sparse = out_dir / "sparse.csv";
    outs.truth = out_dir / "truth.csv";
    outs.resolved_config = out_dir / "scenario_resolved.cfg";
    outs.manifest = out_dir / "manifest.txt";

    const FileHeader h = make_header(cfg);
    write_dense(outs.dense, {h, to_dense_records(gt, sim, frame)});
    write_sparse(outs.sparse,
                 {h, to_sparse_records(gt, sim, frame, cfg.sim_include_segment_samples,
                                       warnings)});
    write_truth(outs.truth, {h, gt, cfg.injections});

    // Reproducibility: freeze the drawn flow and auto-placed basis grid.
    RunConfig resolved = cfg;
    resolved.basis_centers.clear();
    for (const auto& b : basis.bases) resolved.basis_centers.push_back(b.center);
    resolved.flow_theta_cols.clear();
    for (int i = 0; i < basis.size(); ++i)
        resolved.flow_theta_cols.push_back(theta.theta.col(i));
    write_config(outs.resolved_config, resolved);

    write_manifest(outs.manifest, {cfg.scenario_id, "simulate", config_path, {},
                                   out_dir.string(), cfg.sim_seed});
    return outs;
}

int cmd_detect_offline(const fs::path& dense_path, const fs::path& sparse_path,
                       const RunConfig& cfg, const std::string& config_path,
                       const fs::path& out_dir, Warnings* warnings) {
    const DenseFile dense = read_dense(dense_path);
    const SparseFile sparse = read_sparse(sparse_path);
    const auto observations = to_observations(dense);
    const auto segments = to_segment_flows(sparse);

    const BasisSet basis = resolved_basis(cfg);
    const EstimateSeries series =
        run_offline(observations, make_estimator_config(cfg), basis);

    const int code = run_detection_and_report(series, segments, cfg, out_dir,
                                              make_meta(cfg, dense.header), warnings);
    write_manifest(out_dir / "manifest.txt",
                   {cfg.scenario_id, "offline", config_path,
                    {dense_path.string(), sparse_path.string()}, out_dir.string(),
                    cfg.sim_seed});
    return code;
}

int cmd_detect_online(const fs::path& sparse_path, const RunConfig& cfg,
                      const std::string& config_path, const fs::path& out_dir,
                      Warnings* warnings) {
    const SparseFile sparse = read_sparse(sparse_path);
    const auto feed = to_segment_observations(sparse);
    const auto segments = to_segment_flows(sparse);

    const BasisSet basis = resolved_basis(cfg);
    const EstimateSeries series = run_online(feed, make_estimator_config(cfg), basis,
                                             cfg.sim_surfacing_interval, warnings);

    const int code = run_detection_and_report(series, segments, cfg, out_dir,
                                              make_meta(cfg, sparse.header), warnings);
    write_manifest(out_dir / "manifest.txt",
                   {cfg.scenario_id, "online", config_path, {sparse_path.string()},
                    out_dir.string(), cfg.sim_seed});
    return code;
}

// ---------------------------------------------------------------------------
// Spool replay
// ---------------------------------------------------------------------------

namespace {

std::string spool_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "rec_%05zu.sparse", index + 1);
    return buf;
}

// Atomic drop: write to a temp name, then rename into place.
void feeder_write(const fs::path& spool, const SparseFile& source, std::size_t index) {
    SparseFile single;
    single.header = source.header;
    single.records.push_back(source.records[index]);
    const fs::path final_path = spool / spool_name(index);
    const fs::path tmp_path = spool / (spool_name(index) + ".tmp");
    write_sparse(tmp_path, single);
    fs::rename(tmp_path, final_path);
}

// Consumed-file ledger: one file name per line; '!' prefix marks a file that
// was skipped as malformed.
std::vector<std::string> read_ledger(const fs::path& path) {
    std::vector<std::string> lines;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) lines.push_back(line);
    return lines;
}

void append_line(const fs::path& path, const std::string& line) {
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) throw IoError("cannot append to '" + path.string() + "'");
    out << line << "\n";
    out.flush();
}

std::size_t count_lines(const fs::path& path) {
    std::ifstream in(path);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) ++n;
    return n;
}

// Incremental consumer over a spool directory. Survives restarts: the
// ledger says which files were already ingested and the estimator state is
// rebuilt deterministically by replaying them from the spool.
class ReplayConsumer {
public:
    ReplayConsumer(const RunConfig& cfg, const fs::path& out_dir, Warnings* warnings)
        : cfg_(cfg),
          out_dir_(out_dir),
          spool_(out_dir / "spool"),
          ledger_path_(out_dir / "consumed.txt"),
          log_path_(out_dir / "events.log"),
          online_(make_estimator_config(cfg), resolved_basis(cfg),
                  cfg.sim_surfacing_interval),
          warnings_(warnings) {
        std::error_code ec;
        fs::create_directories(spool_, ec);
        for (const auto& entry : read_ledger(ledger_path_)) {
            if (entry.empty() || entry[0] == '!') continue;
            ingest(spool_ / entry, /*record_ledger=*/false);
        }
        logged_events_ = count_lines(log_path_);
        refresh_events();
    }

    const fs::path& spool() const { return spool_; }
    std::size_t consumed_count() const { return consumed_.size(); }
    const EstimateSeries& series() const { return online_.series(); }
    const std::vector<SegmentFlow>& segments() const { return segments_; }
    const DetectionResult& result() const { return result_; }
    const FileHeader& data_header() const { return data_header_; }

    // Processes every unconsumed spool file in name order, up to `limit`
    // total consumed records (0 = no limit).
    void drain(std::size_t limit) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(spool_)) {
            if (!entry.is_regular_file()) continue;
            const std::string name = entry.path().filename().string();
            if (name.starts_with("rec_") && name.ends_with(".sparse"))
                files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            if (limit > 0 && consumed_.size() >= limit) break;
            const std::string name = f.filename().string();
            if (consumed_.count(name) || skipped_.count(name)) continue;
            ingest(f, /*record_ledger=*/true);
            refresh_events();
            for (std::size_t i = logged_events_; i < result_.events.size(); ++i) {
                const auto& ev = result_.events[i];
                const long long epoch =
                    data_header_.epoch_utc.empty() ? 0 : parse_utc(data_header_.epoch_utc);
                append_line(log_path_, format_utc(epoch + std::llround(ev.t)) + " " +
                                           to_string(ev.kind) + " t=" + fmt_double(ev.t) +
                                           " v_l=" + fmt_double(ev.v_l) +
                                           " p_e=" + fmt_double(ev.p_e));
                ++logged_events_;
            }
        }
    }

private:
    void ingest(const fs::path& file, bool record_ledger) {
        const std::string name = file.filename().string();
        SparseFile single;
        try {
            single = read_sparse(file);
        } catch (const Error& e) {
            warn(warnings_, "skipping malformed spooled file " + name + ": " + e.what());
            skipped_.insert(name);
            if (record_ledger) append_line(ledger_path_, "!" + name);
            return;
        }
        if (data_header_.version.empty()) data_header_ = single.header;
        for (const auto& rec : single.records) {
            SegmentObservation obs;
            const LocalFrame frame(single.header.origin_lat, single.header.origin_lon);
            obs.t0 = rec.segment_start_t;
            obs.t1 = rec.segment_end_t;
            obs.fix0 = frame.project(rec.start_lat, rec.start_lon);
            obs.fix1 = frame.project(rec.end_lat, rec.end_lon);
            obs.psi_mean = rec.mean_heading;
            obs.f_m = rec.f_m;
            online_.consume(obs, warnings_);
            segments_.push_back({rec.segment_start_t, rec.segment_end_t, rec.f_m});
        }
        consumed_.insert(name);
        if (record_ledger) append_line(ledger_path_, name);
    }

    void refresh_events() {
        result_ = detect(online_.series(), segments_, make_detection_config(cfg_), nullptr);
    }

    RunConfig cfg_;
    fs::path out_dir_;
    fs::path spool_;
    fs::path ledger_path_;
    fs::path log_path_;
    OnlineEstimator online_;
    std::vector<SegmentFlow> segments_;
    DetectionResult result_;
    FileHeader data_header_;
    std::set<std::string> consumed_;
    std::set<std::string> skipped_;
    std::size_t logged_events_ = 0;
    Warnings* warnings_;
};

}  // namespace

int cmd_replay_online(const fs::path& sparse_path, const RunConfig& cfg,
                      const std::string& config_path, const fs::path& out_dir,
                      double cadence_s, bool realtime, int stop_after, Warnings* warnings) {
    if (cadence_s < 0.0) throw ConfigError("cadence", "must be >= 0");
    const SparseFile source = read_sparse(sparse_path);

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    ReplayConsumer consumer(cfg, out_dir, warnings);
    const std::size_t limit =
        stop_after > 0 ? static_cast<std::size_t>(stop_after) : source.records.size();

    // TODO: socket transport as an alternative feed; the spool contract is
    // the only coupling point.
    for (std::size_t i = 0; i < source.records.size(); ++i) {
        feeder_write(consumer.spool(), source, i);
        if (realtime && cadence_s > 0.0)
            std::this_thread::sleep_for(std::chrono::duration<double>(cadence_s));
        if (cadence_s > 0.0) consumer.drain(limit);
        if (consumer.consumed_count() >= limit) break;
    }
    consumer.drain(limit);  // cadence 0: single pass after all records land

    write_manifest(out_dir / "manifest.txt",
                   {cfg.scenario_id, "replay-online", config_path, {sparse_path.string()},
                    out_dir.string(), cfg.sim_seed});

    if (consumer.consumed_count() < source.records.size()) return kExitOk;  // paused

    const DetectionConfig dc = make_detection_config(cfg);
    write_report(out_dir, consumer.series(), consumer.segments(), consumer.result(), dc,
                 make_meta(cfg, consumer.data_header()));
    return exit_code_for(consumer.result().events);
}

}  // namespace glider
