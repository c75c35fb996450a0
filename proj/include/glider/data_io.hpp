#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "glider/detector.hpp"
#include "glider/estimator.hpp"
#include "glider/geo.hpp"
#include "glider/records.hpp"
#include "glider/simulator.hpp"

namespace glider {

// Shortest round-trip decimal representation (exact on re-parse).
std::string fmt_double(double v);
double parse_double(const std::string& token, const std::string& source, long line);

std::string format_utc(long long epoch_seconds);
long long parse_utc(const std::string& iso, const std::string& source = "epoch",
                    long line = 0);

// ---------------------------------------------------------------------------
// Line-oriented file formats. Every file starts with `#version <name> <n>`;
// `#key value` lines before the data carry metadata; other `#` lines are
// comments; blank lines are ignored. See docs/formats.md for the grammar.
// ---------------------------------------------------------------------------

struct FileHeader {
    std::string version;     // e.g. "glider-dense 1"
    std::string epoch_utc;   // ISO-8601; empty when absent
    bool has_origin = false;
    double origin_lat = 0.0;
    double origin_lon = 0.0;
    PositionFrameKind frame = PositionFrameKind::geodetic;
};

struct DenseFile {
    FileHeader header;
    std::vector<DenseRecord> records;
};

struct SparseFile {
    FileHeader header;
    std::vector<SparseRecord> records;
};

struct SeriesFile {
    FileHeader header;
    EstimateSeries series;
};

struct TruthFile {
    FileHeader header;
    GroundTruth truth;
    std::vector<AnomalyInjection> injections;
};

DenseFile read_dense(const std::filesystem::path& path);
DenseFile read_dense_stream(std::istream& in, const std::string& source);
void write_dense(const std::filesystem::path& path, const DenseFile& file);

SparseFile read_sparse(const std::filesystem::path& path);
SparseFile read_sparse_stream(std::istream& in, const std::string& source);
void write_sparse(const std::filesystem::path& path, const SparseFile& file);

SeriesFile read_series(const std::filesystem::path& path);
SeriesFile read_series_stream(std::istream& in, const std::string& source);
void write_series(const std::filesystem::path& path, const SeriesFile& file);

TruthFile read_truth(const std::filesystem::path& path);
TruthFile read_truth_stream(std::istream& in, const std::string& source);
void write_truth(const std::filesystem::path& path, const TruthFile& file);

std::vector<DetectionEvent> read_events(const std::filesystem::path& path);
void write_events(const std::filesystem::path& path, const std::vector<DetectionEvent>& events,
                  const std::string& epoch_utc);

// Generic CSV-with-header reader for parse-back checks on report bundles.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};
Table read_table(const std::filesystem::path& path);

// Conversion into estimator inputs (local-frame meters via the file origin).
std::vector<Observation> to_observations(const DenseFile& file);
std::vector<SegmentObservation> to_segment_observations(const SparseFile& file);
std::vector<SegmentFlow> to_segment_flows(const SparseFile& file);

// ---------------------------------------------------------------------------
// Run configuration: `key = value` lines under the same header convention.
// Field defaults follow the standard deployment parameter set (4 bases,
// sigma 13 km, omega 2*pi*1e-6 rad/s, K = diag(0.003), gamma_bar = 5e-7,
// s = 0.03, speed band [0.15, 0.25] m/s, gamma_f = 1).
// ---------------------------------------------------------------------------

struct RunConfig {
    std::string scenario_id = "default";
    std::string epoch_utc = "2026-01-01T00:00:00Z";
    double frame_lat0 = 31.0;
    double frame_lon0 = -80.5;

    int basis_count = 4;
    double basis_sigma = 13e3;
    double basis_omega = kDefaultTidalFrequency;
    double basis_phase = 0.0;
    std::vector<double> basis_sigma_overrides;     // per-basis; empty = shared
    std::vector<Eigen::Vector2d> basis_centers;    // empty = auto 2x2 grid
    double basis_grid_inset = 0.25;                // fraction of bbox extent
    double coverage_floor = 0.05;

    double sim_v_true = 0.2;
    double sim_duration = 7.0 * 86400.0;
    double sim_dt = 10.0;
    double sim_surfacing_interval = 4.0 * 3600.0;
    int sim_segment_subsample = 3;
    bool sim_include_segment_samples = false;
    std::uint64_t sim_seed = 1;
    double sim_noise_position_std = 0.0;
    double sim_noise_heading_std = 0.0;
    double sim_arrival_radius = 100.0;
    std::vector<Eigen::Vector2d> sim_waypoints;    // empty = default octagon loop
    std::vector<HeadingKnot> sim_heading_knots;    // non-empty = piecewise plan
    std::vector<Eigen::Vector2d> flow_theta_cols;  // explicit theta columns
    double flow_draw_magnitude = 0.15;             // bound when theta is drawn

    Eigen::Matrix2d gains_k = Eigen::Matrix2d::Identity() * 0.003;
    double gains_gamma_bar = 5e-7;
    double gains_s = 30e-3;

    double est_v0 = -1.0;  // < 0: midpoint of the speed band
    double est_internal_dt = 0.05;
    double est_emit_dt = 60.0;
    double est_innovation_guard = 50e3;
    double est_gap_factor = 5.0;

    double det_v_min = 0.15;
    double det_v_max = 0.25;
    double det_gamma_f = 1.0;
    double det_debounce = 1800.0;
    double det_burn_in = -1.0;

    std::vector<AnomalyInjection> injections;
};

bool operator==(const RunConfig& a, const RunConfig& b);

RunConfig load_config(const std::filesystem::path& path);
RunConfig load_config_stream(std::istream& in, const std::string& source);
void write_config(const std::filesystem::path& path, const RunConfig& cfg);

// Resolution of derived pieces.
BasisSet resolved_basis(const RunConfig& cfg);
FlowParameters resolved_theta(const RunConfig& cfg, const BasisSet& basis);
SimConfig make_sim_config(const RunConfig& cfg, const BasisSet& basis,
                          const FlowParameters& theta);
EstimatorConfig make_estimator_config(const RunConfig& cfg);
DetectionConfig make_detection_config(const RunConfig& cfg);

// Report bundle: summary + fixed-header CSV series suitable for external
// plotting, plus the full estimate series and the event list.
void write_report(const std::filesystem::path& out_dir, const EstimateSeries& series,
                  const std::vector<SegmentFlow>& segments, const DetectionResult& result,
                  const DetectionConfig& cfg, const DeploymentMeta& meta);

}  // namespace glider
