#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "glider/flow_field.hpp"
#include "glider/geo.hpp"
#include "glider/records.hpp"
#include "glider/warnings.hpp"

namespace glider {

// Heading schedule: piecewise-constant knots, or waypoint pursuit with
// instant heading changes (no turn dynamics).
struct HeadingKnot {
    double t = 0.0;
    double psi = 0.0;
};

struct HeadingPlan {
    enum class Mode { piecewise_constant, waypoints };

    Mode mode = Mode::waypoints;
    std::vector<HeadingKnot> knots;          // piecewise-constant mode
    std::vector<Eigen::Vector2d> waypoints;  // waypoint mode, cycled
    double arrival_radius = 100.0;           // m

    void validate() const;
};

struct NoiseConfig {
    double position_std = 0.0;  // m, applied to emitted fixes only
    double heading_std = 0.0;   // rad, applied to emitted headings only
};

struct SimConfig {
    FlowParameters true_flow;
    BasisSet basis;
    double v_true = 0.2;                     // nominal through-water speed, m/s
    HeadingPlan heading_plan;
    double duration = 7.0 * 86400.0;         // s
    double dt = 10.0;                        // s
    double surfacing_interval = 4.0 * 3600.0;  // s
    int segment_subsample = 3;               // keep every k-th intra-segment sample
    std::uint64_t rng_seed = 1;
    NoiseConfig noise;

    void validate() const;
};

enum class AnomalyKind { speed_degradation, speed_dropout, heading_disturbance };

const char* to_string(AnomalyKind k);
AnomalyKind anomaly_kind_from_string(const std::string& s);

struct AnomalyInjection {
    AnomalyKind kind = AnomalyKind::speed_degradation;
    double t_start = 0.0;
    double t_end = std::numeric_limits<double>::infinity();  // open-ended
    // Degradation multiplier in (0, 1] for speed_degradation, radians for
    // heading_disturbance, ignored for speed_dropout.
    double magnitude = 1.0;

    bool active(double t) const { return t >= t_start && t < t_end; }
};

void validate_injections(const std::vector<AnomalyInjection>& injections);

struct GroundTruth {
    std::vector<double> times;
    std::vector<Eigen::Vector2d> positions;
    std::vector<double> headings;          // commanded psi_c
    std::vector<double> speeds;            // effective through-water speed
    std::vector<Eigen::Vector2d> flows;    // true flow sampled at (x, t)

    std::size_t size() const { return times.size(); }
};

// Fixed-step explicit integration of
//   x' = F(x, t) + V(t) * [cos psi_eff, sin psi_eff]
// where V(t) carries speed injections and psi_eff carries heading
// disturbances; the recorded heading stays the commanded one.
GroundTruth simulate(const SimConfig& cfg, const std::vector<AnomalyInjection>& injections);

struct Segment {
    double t0 = 0.0;
    double t1 = 0.0;
};

std::vector<Segment> surfacing_segments(double duration, double interval,
                                        Warnings* warnings = nullptr);

struct SegmentFlow {
    double t0 = 0.0;
    double t1 = 0.0;
    Eigen::Vector2d f_m{0.0, 0.0};
};

// Per-segment depth-averaged flow the way the vehicle itself would compute
// it: (actual displacement - commanded displacement) / duration, where the
// commanded displacement integrates the *believed* speed over the commanded
// headings. Speed anomalies therefore alias into this estimate as apparent
// flow.
std::vector<SegmentFlow> dead_reckon_flow(const GroundTruth& gt, double v_believed,
                                          const std::vector<Segment>& segments,
                                          Warnings* warnings = nullptr);

std::vector<DenseRecord> to_dense_records(const GroundTruth& gt, const SimConfig& cfg,
                                          const LocalFrame& frame);

std::vector<SparseRecord> to_sparse_records(const GroundTruth& gt, const SimConfig& cfg,
                                            const LocalFrame& frame,
                                            bool include_samples = false,
                                            Warnings* warnings = nullptr);

}  // namespace glider
