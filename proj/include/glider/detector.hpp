#pragma once

#include <string>
#include <vector>

#include "glider/estimator.hpp"
#include "glider/simulator.hpp"
#include "glider/warnings.hpp"

namespace glider {

struct DetectionConfig {
    double v_min = 0.15;     // m/s
    double v_max = 0.25;     // m/s
    double gamma_f = 1.0;    // false-alarm threshold on p_E
    double debounce = 1800.0;  // s of sustained violation before alerting
    double burn_in = -1.0;   // s; negative means 10% of the series span

    void validate() const;
};

enum class EventKind { anomaly, false_alarm, recovered };

const char* to_string(EventKind k);
EventKind event_kind_from_string(const std::string& s);

struct DetectionEvent {
    double t = 0.0;          // trigger time: first sample of the violation
    EventKind kind = EventKind::anomaly;
    double v_l = 0.0;        // speed estimate at trigger
    double p_e = 0.0;        // flow discrepancy at trigger; NaN when unavailable
    std::string detail;
};

// Flow-discrepancy criterion
//   p_E = |f_m - f_l| / (2 max(f_l_max, f_m_max)).
// Stays in [0, 1] whenever the running maxima cover the current values.
// Both maxima zero returns 0 by convention, with a warning.
double compute_p_e(const Eigen::Vector2d& f_m, const Eigen::Vector2d& f_l,
                   double f_l_max, double f_m_max, Warnings* warnings = nullptr);

struct DetectionResult {
    std::vector<DetectionEvent> events;
    // Per-sample p_E, aligned with the series; NaN where no glider flow
    // segment covers the sample.
    std::vector<double> p_e;
    double burn_in_effective = 0.0;
};

// Walks the series with the per-segment glider flow held piecewise-constant.
// Emits `anomaly` when the speed estimate leaves [v_min, v_max] continuously
// for at least `debounce` seconds after burn-in, `false_alarm` instead when
// p_E exceeds gamma_f at the trigger, and `recovered` when the estimate
// re-enters the band for at least `debounce`.
DetectionResult detect(const EstimateSeries& series,
                       const std::vector<SegmentFlow>& f_m_segments,
                       const DetectionConfig& cfg, Warnings* warnings = nullptr);

struct DeploymentMeta {
    std::string scenario_id;
    std::string epoch_utc;  // ISO-8601
    double origin_lat = 0.0;
    double origin_lon = 0.0;
};

}  // namespace glider
