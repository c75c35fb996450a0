#include "glider/detector.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "glider/errors.hpp"

namespace glider {

namespace {

std::string short_num(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

}  // namespace

void DetectionConfig::validate() const {
    if (!(v_min > 0.0)) throw ConfigError("detection.v_min", "must be positive");
    if (!(v_max > v_min))
        throw ConfigError("detection.v_max", "must exceed detection.v_min");
    if (!(gamma_f > 0.0)) throw ConfigError("detection.gamma_f", "must be positive");
    if (!(debounce >= 0.0)) throw ConfigError("detection.debounce", "must be >= 0");
    if (!std::isfinite(burn_in)) throw ConfigError("detection.burn_in", "must be finite");
}

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::anomaly: return "anomaly";
        case EventKind::false_alarm: return "false_alarm";
        case EventKind::recovered: return "recovered";
    }
    return "unknown";
}

EventKind event_kind_from_string(const std::string& s) {
    if (s == "anomaly") return EventKind::anomaly;
    if (s == "false_alarm") return EventKind::false_alarm;
    if (s == "recovered") return EventKind::recovered;
    throw DomainError("unknown event kind '" + s + "'");
}

double compute_p_e(const Eigen::Vector2d& f_m, const Eigen::Vector2d& f_l,
                   double f_l_max, double f_m_max, Warnings* warnings) {
    if (!f_m.allFinite() || !f_l.allFinite() || !std::isfinite(f_l_max) ||
        !std::isfinite(f_m_max) || f_l_max < 0.0 || f_m_max < 0.0)
        throw DomainError("compute_p_e: invalid input");
    const double denom = 2.0 * std::max(f_l_max, f_m_max);
    if (denom <= 0.0) {
        warn(warnings, "p_E undefined while both flow maxima are zero; using 0");
        return 0.0;
    }
    return (f_m - f_l).norm() / denom;
}

DetectionResult detect(const EstimateSeries& series,
                       const std::vector<SegmentFlow>& f_m_segments,
                       const DetectionConfig& cfg, Warnings* warnings) {
    cfg.validate();

    DetectionResult res;
    const std::size_t n = series.size();
    res.p_e.assign(n, std::numeric_limits<double>::quiet_NaN());
    if (n == 0) return res;

    const auto& samples = series.samples;
    const double t_first = samples.front().t;
    const double t_last = samples.back().t;
    res.burn_in_effective = cfg.burn_in >= 0.0 ? cfg.burn_in : 0.1 * (t_last - t_first);
    const double detect_from = t_first + res.burn_in_effective;

    double f_l_max = 0.0;
    double f_m_max = 0.0;
    bool warned_zero = false;
    std::size_t seg_i = 0;

    bool alerted = false;
    std::ptrdiff_t viol_start = -1;
    std::ptrdiff_t inband_start = -1;

    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = samples[i];
        f_l_max = std::max(f_l_max, s.f_l.norm());

        // Glider-estimated flow is piecewise-constant over segments.
        while (seg_i < f_m_segments.size() && f_m_segments[seg_i].t1 < s.t) ++seg_i;
        const SegmentFlow* cover = nullptr;
        if (seg_i < f_m_segments.size() && f_m_segments[seg_i].t0 <= s.t &&
            s.t <= f_m_segments[seg_i].t1)
            cover = &f_m_segments[seg_i];

        if (cover != nullptr) {
            f_m_max = std::max(f_m_max, cover->f_m.norm());
            Warnings local;
            res.p_e[i] = compute_p_e(cover->f_m, s.f_l, f_l_max, f_m_max, &local);
            if (!local.empty() && !warned_zero) {
                warn(warnings, local.messages.front());
                warned_zero = true;
            }
        }

        if (s.t < detect_from) continue;

        const bool violating = s.v_l < cfg.v_min || s.v_l > cfg.v_max;
        if (!alerted) {
            if (violating) {
                if (viol_start < 0) viol_start = static_cast<std::ptrdiff_t>(i);
                if (s.t - samples[viol_start].t >= cfg.debounce) {
                    const auto& trig = samples[viol_start];
                    const double p_e_trig = res.p_e[viol_start];
                    DetectionEvent ev;
                    ev.t = trig.t;
                    ev.v_l = trig.v_l;
                    ev.p_e = p_e_trig;
                    if (std::isfinite(p_e_trig) && p_e_trig > cfg.gamma_f) {
                        ev.kind = EventKind::false_alarm;
                        ev.detail = "speed estimate left the range but flow discrepancy p_e=" +
                                    short_num(p_e_trig) + " exceeds gamma_f; likely false alarm";
                    } else {
                        ev.kind = EventKind::anomaly;
                        ev.detail = std::isfinite(p_e_trig)
                                        ? "speed estimate left the expected range"
                                        : "speed estimate left the expected range; p_e "
                                          "unavailable (no glider flow yet)";
                        if (!std::isfinite(p_e_trig))
                            warn(warnings, "anomaly at t=" + std::to_string(trig.t) +
                                               " s has no glider flow coverage; p_e "
                                               "unavailable");
                    }
                    res.events.push_back(std::move(ev));
                    alerted = true;
                    viol_start = -1;
                    inband_start = -1;
                }
            } else {
                viol_start = -1;
            }
        } else {
            if (!violating) {
                if (inband_start < 0) inband_start = static_cast<std::ptrdiff_t>(i);
                if (s.t - samples[inband_start].t >= cfg.debounce) {
                    const auto& trig = samples[inband_start];
                    res.events.push_back({trig.t, EventKind::recovered, trig.v_l,
                                          res.p_e[inband_start],
                                          "speed estimate re-entered the expected range"});
                    alerted = false;
                    inband_start = -1;
                    viol_start = -1;
                }
            } else {
                inband_start = -1;
            }
        }
    }
    return res;
}

}  // namespace glider
