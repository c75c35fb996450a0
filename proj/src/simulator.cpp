#include "glider/simulator.hpp"

#include <cmath>
#include <random>

namespace glider {

namespace {

constexpr double kPositionSanityBound = 1e7;  // m

// mt19937_64 plus Box-Muller so the normal stream is identical across
// standard libraries.
class GaussianRng {
public:
    explicit GaussianRng(std::uint64_t seed) : gen_(seed) {}

    double uniform() {  // [0, 1)
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double normal(double std_dev) {
        if (std_dev == 0.0) return 0.0;
        if (have_spare_) {
            have_spare_ = false;
            return spare_ * std_dev;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a) * std_dev;
    }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

double speed_multiplier(double t, const std::vector<AnomalyInjection>& injections) {
    double m = 1.0;
    for (const auto& a : injections) {
        if (!a.active(t)) continue;
        if (a.kind == AnomalyKind::speed_degradation) m *= a.magnitude;
        if (a.kind == AnomalyKind::speed_dropout) m = 0.0;
    }
    return m;
}

double heading_offset(double t, const std::vector<AnomalyInjection>& injections) {
    double off = 0.0;
    for (const auto& a : injections)
        if (a.kind == AnomalyKind::heading_disturbance && a.active(t)) off += a.magnitude;
    return off;
}

// Commanded heading evaluated along the run; waypoint pursuit keeps state
// (the current target index). A waypoint is passed when the vehicle enters
// the arrival radius or crosses the plane perpendicular to the leg through
// the waypoint; without the abeam check a near-miss would make the pursuit
// heading thrash around a waypoint it keeps circling.
class HeadingScheduler {
public:
    HeadingScheduler(const HeadingPlan& plan, const Eigen::Vector2d& start) : plan_(plan) {
        if (plan_.mode == HeadingPlan::Mode::waypoints) {
            leg_from_ = start;
            next_ = plan_.waypoints.size() > 1 ? 1 : 0;
            last_psi_ = bearing(start, plan_.waypoints[next_]);
        } else {
            last_psi_ = plan_.knots.front().psi;
        }
    }

    double heading_at(double t, const Eigen::Vector2d& x) {
        if (plan_.mode == HeadingPlan::Mode::piecewise_constant) {
            for (std::size_t i = plan_.knots.size(); i-- > 0;) {
                if (t >= plan_.knots[i].t) return plan_.knots[i].psi;
            }
            return plan_.knots.front().psi;
        }
        const auto& wps = plan_.waypoints;
        const Eigen::Vector2d leg = wps[next_] - leg_from_;
        const bool arrived = (x - wps[next_]).norm() <= plan_.arrival_radius;
        const bool abeam = leg.squaredNorm() > 0.0 && leg.dot(wps[next_] - x) <= 0.0;
        if (arrived || abeam) {
            leg_from_ = wps[next_];
            next_ = (next_ + 1) % wps.size();
        }
        const Eigen::Vector2d d = wps[next_] - x;
        if (d.norm() > 1e-9) last_psi_ = std::atan2(d.y(), d.x());
        return last_psi_;
    }

private:
    static double bearing(const Eigen::Vector2d& from, const Eigen::Vector2d& to) {
        const Eigen::Vector2d d = to - from;
        return d.norm() > 1e-9 ? std::atan2(d.y(), d.x()) : 0.0;
    }

    const HeadingPlan& plan_;
    Eigen::Vector2d leg_from_{0.0, 0.0};
    std::size_t next_ = 0;
    double last_psi_ = 0.0;
};

double circular_mean(const std::vector<double>& headings, std::size_t i0, std::size_t i1) {
    double s = 0.0, c = 0.0;
    for (std::size_t k = i0; k < i1; ++k) {
        s += std::sin(headings[k]);
        c += std::cos(headings[k]);
    }
    return std::atan2(s, c);
}

std::size_t index_at(const GroundTruth& gt, double t) {
    const double dt = gt.times.size() > 1 ? gt.times[1] - gt.times[0] : 1.0;
    const auto i = static_cast<std::size_t>(std::llround(t / dt));
    return std::min(i, gt.times.size() - 1);
}

}  // namespace

void HeadingPlan::validate() const {
    if (mode == Mode::piecewise_constant) {
        if (knots.empty())
            throw ConfigError("sim.heading", "piecewise plan needs at least one knot");
        for (std::size_t i = 1; i < knots.size(); ++i)
            if (!(knots[i].t > knots[i - 1].t))
                throw ConfigError("sim.heading", "knot times must be strictly increasing");
        for (const auto& k : knots)
            if (!std::isfinite(k.t) || !std::isfinite(k.psi))
                throw ConfigError("sim.heading", "knots must be finite");
    } else {
        if (waypoints.size() < 2)
            throw ConfigError("sim.waypoint", "waypoint plan needs at least two waypoints");
        for (const auto& w : waypoints)
            if (!w.allFinite()) throw ConfigError("sim.waypoint", "waypoints must be finite");
        if (!(arrival_radius > 0.0))
            throw ConfigError("sim.arrival_radius", "must be positive");
    }
}

void SimConfig::validate() const {
    basis.validate();
    true_flow.validate(basis);
    heading_plan.validate();
    if (!(v_true > 0.0)) throw ConfigError("sim.v_true", "must be positive");
    if (!(dt > 0.0)) throw ConfigError("sim.dt", "must be positive");
    if (!(surfacing_interval > 0.0))
        throw ConfigError("sim.surfacing_interval", "must be positive");
    if (!(duration >= surfacing_interval))
        throw ConfigError("sim.duration", "must cover at least one surfacing interval");
    if (segment_subsample < 1)
        throw ConfigError("sim.segment_subsample", "must be >= 1");
    if (noise.position_std < 0.0 || noise.heading_std < 0.0)
        throw ConfigError("sim.noise", "noise standard deviations must be >= 0");
}

const char* to_string(AnomalyKind k) {
    switch (k) {
        case AnomalyKind::speed_degradation: return "speed_degradation";
        case AnomalyKind::speed_dropout: return "speed_dropout";
        case AnomalyKind::heading_disturbance: return "heading_disturbance";
    }
    return "unknown";
}

AnomalyKind anomaly_kind_from_string(const std::string& s) {
    if (s == "speed_degradation") return AnomalyKind::speed_degradation;
    if (s == "speed_dropout") return AnomalyKind::speed_dropout;
    if (s == "heading_disturbance") return AnomalyKind::heading_disturbance;
    throw ConfigError("inject", "unknown anomaly kind '" + s + "'");
}

void validate_injections(const std::vector<AnomalyInjection>& injections) {
    for (const auto& a : injections) {
        if (!(a.t_start < a.t_end))
            throw ConfigError("inject", "t_start must be below t_end");
        if (a.kind == AnomalyKind::speed_degradation &&
            !(a.magnitude > 0.0 && a.magnitude <= 1.0))
            throw ConfigError("inject", "degradation multiplier must be in (0, 1]");
        if (a.kind == AnomalyKind::heading_disturbance && !std::isfinite(a.magnitude))
            throw ConfigError("inject", "heading disturbance must be finite");
    }
    // Windows of the same kind may not overlap.
    for (std::size_t i = 0; i < injections.size(); ++i)
        for (std::size_t j = i + 1; j < injections.size(); ++j) {
            const auto& a = injections[i];
            const auto& b = injections[j];
            if (a.kind != b.kind) continue;
            if (a.t_start < b.t_end && b.t_start < a.t_end)
                throw ConfigError("inject", "overlapping windows of the same kind");
        }
}

GroundTruth simulate(const SimConfig& cfg, const std::vector<AnomalyInjection>& injections) {
    cfg.validate();
    validate_injections(injections);

    const auto n = static_cast<long long>(std::llround(cfg.duration / cfg.dt));
    if (n < 1) throw ConfigError("sim.duration", "must cover at least one step");

    GroundTruth gt;
    gt.times.reserve(n + 1);
    gt.positions.reserve(n + 1);
    gt.headings.reserve(n + 1);
    gt.speeds.reserve(n + 1);
    gt.flows.reserve(n + 1);

    Eigen::Vector2d x = cfg.heading_plan.mode == HeadingPlan::Mode::waypoints
                            ? cfg.heading_plan.waypoints.front()
                            : Eigen::Vector2d::Zero().eval();
    HeadingScheduler sched(cfg.heading_plan, x);
    Eigen::VectorXd phi;

    for (long long k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) * cfg.dt;
        const double psi = sched.heading_at(t, x);
        const double v_r = cfg.v_true * speed_multiplier(t, injections);
        eval_basis_into(cfg.basis, x, t, phi);
        const Eigen::Vector2d flow = cfg.true_flow.theta * phi;

        gt.times.push_back(t);
        gt.positions.push_back(x);
        gt.headings.push_back(psi);
        gt.speeds.push_back(v_r);
        gt.flows.push_back(flow);

        if (k == n) break;
        const double psi_eff = psi + heading_offset(t, injections);
        x += cfg.dt * (flow + v_r * Eigen::Vector2d(std::cos(psi_eff), std::sin(psi_eff)));
        if (!x.allFinite() || x.norm() > kPositionSanityBound)
            throw SimulationError("simulated position left the sanity bound at t=" +
                                  std::to_string(t + cfg.dt) + " s");
    }
    return gt;
}

std::vector<Segment> surfacing_segments(double duration, double interval,
                                        Warnings* warnings) {
    std::vector<Segment> segments;
    for (double t0 = 0.0; t0 < duration - 1e-9; t0 += interval) {
        const double t1 = std::min(t0 + interval, duration);
        if (t1 - t0 < 1e-9) {
            warn(warnings, "zero-length surfacing segment at t=" + std::to_string(t0) +
                               " s skipped");
            continue;
        }
        segments.push_back({t0, t1});
    }
    return segments;
}

std::vector<SegmentFlow> dead_reckon_flow(const GroundTruth& gt, double v_believed,
                                          const std::vector<Segment>& segments,
                                          Warnings* warnings) {
    if (gt.size() < 2) throw DomainError("dead_reckon_flow: ground truth too short");
    const double dt = gt.times[1] - gt.times[0];

    std::vector<SegmentFlow> flows;
    flows.reserve(segments.size());
    for (const auto& seg : segments) {
        if (!(seg.t1 > seg.t0)) {
            warn(warnings, "zero-length segment [" + std::to_string(seg.t0) + ", " +
                               std::to_string(seg.t1) + "] skipped");
            continue;
        }
        const std::size_t i0 = index_at(gt, seg.t0);
        const std::size_t i1 = index_at(gt, seg.t1);
        if (i1 <= i0) {
            warn(warnings, "segment shorter than one sample at t=" + std::to_string(seg.t0) +
                               " s skipped");
            continue;
        }
        const Eigen::Vector2d actual = gt.positions[i1] - gt.positions[i0];
        Eigen::Vector2d commanded = Eigen::Vector2d::Zero();
        for (std::size_t k = i0; k < i1; ++k) {
            commanded += dt * v_believed *
                         Eigen::Vector2d(std::cos(gt.headings[k]), std::sin(gt.headings[k]));
        }
        const double span = gt.times[i1] - gt.times[i0];
        flows.push_back({gt.times[i0], gt.times[i1], (actual - commanded) / span});
    }
    return flows;
}

std::vector<DenseRecord> to_dense_records(const GroundTruth& gt, const SimConfig& cfg,
                                          const LocalFrame& frame) {
    GaussianRng rng(cfg.rng_seed ^ 0x64656e7365ull);
    std::vector<DenseRecord> records;
    records.reserve(gt.size());
    for (std::size_t k = 0; k < gt.size(); ++k) {
        Eigen::Vector2d pos = gt.positions[k];
        pos.x() += rng.normal(cfg.noise.position_std);
        pos.y() += rng.normal(cfg.noise.position_std);
        double lat = 0.0, lon = 0.0;
        frame.unproject(pos, lat, lon);
        records.push_back({gt.times[k], lat, lon,
                           gt.headings[k] + rng.normal(cfg.noise.heading_std)});
    }
    return records;
}

std::vector<SparseRecord> to_sparse_records(const GroundTruth& gt, const SimConfig& cfg,
                                            const LocalFrame& frame, bool include_samples,
                                            Warnings* warnings) {
    const auto segments = surfacing_segments(gt.times.back(), cfg.surfacing_interval, warnings);
    const auto flows = dead_reckon_flow(gt, cfg.v_true, segments, warnings);
    GaussianRng rng(cfg.rng_seed ^ 0x7370617273ull);

    // One noisy fix per surfacing boundary, shared by adjacent segments.
    auto noisy_fix = [&](double t) {
        Eigen::Vector2d pos = gt.positions[index_at(gt, t)];
        pos.x() += rng.normal(cfg.noise.position_std);
        pos.y() += rng.normal(cfg.noise.position_std);
        double lat = 0.0, lon = 0.0;
        frame.unproject(pos, lat, lon);
        return std::pair<double, double>{lat, lon};
    };

    std::vector<SparseRecord> records;
    records.reserve(flows.size());
    std::pair<double, double> fix = flows.empty() ? std::pair<double, double>{0, 0}
                                                  : noisy_fix(flows.front().t0);
    for (const auto& f : flows) {
        SparseRecord rec;
        rec.segment_start_t = f.t0;
        rec.segment_end_t = f.t1;
        rec.start_lat = fix.first;
        rec.start_lon = fix.second;
        fix = noisy_fix(f.t1);
        rec.end_lat = fix.first;
        rec.end_lon = fix.second;
        const std::size_t i0 = index_at(gt, f.t0);
        const std::size_t i1 = index_at(gt, f.t1);
        rec.mean_heading = circular_mean(gt.headings, i0, i1);
        rec.f_m = f.f_m;
        if (include_samples) {
            for (std::size_t k = i0 + cfg.segment_subsample; k < i1;
                 k += cfg.segment_subsample) {
                Eigen::Vector2d pos = gt.positions[k];
                pos.x() += rng.normal(cfg.noise.position_std);
                pos.y() += rng.normal(cfg.noise.position_std);
                double lat = 0.0, lon = 0.0;
                frame.unproject(pos, lat, lon);
                rec.samples.push_back({gt.times[k], lat, lon});
            }
        }
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace glider
