#include "glider/estimator.hpp"

#include <cmath>

#include "glider/errors.hpp"

namespace glider {

namespace {

constexpr double kTimeEps = 1e-9;

int substep_count(double span, double internal_dt) {
    if (span <= 0.0) return 1;
    return std::max(1, static_cast<int>(std::ceil(span / internal_dt - 1e-9)));
}

Eigen::Vector2d heading_unit(double psi) {
    return {std::cos(psi), std::sin(psi)};
}

}  // namespace

void EstimatorGains::validate() const {
    if (!K.allFinite()) throw ConfigError("gains.k", "must be finite");
    if (std::abs(K(0, 1) - K(1, 0)) > 1e-12)
        throw ConfigError("gains.k", "must be symmetric");
    if (!(K(0, 0) > 0.0) || !(K(0, 0) * K(1, 1) - K(0, 1) * K(1, 0) > 0.0))
        throw ConfigError("gains.k", "must be positive definite");
    if (!(gamma_bar >= 0.0) || !std::isfinite(gamma_bar))
        throw ConfigError("gains.gamma_bar", "must be >= 0 and finite");
    if (!(s_gain >= 0.0) || !std::isfinite(s_gain))
        throw ConfigError("gains.s", "must be >= 0 and finite");
}

void EstimatorConfig::validate() const {
    gains.validate();
    if (!(internal_dt > 0.0)) throw ConfigError("estimator.internal_dt", "must be positive");
    if (!(emit_dt > 0.0)) throw ConfigError("estimator.emit_dt", "must be positive");
    if (!(innovation_guard > 0.0))
        throw ConfigError("estimator.innovation_guard", "must be positive");
    if (!(gap_factor > 0.0)) throw ConfigError("estimator.gap_factor", "must be positive");
}

AdaptiveEstimator::AdaptiveEstimator(const EstimatorGains& gains, BasisSet basis,
                                     const Eigen::Vector2d& x0, double v0, double t0,
                                     double innovation_guard)
    : gains_(gains), basis_(std::move(basis)), innovation_guard_(innovation_guard) {
    gains_.validate();
    basis_.validate();
    if (!x0.allFinite() || !std::isfinite(v0) || !std::isfinite(t0))
        throw DomainError("estimator init: non-finite input");
    state_.x_hat = x0;
    state_.v_hat = v0;
    state_.theta_hat = Eigen::Matrix2Xd::Zero(2, basis_.size());
    state_.t = t0;
    phi_.resize(basis_.size());
}

EstimateSample AdaptiveEstimator::step(const Eigen::Vector2d& x_meas, double psi,
                                       double dt) {
    return step(x_meas, heading_unit(psi), dt);
}

EstimateSample AdaptiveEstimator::step(const Eigen::Vector2d& x_meas,
                                       const Eigen::Vector2d& psi_unit, double dt) {
    if (!x_meas.allFinite()) throw DomainError("estimator step: non-finite measurement");
    if (!(dt >= 0.0) || !std::isfinite(dt))
        throw DomainError("estimator step: dt must be >= 0 and finite");

    const double t0 = state_.t;
    const Eigen::Vector2d e = x_meas - state_.x_hat;
    const double e_norm = e.norm();
    if (e_norm > innovation_guard_)
        throw DivergenceError("innovation " + std::to_string(e_norm) +
                              " m exceeded the guard at t=" + std::to_string(t0) + " s");

    eval_basis_into(basis_, state_.x_hat, t0, phi_);
    const Eigen::Vector2d x_hat_pre = state_.x_hat;

    state_.x_hat += dt * (state_.theta_hat * phi_ + state_.v_hat * psi_unit + gains_.K * e);
    state_.theta_hat += (dt * gains_.gamma_bar) * (e * phi_.transpose());
    state_.v_hat += dt * gains_.s_gain * e.dot(psi_unit);

    const Eigen::Vector2d f_l = state_.theta_hat * phi_;
    state_.clle_max = std::max(state_.clle_max, e_norm);
    state_.f_l_max = std::max(state_.f_l_max, f_l.norm());
    state_.t = t0 + dt;

    if (!state_.x_hat.allFinite() || !std::isfinite(state_.v_hat) ||
        !state_.theta_hat.allFinite())
        throw DivergenceError(
            "estimator state became non-finite at t=" + std::to_string(state_.t) +
            " s; reduce gains or the internal step");

    return {t0, x_meas, x_hat_pre, e_norm, state_.v_hat, f_l};
}

EstimateSample AdaptiveEstimator::step_to(const Eigen::Vector2d& x_meas,
                                          const Eigen::Vector2d& psi_unit, double t_target) {
    const double dt = t_target - state_.t;
    if (dt < -kTimeEps)
        throw DomainError("estimator step_to: target time runs backwards");
    EstimateSample sample = step(x_meas, psi_unit, std::max(dt, 0.0));
    state_.t = t_target;
    return sample;
}

void AdaptiveEstimator::observe_glider_flow(const Eigen::Vector2d& f_m) {
    if (!f_m.allFinite()) throw DomainError("observe_glider_flow: non-finite flow");
    state_.f_m_max = std::max(state_.f_m_max, f_m.norm());
}

void AdaptiveEstimator::reanchor(const Eigen::Vector2d& fix) {
    if (!fix.allFinite()) throw DomainError("reanchor: non-finite fix");
    state_.x_hat = fix;
}

EstimateSeries run_offline(const std::vector<Observation>& records,
                           const EstimatorConfig& cfg, const BasisSet& basis) {
    cfg.validate();
    EstimateSeries out;
    if (records.empty()) return out;

    for (std::size_t k = 0; k < records.size(); ++k) {
        if (!records[k].x.allFinite() || !std::isfinite(records[k].t) ||
            !std::isfinite(records[k].psi))
            throw InputError("non-finite record at index " + std::to_string(k));
        if (k > 0 && !(records[k].t > records[k - 1].t))
            throw InputError("record times must be strictly increasing at index " +
                             std::to_string(k));
    }

    AdaptiveEstimator est(cfg.gains, basis, records.front().x, cfg.v0, records.front().t,
                          cfg.innovation_guard);
    out.samples.reserve(records.size());

    for (std::size_t k = 0; k + 1 < records.size(); ++k) {
        const double span = records[k + 1].t - records[k].t;
        const int m = substep_count(span, cfg.internal_dt);
        const Eigen::Vector2d u = heading_unit(records[k].psi);
        for (int j = 0; j < m; ++j) {
            const double a = static_cast<double>(j) / m;
            const Eigen::Vector2d x_meas = (1.0 - a) * records[k].x + a * records[k + 1].x;
            const double target =
                j + 1 == m ? records[k + 1].t : records[k].t + span * (j + 1) / m;
            const EstimateSample sample = est.step_to(x_meas, u, target);
            if (j == 0) out.samples.push_back(sample);
        }
    }
    // Final record: observe without integrating so the series ends on it.
    out.samples.push_back(est.step(records.back().x, records.back().psi, 0.0));
    return out;
}

OnlineEstimator::OnlineEstimator(const EstimatorConfig& cfg, BasisSet basis,
                                 double surfacing_interval)
    : cfg_(cfg), basis_(std::move(basis)), surfacing_interval_(surfacing_interval) {
    cfg_.validate();
    if (!(surfacing_interval_ > 0.0))
        throw ConfigError("sim.surfacing_interval", "must be positive");
}

const EstimatorState& OnlineEstimator::state() const {
    if (!estimator_) throw Error("online estimator has consumed no records");
    return estimator_->state();
}

void OnlineEstimator::process_span(double t0, double t1, const Eigen::Vector2d& fix0,
                                   const Eigen::Vector2d& fix1, double psi,
                                   bool prediction_only) {
    const double span = t1 - t0;
    const int m = substep_count(span, cfg_.internal_dt);
    const double h = span / m;
    const int emit_every =
        std::max(1, static_cast<int>(std::llround(cfg_.emit_dt / std::max(h, 1e-12))));
    const Eigen::Vector2d u = heading_unit(psi);
    for (int j = 0; j < m; ++j) {
        Eigen::Vector2d x_meas;
        if (prediction_only) {
            x_meas = estimator_->state().x_hat;  // e = 0: dead-reckon through the gap
        } else {
            const double a = static_cast<double>(j) / m;
            x_meas = (1.0 - a) * fix0 + a * fix1;
        }
        const double target = j + 1 == m ? t1 : t0 + span * (j + 1) / m;
        const EstimateSample sample = estimator_->step_to(x_meas, u, target);
        if (j % emit_every == 0) series_.samples.push_back(sample);
    }
}

void OnlineEstimator::consume(const SegmentObservation& rec, Warnings* warnings) {
    if (!std::isfinite(rec.t0) || !std::isfinite(rec.t1) || !rec.fix0.allFinite() ||
        !rec.fix1.allFinite() || !std::isfinite(rec.psi_mean) || !rec.f_m.allFinite())
        throw InputError("non-finite sparse record");
    if (!(rec.t1 >= rec.t0)) throw InputError("sparse record ends before it starts");

    if (!estimator_) {
        estimator_.emplace(cfg_.gains, basis_, rec.fix0, cfg_.v0, rec.t0,
                           cfg_.innovation_guard);
    } else {
        if (rec.t0 < prev_end_t_ - kTimeEps)
            throw InputError("sparse records overlap or run backwards at t=" +
                             std::to_string(rec.t0) + " s");
        if (rec.t0 > prev_end_t_ + kTimeEps) {
            const double gap = rec.t0 - prev_end_t_;
            warn(warnings, "record gap of " + std::to_string(gap) + " s before t=" +
                               std::to_string(rec.t0) + " s");
            const bool too_long = gap > cfg_.gap_factor * surfacing_interval_;
            process_span(prev_end_t_, rec.t0, prev_end_fix_, rec.fix0, prev_psi_, too_long);
            // Dead reckoning through a long outage drifts without bound, so
            // restart the trajectory estimate on the first fresh fix.
            if (too_long) estimator_->reanchor(rec.fix0);
        }
    }

    process_span(rec.t0, rec.t1, rec.fix0, rec.fix1, rec.psi_mean, false);
    estimator_->observe_glider_flow(rec.f_m);
    prev_end_t_ = rec.t1;
    prev_end_fix_ = rec.fix1;
    prev_psi_ = rec.psi_mean;
}

EstimateSeries run_online(const std::vector<SegmentObservation>& feed,
                          const EstimatorConfig& cfg, const BasisSet& basis,
                          double surfacing_interval, Warnings* warnings) {
    OnlineEstimator online(cfg, basis, surfacing_interval);
    for (const auto& rec : feed) online.consume(rec, warnings);
    return online.series();
}

}  // namespace glider
