#pragma once

#include <optional>
#include <vector>

#include "glider/flow_field.hpp"
#include "glider/warnings.hpp"

namespace glider {

struct EstimatorGains {
    Eigen::Matrix2d K = Eigen::Matrix2d::Identity() * 0.003;  // trajectory gain, 1/s
    double gamma_bar = 5e-7;  // flow-parameter adaptation rate
    double s_gain = 30e-3;    // speed adaptation rate

    // K symmetric positive definite; rates non-negative (zero freezes the
    // corresponding estimate).
    void validate() const;
};

struct EstimatorConfig {
    EstimatorGains gains;
    double v0 = 0.20;           // initial speed estimate, m/s
    // Internal integration step for the explicit observer law. The coupled
    // speed/trajectory loop is only contractive for steps below
    // min_eig(K)/s_gain, so runs substep record intervals at this dt.
    double internal_dt = 0.05;  // s
    double emit_dt = 60.0;      // online series cadence, s
    double innovation_guard = 50e3;  // m, abort beyond this
    double gap_factor = 5.0;    // gaps beyond gap_factor * surfacing_interval
                                // run on prediction only

    void validate() const;
};

struct EstimatorState {
    Eigen::Vector2d x_hat{0.0, 0.0};  // trajectory estimate, m
    double v_hat = 0.2;               // speed estimate, m/s
    Eigen::Matrix2Xd theta_hat;       // flow-parameter estimate, m/s
    double t = 0.0;
    double clle_max = 0.0;  // running max innovation norm, m
    double f_l_max = 0.0;   // running max algorithm-estimated flow speed, m/s
    double f_m_max = 0.0;   // running max glider-estimated flow speed, m/s
};

// One timestamped trajectory observation (local-frame meters).
struct Observation {
    double t = 0.0;
    Eigen::Vector2d x{0.0, 0.0};
    double psi = 0.0;
};

// One per-surfacing observation for the online mode.
struct SegmentObservation {
    double t0 = 0.0;
    double t1 = 0.0;
    Eigen::Vector2d fix0{0.0, 0.0};
    Eigen::Vector2d fix1{0.0, 0.0};
    double psi_mean = 0.0;
    Eigen::Vector2d f_m{0.0, 0.0};
};

struct EstimateSample {
    double t = 0.0;
    Eigen::Vector2d x_meas{0.0, 0.0};
    Eigen::Vector2d x_hat{0.0, 0.0};  // estimate held at t, before the update
    double clle = 0.0;                // |x_meas - x_hat| at t
    double v_l = 0.0;                 // speed estimate after the update
    Eigen::Vector2d f_l{0.0, 0.0};    // flow estimate theta_hat * phi(x_hat, t)
};

struct EstimateSeries {
    std::vector<EstimateSample> samples;

    bool empty() const { return samples.empty(); }
    std::size_t size() const { return samples.size(); }
};

// Gradient adaptive observer over the kinematics x' = theta phi + v Psi.
// One step integrates, with innovation e = x_meas - x_hat and
// phi = phi(x_hat, t):
//   x_hat     += dt * (theta_hat phi + v_hat Psi + K e)
//   theta_hat += dt * gamma_bar * e phi^T
//   v_hat     += dt * s * e . Psi
// and refreshes the running maxima. dt may be zero to observe without
// integrating.
class AdaptiveEstimator {
public:
    AdaptiveEstimator(const EstimatorGains& gains, BasisSet basis,
                      const Eigen::Vector2d& x0, double v0, double t0 = 0.0,
                      double innovation_guard = 50e3);

    EstimateSample step(const Eigen::Vector2d& x_meas, double psi, double dt);
    EstimateSample step(const Eigen::Vector2d& x_meas, const Eigen::Vector2d& psi_unit,
                        double dt);

    // Step landing exactly on t_target; avoids clock drift across substeps.
    EstimateSample step_to(const Eigen::Vector2d& x_meas, const Eigen::Vector2d& psi_unit,
                           double t_target);

    void observe_glider_flow(const Eigen::Vector2d& f_m);

    // Resets the trajectory estimate onto a fresh fix, keeping the speed and
    // flow-parameter estimates. Used after extended record outages, where
    // dead reckoning has drifted too far for the innovation to be useful.
    void reanchor(const Eigen::Vector2d& fix);

    const EstimatorState& state() const { return state_; }
    const BasisSet& basis() const { return basis_; }

private:
    EstimatorGains gains_;
    BasisSet basis_;
    EstimatorState state_;
    double innovation_guard_;
    Eigen::VectorXd phi_;
};

// Batch hindcast over a dense stream. Record intervals longer than the
// internal step are subdivided with linearly interpolated measurements; one
// series sample is emitted per input record.
EstimateSeries run_offline(const std::vector<Observation>& records,
                           const EstimatorConfig& cfg, const BasisSet& basis);

// Incremental estimator over per-surfacing records. The measured trajectory
// is linearly interpolated between fixes and stepped at the internal dt;
// samples are emitted every emit_dt. Previously emitted samples are never
// revised.
class OnlineEstimator {
public:
    OnlineEstimator(const EstimatorConfig& cfg, BasisSet basis, double surfacing_interval);

    void consume(const SegmentObservation& rec, Warnings* warnings = nullptr);

    const EstimateSeries& series() const { return series_; }
    bool started() const { return estimator_.has_value(); }
    const EstimatorState& state() const;

private:
    void process_span(double t0, double t1, const Eigen::Vector2d& fix0,
                      const Eigen::Vector2d& fix1, double psi, bool prediction_only);

    EstimatorConfig cfg_;
    BasisSet basis_;
    double surfacing_interval_;
    std::optional<AdaptiveEstimator> estimator_;
    EstimateSeries series_;
    double prev_end_t_ = 0.0;
    Eigen::Vector2d prev_end_fix_{0.0, 0.0};
    double prev_psi_ = 0.0;
};

EstimateSeries run_online(const std::vector<SegmentObservation>& feed,
                          const EstimatorConfig& cfg, const BasisSet& basis,
                          double surfacing_interval, Warnings* warnings = nullptr);

}  // namespace glider
