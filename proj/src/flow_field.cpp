#include "glider/flow_field.hpp"

#include <algorithm>
#include <cmath>

namespace glider {

void BasisFunction::validate() const {
    if (!center.allFinite()) throw ConfigError("basis.center", "must be finite");
    if (!(width > 0.0) || !std::isfinite(width))
        throw ConfigError("basis.sigma", "width must be positive and finite");
    if (!(tidal_frequency >= 0.0) || !std::isfinite(tidal_frequency))
        throw ConfigError("basis.omega", "tidal frequency must be >= 0 and finite");
    if (!std::isfinite(tidal_phase))
        throw ConfigError("basis.phase", "tidal phase must be finite");
}

void BasisSet::validate() const {
    if (bases.empty()) throw ConfigError("basis.count", "basis set must be non-empty");
    for (const auto& b : bases) b.validate();
}

void FlowParameters::validate(const BasisSet& bs) const {
    if (theta.cols() != bs.size())
        throw ConfigError("flow.theta",
                          "parameter columns (" + std::to_string(theta.cols()) +
                              ") must match basis count (" + std::to_string(bs.size()) + ")");
    if (!theta.allFinite()) throw ConfigError("flow.theta", "entries must be finite");
}

double spatial_factor(const BasisFunction& b, const Eigen::Vector2d& x) {
    const double dx = x.x() - b.center.x();
    const double dy = x.y() - b.center.y();
    return std::exp(-std::sqrt(dx * dx + dy * dy) / (2.0 * b.width));
}

void eval_basis_into(const BasisSet& bs, const Eigen::Vector2d& x, double t,
                     Eigen::VectorXd& out) {
    if (!x.allFinite() || !std::isfinite(t))
        throw DomainError("eval_basis: non-finite input");
    const int n = bs.size();
    if (out.size() != n) out.resize(n);
    for (int i = 0; i < n; ++i) {
        const BasisFunction& b = bs.bases[i];
        out[i] = spatial_factor(b, x) * std::cos(b.tidal_frequency * t + b.tidal_phase);
    }
}

Eigen::VectorXd eval_basis(const BasisSet& bs, const Eigen::Vector2d& x, double t) {
    Eigen::VectorXd out;
    eval_basis_into(bs, x, t, out);
    return out;
}

Eigen::Vector2d eval_flow(const FlowParameters& fp, const BasisSet& bs,
                          const Eigen::Vector2d& x, double t) {
    fp.validate(bs);
    return fp.theta * eval_basis(bs, x, t);
}

double max_flow_magnitude(const FlowParameters& fp) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < fp.theta.cols(); ++i) sum += fp.theta.col(i).norm();
    return sum;
}

std::size_t CoverageReport::flagged_count() const {
    return static_cast<std::size_t>(
        std::count_if(points.begin(), points.end(), [](const CoveragePoint& p) {
            return p.flagged;
        }));
}

double CoverageReport::min_factor() const {
    double m = 1.0;
    for (const auto& p : points) m = std::min(m, p.factor);
    return m;
}

CoverageReport coverage_check(const BasisSet& bs,
                              const std::vector<Eigen::Vector2d>& trajectory,
                              double floor) {
    bs.validate();
    if (trajectory.empty())
        throw DomainError("coverage_check: empty trajectory");
    CoverageReport report;
    report.floor = floor;
    report.points.reserve(trajectory.size());
    for (std::size_t k = 0; k < trajectory.size(); ++k) {
        double best = 0.0;
        for (const auto& b : bs.bases) best = std::max(best, spatial_factor(b, trajectory[k]));
        report.points.push_back({k, best, best < floor});
    }
    return report;
}

}  // namespace glider
