#pragma once

#include <numbers>
#include <vector>

#include <Eigen/Core>

#include "glider/errors.hpp"

namespace glider {

inline constexpr double kDefaultTidalFrequency = 2.0 * std::numbers::pi * 1e-6;  // rad/s

// One spatio-temporal basis element: exponential spatial bump around a
// center with a tidal cosine time factor,
//   phi(x, t) = exp(-|x - c| / (2 sigma)) * cos(omega t + phase).
// Note the spatial kernel decays with plain distance, not squared distance;
// a squared-exponential variant would be a one-line change here.
struct BasisFunction {
    Eigen::Vector2d center{0.0, 0.0};  // m, local frame
    double width = 13e3;               // sigma, m, > 0
    double tidal_frequency = kDefaultTidalFrequency;  // omega, rad/s, >= 0
    double tidal_phase = 0.0;          // rad

    void validate() const;
};

// Ordered basis list; the order indexes the columns of the parameter matrix.
struct BasisSet {
    std::vector<BasisFunction> bases;

    int size() const { return static_cast<int>(bases.size()); }
    void validate() const;
};

// Flow-field parameterization F(x, t) = theta * phi(x, t).
// Row 0 is the W-E ("u") component, row 1 the N-S ("v") component, m/s.
struct FlowParameters {
    Eigen::Matrix2Xd theta;

    void validate(const BasisSet& bs) const;
};

double spatial_factor(const BasisFunction& b, const Eigen::Vector2d& x);

// phi(x, t); allocation-free variant for hot loops.
void eval_basis_into(const BasisSet& bs, const Eigen::Vector2d& x, double t,
                     Eigen::VectorXd& out);
Eigen::VectorXd eval_basis(const BasisSet& bs, const Eigen::Vector2d& x, double t);

Eigen::Vector2d eval_flow(const FlowParameters& fp, const BasisSet& bs,
                          const Eigen::Vector2d& x, double t);

// Upper bound on |theta * phi| over all x and t: sum of column norms.
double max_flow_magnitude(const FlowParameters& fp);

// Basis coverage along a trajectory. A point is flagged when even the best
// basis has negligible spatial weight there; parameter estimation cannot be
// expected to converge over uncovered stretches.
struct CoveragePoint {
    std::size_t index;
    double factor;  // max_i exp(-|x - c_i| / (2 sigma_i))
    bool flagged;
};

struct CoverageReport {
    std::vector<CoveragePoint> points;
    double floor = 0.05;

    std::size_t flagged_count() const;
    double min_factor() const;
};

CoverageReport coverage_check(const BasisSet& bs,
                              const std::vector<Eigen::Vector2d>& trajectory,
                              double floor = 0.05);

}  // namespace glider
