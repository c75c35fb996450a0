#include "glider/geo.hpp"

#include <cmath>
#include <numbers>

namespace glider {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;
}

LocalFrame::LocalFrame(double origin_lat_deg, double origin_lon_deg)
    : lat0_(origin_lat_deg), lon0_(origin_lon_deg) {
    if (!std::isfinite(origin_lat_deg) || !std::isfinite(origin_lon_deg))
        throw DomainError("local frame origin must be finite");
    if (std::abs(origin_lat_deg) > kMaxLatDeg)
        throw DomainError("local frame origin latitude beyond +-85 deg is unsupported");
    cos_lat0_ = std::cos(lat0_ * kDegToRad);
}

Eigen::Vector2d LocalFrame::project(double lat_deg, double lon_deg) const {
    if (!std::isfinite(lat_deg) || !std::isfinite(lon_deg))
        throw DomainError("project: non-finite coordinate");
    if (std::abs(lat_deg) > kMaxLatDeg)
        throw DomainError("project: latitude beyond +-85 deg is unsupported");
    return {(lon_deg - lon0_) * cos_lat0_ * kMetersPerDegLon,
            (lat_deg - lat0_) * kMetersPerDegLat};
}

void LocalFrame::unproject(const Eigen::Vector2d& xy, double& lat_deg,
                           double& lon_deg) const {
    if (!xy.allFinite()) throw DomainError("unproject: non-finite position");
    lat_deg = lat0_ + xy.y() / kMetersPerDegLat;
    lon_deg = lon0_ + xy.x() / (kMetersPerDegLon * cos_lat0_);
    if (std::abs(lat_deg) > kMaxLatDeg)
        throw DomainError("unproject: latitude beyond +-85 deg is unsupported");
}

}  // namespace glider
