#pragma once

#include <Eigen/Core>

#include "glider/errors.hpp"

namespace glider {

// Equirectangular local tangent plane around a fixed origin. One degree of
// latitude is taken as 110574 m and one degree of longitude as
// 111320*cos(lat0) m; over regional deployment extents the distortion is
// far below the trajectory-error scales we care about.
class LocalFrame {
public:
    LocalFrame(double origin_lat_deg, double origin_lon_deg);

    Eigen::Vector2d project(double lat_deg, double lon_deg) const;
    void unproject(const Eigen::Vector2d& xy, double& lat_deg, double& lon_deg) const;

    double origin_lat() const { return lat0_; }
    double origin_lon() const { return lon0_; }

    static constexpr double kMetersPerDegLat = 110574.0;
    static constexpr double kMetersPerDegLon = 111320.0;
    static constexpr double kMaxLatDeg = 85.0;

private:
    double lat0_;
    double lon0_;
    double cos_lat0_;
};

}  // namespace glider
