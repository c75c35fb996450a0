#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace glider {

enum class PositionFrameKind { geodetic, local };

// One full-resolution trajectory sample. In the geodetic frame lat/lon are
// degrees; in the local frame they carry x/y meters instead.
struct DenseRecord {
    double t = 0.0;        // s since file epoch
    double lat = 0.0;
    double lon = 0.0;
    double heading = 0.0;  // commanded heading, rad
};

struct SparseSample {
    double t = 0.0;
    double lat = 0.0;
    double lon = 0.0;
};

// One per-surfacing transmission: the underwater segment's endpoint fixes,
// the mean commanded heading, and the dead-reckoned depth-averaged flow.
// `samples` optionally carries subsampled intra-segment fixes.
struct SparseRecord {
    double segment_start_t = 0.0;
    double segment_end_t = 0.0;
    double start_lat = 0.0;
    double start_lon = 0.0;
    double end_lat = 0.0;
    double end_lon = 0.0;
    double mean_heading = 0.0;            // rad, circular mean
    Eigen::Vector2d f_m{0.0, 0.0};        // glider-estimated flow, m/s
    std::vector<SparseSample> samples;
};

}  // namespace glider
