#pragma once

#include "screwdist/distributions.hpp"

namespace screwdist {

struct MaadComponents {
    double l = 0.0;       // radians
    double mhat = 0.0;    // radians
    double mnorm = 0.0;   // meters
    double theta = 0.0;   // radians, mean over steps
    double d = 0.0;       // meters, mean over steps
};

struct ScrewLossComponents {
    double ang = 0.0;        // angle between axis directions, radians
    double dist = 0.0;       // common-perpendicular length, meters
    double theta_err = 0.0;  // mean |theta_pred - theta_true|, radians
    double d_err = 0.0;      // mean displaced-point distance, meters
};

/// Angular distance between predicted and ground-truth direction vectors, and
/// absolute deviations of the scalar parameters (mean over steps).
MaadComponents maad(const ScrewObservation& pred, const ScrewObservation& truth);

/// Shortest distance between two lines given as (direction, moment); handles
/// parallel axes as point-to-line distance. Accepts non-orthogonal moments
/// (the anchor construction drops the invalid parallel component).
double line_to_line_distance(const Vec3& dir_a, const Vec3& moment_a, const Vec3& dir_b,
                             const Vec3& moment_b);

/// Axis angle error, common-perpendicular distance, configuration errors. The
/// d error displaces the ground-truth axis's closest point to the camera
/// origin along each axis by the respective d values and measures the gap.
ScrewLossComponents screw_loss(const ScrewObservation& pred, const ScrewObservation& truth);

struct SequenceMetrics {
    int id = 0;
    MaadComponents maad;
    ScrewLossComponents screw;
};

struct MetricReport {
    std::vector<SequenceMetrics> per_sequence;
    MaadComponents maad_mean;
    ScrewLossComponents screw_mean;
    // Recorded so reports stay reproducible: base point of the d error.
    std::string reference_point = "truth-axis closest point to camera origin";
};

/// Per-sequence metrics plus aggregate means; predictions[i] is compared with
/// labels[i].
MetricReport evaluate(const std::vector<ScrewObservation>& predictions,
                      const std::vector<ScrewObservation>& labels);

}  // namespace screwdist
