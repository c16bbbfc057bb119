#include "screwdist/metrics.hpp"

#include <cmath>

namespace screwdist {

namespace {

double angular_distance(const Vec3& a, const Vec3& b) {
    // atan2 form: exact zero for identical vectors, exact pi for antipodal,
    // and well conditioned at small angles.
    return std::atan2(a.cross(b).norm(), a.dot(b));
}

}  // namespace

MaadComponents maad(const ScrewObservation& pred, const ScrewObservation& truth) {
    if (pred.configs.size() != truth.configs.size()) {
        throw DimensionMismatch("maad: configuration counts differ");
    }
    MaadComponents out;
    out.l = angular_distance(pred.axis.l_hat, truth.axis.l_hat);
    out.mhat = angular_distance(pred.axis.m_hat, truth.axis.m_hat);
    out.mnorm = std::abs(pred.axis.m_norm - truth.axis.m_norm);
    for (std::size_t i = 0; i < truth.configs.size(); ++i) {
        out.theta += std::abs(pred.configs[i].theta - truth.configs[i].theta);
        out.d += std::abs(pred.configs[i].d - truth.configs[i].d);
    }
    if (!truth.configs.empty()) {
        out.theta /= static_cast<double>(truth.configs.size());
        out.d /= static_cast<double>(truth.configs.size());
    }
    return out;
}

double line_to_line_distance(const Vec3& dir_a, const Vec3& moment_a, const Vec3& dir_b,
                             const Vec3& moment_b) {
    const Vec3 ua = dir_a / dir_a.norm();
    const Vec3 ub = dir_b / dir_b.norm();
    const Vec3 pa = ua.cross(moment_a);
    const Vec3 pb = ub.cross(moment_b);
    const Vec3 cross = ua.cross(ub);
    const double cn = cross.norm();
    if (cn > 1e-9) {
        return std::abs((pb - pa).dot(cross)) / cn;
    }
    return ua.cross(pb - pa).norm();  // parallel: point-to-line
}

ScrewLossComponents screw_loss(const ScrewObservation& pred, const ScrewObservation& truth) {
    if (pred.configs.size() != truth.configs.size()) {
        throw DimensionMismatch("screw_loss: configuration counts differ");
    }
    ScrewLossComponents out;
    out.ang = angular_distance(pred.axis.l_hat, truth.axis.l_hat);
    out.dist = line_to_line_distance(pred.axis.l_hat, pred.axis.moment(), truth.axis.l_hat,
                                     truth.axis.moment());
    for (std::size_t i = 0; i < truth.configs.size(); ++i) {
        out.theta_err += std::abs(pred.configs[i].theta - truth.configs[i].theta);
        // Displace the reference point along each axis; the reference cancels.
        out.d_err += (pred.configs[i].d * pred.axis.l_hat - truth.configs[i].d * truth.axis.l_hat)
                         .norm();
    }
    if (!truth.configs.empty()) {
        out.theta_err /= static_cast<double>(truth.configs.size());
        out.d_err /= static_cast<double>(truth.configs.size());
    }
    return out;
}

MetricReport evaluate(const std::vector<ScrewObservation>& predictions,
                      const std::vector<ScrewObservation>& labels) {
    if (predictions.size() != labels.size()) {
        throw DimensionMismatch("evaluate: predictions and labels are not aligned");
    }
    if (predictions.empty()) throw std::invalid_argument("evaluate: empty input");

    MetricReport report;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        SequenceMetrics m;
        m.id = static_cast<int>(i);
        m.maad = maad(predictions[i], labels[i]);
        m.screw = screw_loss(predictions[i], labels[i]);
        report.maad_mean.l += m.maad.l;
        report.maad_mean.mhat += m.maad.mhat;
        report.maad_mean.mnorm += m.maad.mnorm;
        report.maad_mean.theta += m.maad.theta;
        report.maad_mean.d += m.maad.d;
        report.screw_mean.ang += m.screw.ang;
        report.screw_mean.dist += m.screw.dist;
        report.screw_mean.theta_err += m.screw.theta_err;
        report.screw_mean.d_err += m.screw.d_err;
        report.per_sequence.push_back(m);
    }
    const double n = static_cast<double>(labels.size());
    report.maad_mean.l /= n;
    report.maad_mean.mhat /= n;
    report.maad_mean.mnorm /= n;
    report.maad_mean.theta /= n;
    report.maad_mean.d /= n;
    report.screw_mean.ang /= n;
    report.screw_mean.dist /= n;
    report.screw_mean.theta_err /= n;
    report.screw_mean.d_err /= n;
    return report;
}

}  // namespace screwdist
