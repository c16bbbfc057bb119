#include "screwdist/screw_geometry.hpp"

#include <cmath>
#include <numbers>

namespace screwdist {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

Mat3 skew(const Vec3& v) {
    Mat3 s;
    s << 0.0, -v.z(), v.y(),
         v.z(), 0.0, -v.x(),
        -v.y(), v.x(), 0.0;
    return s;
}

Mat3 axis_angle_rotation(const Vec3& axis, double angle) {
    return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

Vec3 orthogonal_unit(const Vec3& u) {
    int least = 0;
    double best = std::abs(u.x());
    for (int i = 1; i < 3; ++i) {
        if (std::abs(u[i]) < best) {
            best = std::abs(u[i]);
            least = i;
        }
    }
    Vec3 e = Vec3::Zero();
    e[least] = 1.0;
    Vec3 v = e - u * u.dot(e);
    return v / v.norm();
}

RigidTransform screw_to_transform(const ScrewAxis& axis, const Configuration& config) {
    const Vec3 p = axis.l_hat.cross(axis.moment());  // closest point of the line to origin
    const Mat3 r = axis_angle_rotation(axis.l_hat, config.theta);
    const Vec3 t = p - r * p + config.d * axis.l_hat;
    return {r, t};
}

ScrewDecomposition transform_to_screw(const RigidTransform& t) {
    ScrewDecomposition out;

    Eigen::AngleAxisd aa(t.rotation);
    double theta = aa.angle();  // in [0, pi]
    Vec3 l_hat = aa.axis();

    if (theta < kPureTranslationAngle) {
        const double tn = t.translation.norm();
        if (tn < kIdentityTranslation) {
            out.degenerate = true;
            out.axis = {Vec3::UnitZ(), orthogonal_unit(Vec3::UnitZ()), 0.0};
            out.config = {0.0, 0.0};
            return out;
        }
        // Pure translation: axis through the origin along the motion, d = |t| >= 0.
        l_hat = t.translation / tn;
        out.axis = {l_hat, orthogonal_unit(l_hat), 0.0};
        out.config = {0.0, tn};
        return out;
    }

    double d = t.translation.dot(l_hat);
    if (std::abs(std::numbers::pi - theta) < 1e-12) {
        // Axis sign is ambiguous at theta = pi; prefer d >= 0, then a fixed sign rule.
        if (d < -1e-12) {
            l_hat = -l_hat;
            d = -d;
        } else if (std::abs(d) <= 1e-12) {
            int imax;
            l_hat.cwiseAbs().maxCoeff(&imax);
            if (l_hat[imax] < 0.0) l_hat = -l_hat;
            d = t.translation.dot(l_hat);
        }
    } else if (d < -1e-12) {
        // Same transform as rotation by 2pi - theta about -l_hat with positive slide.
        l_hat = -l_hat;
        theta = kTwoPi - theta;
        d = -d;
    }
    if (std::abs(d) <= 1e-12) d = std::abs(d);

    // Solve (I - R) p = t_perp for the axis point p orthogonal to l_hat;
    // on that plane (I - R)(I - R^T) = (2 - 2 cos theta) I.
    const Vec3 t_perp = t.translation - d * l_hat;
    const double denom = 2.0 - 2.0 * std::cos(theta);
    const Vec3 p = (t_perp - t.rotation.transpose() * t_perp) / denom;

    const Vec3 moment = p.cross(l_hat);
    const double m_norm = moment.norm();
    Vec3 m_hat = m_norm > 1e-12 ? Vec3(moment / m_norm) : orthogonal_unit(l_hat);

    out.axis = {l_hat, m_hat, m_norm};
    out.config = {theta, d};
    return out;
}

Mat6 line_motion_matrix(const Mat3& rotation, const Vec3& translation) {
    Mat6 d = Mat6::Zero();
    d.topLeftCorner<3, 3>() = rotation;
    d.bottomLeftCorner<3, 3>() = skew(translation) * rotation;
    d.bottomRightCorner<3, 3>() = rotation;
    return d;
}

PluckerLine transform_line(const RigidTransform& frame, const PluckerLine& line) {
    Vec6 coords;
    coords << line.l_hat, line.m;
    const Vec6 mapped = line_motion_matrix(frame.rotation, frame.translation) * coords;
    return {mapped.head<3>(), mapped.tail<3>()};
}

ScrewAxis transform_axis(const RigidTransform& frame, const ScrewAxis& axis) {
    const PluckerLine mapped = transform_line(frame, axis.line());
    const double m_norm = mapped.m.norm();
    const Vec3 m_hat = m_norm > 1e-12 ? Vec3(mapped.m / m_norm) : orthogonal_unit(mapped.l_hat);
    return {mapped.l_hat, m_hat, m_norm};
}

RelativeScrewResult relative_screw_sequence(const RigidTransform& base_pose,
                                            const std::vector<RigidTransform>& moving_poses,
                                            double tol) {
    if (moving_poses.size() < 2) {
        throw std::invalid_argument("relative_screw_sequence: need at least 2 moving poses");
    }
    const RigidTransform first_inv = moving_poses.front().inverse();

    RelativeScrewResult out;
    bool have_axis = false;
    bool any_rotation = false;
    ScrewAxis ref;

    for (std::size_t k = 1; k < moving_poses.size(); ++k) {
        const ScrewDecomposition dec = transform_to_screw(first_inv * moving_poses[k]);
        if (dec.degenerate) {
            out.configs.push_back({0.0, 0.0});
            continue;
        }
        any_rotation = any_rotation || dec.config.theta > 0.0;
        if (!have_axis) {
            ref = dec.axis;
            have_axis = true;
            out.configs.push_back(dec.config);
            continue;
        }
        const Vec3 m_ref = ref.moment();
        const Vec3 m_k = dec.axis.moment();
        const bool same = (dec.axis.l_hat - ref.l_hat).norm() <= tol && (m_k - m_ref).norm() <= tol;
        const bool flipped =
            (dec.axis.l_hat + ref.l_hat).norm() <= tol && (m_k + m_ref).norm() <= tol;
        if (same) {
            out.configs.push_back(dec.config);
        } else if (flipped && dec.config.d <= tol) {
            // Rotation past pi extracts as the mirrored axis; express it about ref.
            double theta = kTwoPi - dec.config.theta;
            if (theta >= kTwoPi) theta -= kTwoPi;
            out.configs.push_back({theta, dec.config.d});
        } else {
            throw InconsistentAxis("relative_screw_sequence: per-step screw axes disagree");
        }
    }

    if (!have_axis) {
        out.degenerate = true;
        out.axis = {Vec3::UnitZ(), orthogonal_unit(Vec3::UnitZ()), 0.0};
        return out;
    }

    out.axis = transform_axis(base_pose.inverse() * moving_poses.front(), ref);
    if (!any_rotation) {
        // Pure translation: the line position is unidentifiable; report the
        // canonical zero-moment member in the output frame.
        out.axis = {out.axis.l_hat, orthogonal_unit(out.axis.l_hat), 0.0};
    }
    return out;
}

}  // namespace screwdist
