#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <stdexcept>
#include <vector>

namespace screwdist {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat32 = Eigen::Matrix<double, 3, 2>;
using Mat2 = Eigen::Matrix2d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

struct InconsistentAxis : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A line in Plücker coordinates: unit direction l_hat and moment m = p x l_hat
/// for any point p on the line. Invariants: |l_hat| = 1, <l_hat, m> = 0.
struct PluckerLine {
    Vec3 l_hat;
    Vec3 m;

    bool valid(double tol = 1e-9) const {
        return std::abs(l_hat.norm() - 1.0) <= tol && std::abs(l_hat.dot(m)) <= tol;
    }
    /// Point of the line closest to the origin.
    Vec3 anchor() const { return l_hat.cross(m); }
};

/// Screw axis in the factored form (l_hat, m_hat, |m|). The pair (l_hat, m_hat)
/// assembled column-wise is a 3x2 matrix X with X^T X = I_2.
struct ScrewAxis {
    Vec3 l_hat;
    Vec3 m_hat;
    double m_norm = 0.0;

    Mat32 stiefel_point() const {
        Mat32 x;
        x.col(0) = l_hat;
        x.col(1) = m_hat;
        return x;
    }
    Vec3 moment() const { return m_norm * m_hat; }
    PluckerLine line() const { return {l_hat, moment()}; }

    bool valid(double tol = 1e-9) const {
        return std::abs(l_hat.norm() - 1.0) <= tol && std::abs(m_hat.norm() - 1.0) <= tol &&
               std::abs(l_hat.dot(m_hat)) <= tol && m_norm >= 0.0;
    }
};

/// Rotation theta about and displacement d along a screw axis.
/// Canonical ranges: theta in [0, 2pi), d >= 0.
struct Configuration {
    double theta = 0.0;
    double d = 0.0;

    /// Pitch h with d = h * theta; defined only for theta > 0.
    double pitch() const {
        if (theta <= 0.0) throw std::domain_error("pitch undefined for theta <= 0");
        return d / theta;
    }
};

struct RigidTransform {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    static RigidTransform identity() { return {}; }

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
    RigidTransform compose(const RigidTransform& other) const {
        return {rotation * other.rotation, rotation * other.translation + translation};
    }
    RigidTransform inverse() const {
        return {rotation.transpose(), -(rotation.transpose() * translation)};
    }
    Eigen::Matrix4d matrix() const {
        Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
        t.topLeftCorner<3, 3>() = rotation;
        t.topRightCorner<3, 1>() = translation;
        return t;
    }
    bool valid(double tol = 1e-9) const {
        return (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
               std::abs(rotation.determinant() - 1.0) <= tol;
    }
};

inline RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
    return a.compose(b);
}

/// Skew-symmetric matrix [v]x with [v]x w = v x w.
Mat3 skew(const Vec3& v);

/// Rotation by angle about a unit axis (Rodrigues).
Mat3 axis_angle_rotation(const Vec3& axis, double angle);

/// Deterministic unit vector orthogonal to unit u: Gram-Schmidt against the
/// standard basis vector least aligned with u.
Vec3 orthogonal_unit(const Vec3& u);

// Degeneracy thresholds for screw extraction.
inline constexpr double kPureTranslationAngle = 1e-7;  // theta below this: pure translation
inline constexpr double kIdentityTranslation = 1e-9;   // |t| below this as well: identity

struct ScrewDecomposition {
    ScrewAxis axis;
    Configuration config;
    bool degenerate = false;  // transform within tolerance of identity; axis undefined
};

/// Rigid transform of rotating config.theta about and translating config.d
/// along the axis.
RigidTransform screw_to_transform(const ScrewAxis& axis, const Configuration& config);

/// Extract the canonical screw decomposition of T. For T within tolerance of
/// the identity the axis is undefined and the result is flagged degenerate.
ScrewDecomposition transform_to_screw(const RigidTransform& t);

/// 6x6 line motion matrix D = [[R, 0], [[t]x R, R]] mapping Plücker
/// coordinates (l_hat; m) between frames.
Mat6 line_motion_matrix(const Mat3& rotation, const Vec3& translation);

/// Apply a frame change to a Plücker line.
PluckerLine transform_line(const RigidTransform& frame, const PluckerLine& line);
ScrewAxis transform_axis(const RigidTransform& frame, const ScrewAxis& axis);

struct RelativeScrewResult {
    ScrewAxis axis;
    std::vector<Configuration> configs;
    bool degenerate = false;  // no step moved; axis unidentifiable (rigid scene)
};

/// Common screw axis and per-step configurations of the displacements of
/// moving_poses[k] relative to moving_poses[0], expressed in the frame of
/// base_pose. Throws InconsistentAxis if the per-step axes disagree beyond
/// tol (multi-DoF or corrupted input).
RelativeScrewResult relative_screw_sequence(const RigidTransform& base_pose,
                                            const std::vector<RigidTransform>& moving_poses,
                                            double tol = 1e-6);

}  // namespace screwdist
