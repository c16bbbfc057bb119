#pragma once

#include <random>
#include <vector>

#include "screwdist/screw_geometry.hpp"
#include "screwdist/special_functions.hpp"

namespace screwdist {

using Rng = std::mt19937_64;

struct NotOnManifold : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Scalar helpers
// ---------------------------------------------------------------------------

double sigmoid(double x);
double softplus(double x);
double inv_softplus(double s);
double inv_sigmoid(double p);

double norm_pdf(double z);
double norm_cdf(double z);
/// log Phi(z), stable for large negative z.
double norm_log_cdf(double z);
/// Phi^{-1}(p) for p in (0, 1).
double inv_norm_cdf(double p);

// ---------------------------------------------------------------------------
// Matrix von Mises-Fisher on V_{2,3}
// ---------------------------------------------------------------------------

/// Parameters of the matrix von Mises-Fisher distribution through the SVD
/// F = Gamma Lambda Omega^T: ZYX Euler angles (alpha, beta, gamma) give a
/// rotation whose first two columns form Gamma, omega gives the planar
/// rotation Omega, and lambda1 >= lambda2 >= 0 are the singular values.
struct MatrixVMFParams {
    double alpha = 0.0;   // [0, 2pi)
    double beta = 0.0;    // [0, pi)
    double gamma = 0.0;   // [0, 2pi)
    double omega = 0.0;   // [0, 2pi)
    double lambda1 = 0.0;
    double lambda2 = 0.0;

    Mat3 gamma_rotation() const;  // Rz(alpha) Ry(beta) Rx(gamma)
    Mat32 gamma_frame() const;    // first two columns
    Mat2 omega_rotation() const;
    Mat32 f_matrix() const;       // Gamma Lambda Omega^T

    bool valid(double tol = 1e-9) const;

    /// Parameters whose mode equals the given Stiefel point, with the given
    /// singular values and diagonal concentration K = diag(lambda1, lambda2)
    /// (F = mode * Lambda).
    static MatrixVMFParams from_mode(const Mat32& mode, double lambda1, double lambda2);

    /// Parameters reproducing F = U diag(lambda1, lambda2) V^T. V may be any
    /// orthogonal 2x2 matrix; reflections are absorbed into the gauge.
    static MatrixVMFParams from_svd(const Mat32& u, double lambda1, double lambda2,
                                    const Mat2& v);
};

/// Mode M = Gamma Omega^T (a point of V_{2,3}).
Mat32 mvmf_mode(const MatrixVMFParams& params);
/// Concentration K = Omega Lambda Omega^T (symmetric PSD).
Mat2 mvmf_concentration(const MatrixVMFParams& params);

/// (Gamma, Omega) with sign flips applied so Gamma's first row is
/// non-negative; F is unchanged. For reporting only.
std::pair<Mat32, Mat2> mvmf_canonical_gauge(const MatrixVMFParams& params);

/// log density w.r.t. the uniform probability measure on V_{2,3}:
/// Tr(F^T X) - log 0F1(3/2, Lambda^2/4). Throws NotOnManifold if X^T X != I.
double mvmf_log_density(const MatrixVMFParams& params, const Mat32& x);

/// Haar-uniform point of V_{2,3} (orthonormalized Gaussian with sign fix).
Mat32 sample_uniform_stiefel(Rng& rng);

/// Exact von Mises draw on the circle, centered at 0 (Best-Fisher rejection).
double sample_von_mises(double kappa, Rng& rng);

struct GibbsConfig {
    int burn_in = 50;  // sweeps before the first retained draw
    int thin = 5;      // sweeps between retained draws
};

/// Gibbs sampler over the two columns of X; the conditional of each column on
/// the other is a von Mises distribution on the unit circle orthogonal to it.
std::vector<Mat32> mvmf_sample(const MatrixVMFParams& params, Rng& rng, int n_samples,
                               const GibbsConfig& config = {});

// ---------------------------------------------------------------------------
// Truncated normal on [0, inf)
// ---------------------------------------------------------------------------

struct TruncatedNormalParams {
    double mu = 0.0;
    double precision = 1.0;  // 1 / sigma^2

    double sigma() const { return 1.0 / std::sqrt(precision); }
    bool valid() const { return precision > 0.0 && std::isfinite(mu); }
};

double truncnorm_log_density(const TruncatedNormalParams& params, double x);
double truncnorm_sample(const TruncatedNormalParams& params, Rng& rng);
double truncnorm_mean(const TruncatedNormalParams& params);
double truncnorm_variance(const TruncatedNormalParams& params);

// ---------------------------------------------------------------------------
// Joint distribution over screw axis and configurations
// ---------------------------------------------------------------------------

/// One observed screw label: the axis as a Stiefel point plus |m|, and the
/// per-step configurations.
struct ScrewObservation {
    ScrewAxis axis;
    std::vector<Configuration> configs;
};

/// Full parameter set of the joint distribution: matrix vMF over the axis
/// frame, truncated normal over |m|, and per-step truncated normals over
/// theta and d with shared precisions.
struct JointScrewDistribution {
    MatrixVMFParams axis_vmf;
    TruncatedNormalParams m_norm;
    std::vector<double> theta_means;
    double theta_precision = 1.0;
    std::vector<double> d_means;
    double d_precision = 1.0;

    int n_configs() const { return static_cast<int>(theta_means.size()); }
    bool valid(double tol = 1e-9) const;
};

double joint_log_density(const JointScrewDistribution& dist, const ScrewObservation& obs);

/// Length of the unconstrained parameter vector for n_configs configuration
/// pairs: 10 head entries plus the theta and d locations.
inline int raw_parameter_length(int n_configs) { return 10 + 2 * n_configs; }

/// Map an unconstrained vector onto a valid JointScrewDistribution.
/// Layout: [alpha, beta, gamma, omega, s1, s2, mu_m, beta_m, beta_theta,
/// beta_d, theta locations..., d locations...]. Angles go through scaled
/// sigmoids onto their exact ranges; the remaining entries go through
/// softplus, with lambda1 = s1 + s2 and lambda2 = s2 capped at kLambdaMax.
JointScrewDistribution map_raw_parameters(const std::vector<double>& raw);

// ---------------------------------------------------------------------------
// Vector von Mises-Fisher on S^2 (baseline)
// ---------------------------------------------------------------------------

struct VectorVMFParams {
    Vec3 mu = Vec3::UnitX();
    double kappa = 0.0;

    bool valid(double tol = 1e-9) const {
        return std::abs(mu.norm() - 1.0) <= tol && kappa >= 0.0;
    }
};

/// log C_3(kappa) + kappa <mu, x>, density w.r.t. the surface measure on S^2.
double vvmf_log_density(const VectorVMFParams& params, const Vec3& x);

}  // namespace screwdist
