#include "screwdist/distributions.hpp"

#include <cmath>
#include <numbers>

namespace screwdist {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kLogTwoPi = 1.8378770664093454836;

double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

double standard_normal(Rng& rng) {
    // Box-Muller; keeps draws independent of library internals.
    double u1 = uniform01(rng);
    if (u1 < 1e-300) u1 = 1e-300;
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}
}  // namespace

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double softplus(double x) {
    if (x > 30.0) return x;
    if (x < -30.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

double inv_softplus(double s) {
    if (s <= 0.0) throw std::domain_error("inv_softplus: argument must be > 0");
    if (s > 30.0) return s;
    return std::log(std::expm1(s));
}

double inv_sigmoid(double p) {
    if (p <= 0.0 || p >= 1.0) throw std::domain_error("inv_sigmoid: argument must be in (0,1)");
    return std::log(p / (1.0 - p));
}

double norm_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(kTwoPi); }

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double norm_log_cdf(double z) {
    if (z > -37.0) {
        return std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
    }
    // Asymptotic tail: Phi(z) ~ phi(z)/(-z) (1 - 1/z^2 + 3/z^4 - ...)
    const double z2 = z * z;
    return -0.5 * z2 - 0.5 * kLogTwoPi - std::log(-z) + std::log1p(-1.0 / z2 + 3.0 / (z2 * z2));
}

double inv_norm_cdf(double p) {
    if (p <= 0.0 || p >= 1.0) throw std::domain_error("inv_norm_cdf: argument must be in (0,1)");
    // Acklam's rational approximation, then one Halley step.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = norm_cdf(x) - p;
    const double u = e * std::sqrt(kTwoPi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

// ---------------------------------------------------------------------------
// Matrix von Mises-Fisher
// ---------------------------------------------------------------------------

Mat3 MatrixVMFParams::gamma_rotation() const {
    const double ca = std::cos(alpha), sa = std::sin(alpha);
    const double cb = std::cos(beta), sb = std::sin(beta);
    const double cg = std::cos(gamma), sg = std::sin(gamma);
    Mat3 rz, ry, rx;
    rz << ca, -sa, 0, sa, ca, 0, 0, 0, 1;
    ry << cb, 0, sb, 0, 1, 0, -sb, 0, cb;
    rx << 1, 0, 0, 0, cg, -sg, 0, sg, cg;
    return rz * ry * rx;
}

Mat32 MatrixVMFParams::gamma_frame() const { return gamma_rotation().leftCols<2>(); }

Mat2 MatrixVMFParams::omega_rotation() const {
    const double c = std::cos(omega), s = std::sin(omega);
    Mat2 r;
    r << c, -s, s, c;
    return r;
}

Mat32 MatrixVMFParams::f_matrix() const {
    Mat2 lambda = Mat2::Zero();
    lambda(0, 0) = lambda1;
    lambda(1, 1) = lambda2;
    return gamma_frame() * lambda * omega_rotation().transpose();
}

bool MatrixVMFParams::valid(double tol) const {
    (void)tol;
    return alpha >= 0.0 && alpha < kTwoPi && beta >= 0.0 && beta < kPi && gamma >= 0.0 &&
           gamma < kTwoPi && omega >= 0.0 && omega < kTwoPi && lambda1 >= lambda2 &&
           lambda2 >= 0.0 && lambda1 <= kLambdaMax + 1e-12;
}

MatrixVMFParams MatrixVMFParams::from_svd(const Mat32& u, double lambda1, double lambda2,
                                          const Mat2& v) {
    Mat32 g = u;
    Mat2 om = v;
    if (om.determinant() < 0.0) {
        // Reflections commute with the diagonal Lambda; fold one into both sides.
        g.col(1) *= -1.0;
        om.col(1) *= -1.0;
    }
    if (g(2, 0) > 0.0) {
        // The ZYX chart with beta in [0, pi) requires a non-positive z entry
        // in Gamma's first column; -I is the only gauge that keeps Omega a
        // rotation and Lambda in place.
        g *= -1.0;
        om *= -1.0;
    }

    Mat3 r;
    r.leftCols<2>() = g;
    r.col(2) = g.col(0).cross(g.col(1));

    MatrixVMFParams params;
    const double sb = std::min(1.0, std::max(-1.0, -r(2, 0)));
    params.beta = std::asin(sb);
    const double cb = std::cos(params.beta);
    if (cb > 1e-9) {
        params.alpha = std::atan2(r(1, 0), r(0, 0));
        params.gamma = std::atan2(r(2, 1), r(2, 2));
    } else {
        // Gimbal: only alpha - gamma is determined; pin gamma = 0.
        params.alpha = std::atan2(-r(0, 1), r(1, 1));
        params.gamma = 0.0;
    }
    params.omega = std::atan2(om(1, 0), om(0, 0));
    if (params.alpha < 0.0) params.alpha += kTwoPi;
    if (params.gamma < 0.0) params.gamma += kTwoPi;
    if (params.omega < 0.0) params.omega += kTwoPi;
    if (params.beta < 0.0) params.beta = 0.0;
    params.lambda1 = lambda1;
    params.lambda2 = lambda2;
    return params;
}

MatrixVMFParams MatrixVMFParams::from_mode(const Mat32& mode, double lambda1, double lambda2) {
    return from_svd(mode, lambda1, lambda2, Mat2::Identity());
}

Mat32 mvmf_mode(const MatrixVMFParams& params) {
    return params.gamma_frame() * params.omega_rotation().transpose();
}

Mat2 mvmf_concentration(const MatrixVMFParams& params) {
    Mat2 lambda = Mat2::Zero();
    lambda(0, 0) = params.lambda1;
    lambda(1, 1) = params.lambda2;
    const Mat2 om = params.omega_rotation();
    return om * lambda * om.transpose();
}

std::pair<Mat32, Mat2> mvmf_canonical_gauge(const MatrixVMFParams& params) {
    Mat32 g = params.gamma_frame();
    Mat2 om = params.omega_rotation();
    for (int j = 0; j < 2; ++j) {
        if (g(0, j) < 0.0) {
            g.col(j) *= -1.0;
            om.col(j) *= -1.0;
        }
    }
    return {g, om};
}

double mvmf_log_density(const MatrixVMFParams& params, const Mat32& x) {
    if (((x.transpose() * x) - Mat2::Identity()).cwiseAbs().maxCoeff() > 1e-9) {
        throw NotOnManifold("mvmf_log_density: X^T X != I");
    }
    const double dot = (params.f_matrix().transpose() * x).trace();
    const Hyp0F1Result z = hyp0f1_matrix(1.5, params.lambda1, params.lambda2);
    return dot - z.log_value;
}

Mat32 sample_uniform_stiefel(Rng& rng) {
    Vec3 g1, g2;
    for (int i = 0; i < 3; ++i) g1[i] = standard_normal(rng);
    for (int i = 0; i < 3; ++i) g2[i] = standard_normal(rng);
    Mat32 x;
    x.col(0) = g1 / g1.norm();
    const Vec3 v = g2 - x.col(0) * x.col(0).dot(g2);
    x.col(1) = v / v.norm();
    return x;
}

double sample_von_mises(double kappa, Rng& rng) {
    if (kappa < 1e-8) return kPi * (2.0 * uniform01(rng) - 1.0);
    // Best & Fisher (1979) wrapped-Cauchy rejection.
    const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
    const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
    const double r = (1.0 + rho * rho) / (2.0 * rho);
    while (true) {
        const double z = std::cos(kPi * uniform01(rng));
        const double f = (1.0 + r * z) / (r + z);
        const double c = kappa * (r - f);
        const double u2 = uniform01(rng);
        if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
            const double angle = std::acos(std::min(1.0, std::max(-1.0, f)));
            return uniform01(rng) < 0.5 ? -angle : angle;
        }
    }
}

namespace {
// One conditional draw: the column orthogonal to `other` lies on a unit
// circle where the density is von Mises in the circle angle.
Vec3 gibbs_column(const Vec3& other, const Vec3& force, Rng& rng) {
    Vec3 planar = force - other * other.dot(force);
    const double kappa = planar.norm();
    Vec3 u = kappa > 1e-12 ? Vec3(planar / kappa) : orthogonal_unit(other);
    const Vec3 v = other.cross(u);
    const double phi = sample_von_mises(kappa, rng);
    Vec3 x = std::cos(phi) * u + std::sin(phi) * v;
    return x / x.norm();
}
}  // namespace

std::vector<Mat32> mvmf_sample(const MatrixVMFParams& params, Rng& rng, int n_samples,
                               const GibbsConfig& config) {
    if (n_samples < 0) throw std::invalid_argument("mvmf_sample: n_samples must be >= 0");
    const Mat32 f = params.f_matrix();
    Mat32 x = mvmf_mode(params);

    auto sweep = [&] {
        x.col(0) = gibbs_column(x.col(1), f.col(0), rng);
        x.col(1) = gibbs_column(x.col(0), f.col(1), rng);
    };

    for (int i = 0; i < config.burn_in; ++i) sweep();
    std::vector<Mat32> draws;
    draws.reserve(n_samples);
    for (int i = 0; i < n_samples; ++i) {
        for (int j = 0; j < std::max(1, config.thin); ++j) sweep();
        draws.push_back(x);
    }
    return draws;
}

// ---------------------------------------------------------------------------
// Truncated normal
// ---------------------------------------------------------------------------

double truncnorm_log_density(const TruncatedNormalParams& params, double x) {
    if (!params.valid()) throw std::invalid_argument("truncnorm: invalid parameters");
    if (x < 0.0) throw std::invalid_argument("truncnorm_log_density: x must be >= 0");
    const double beta = params.precision;
    const double a = params.mu * std::sqrt(beta);  // standardized distance of 0 below mu
    return 0.5 * std::log(beta) - 0.5 * kLogTwoPi - 0.5 * beta * (x - params.mu) * (x - params.mu) -
           norm_log_cdf(a);
}

double truncnorm_sample(const TruncatedNormalParams& params, Rng& rng) {
    if (!params.valid()) throw std::invalid_argument("truncnorm: invalid parameters");
    const double sigma = params.sigma();
    const double a0 = -params.mu / sigma;  // lower bound in standard units
    const double upper_mass = 0.5 * std::erfc(a0 / std::numbers::sqrt2);  // P(Z > a0)
    if (upper_mass > 1e-300) {
        const double q = upper_mass * (1.0 - uniform01(rng));
        if (q > 1e-300) return params.mu - sigma * inv_norm_cdf(q);
    }
    // Deep tail: Robert's exponential rejection for Z >= a0.
    const double alpha = 0.5 * (a0 + std::sqrt(a0 * a0 + 4.0));
    while (true) {
        const double z = a0 - std::log(uniform01(rng)) / alpha;
        const double diff = z - alpha;
        if (uniform01(rng) <= std::exp(-0.5 * diff * diff)) return params.mu + sigma * z;
    }
}

namespace {
// Inverse Mills ratio phi(a) / (1 - Phi(a)), stable for large a.
double mills(double a) {
    if (a < 30.0) return norm_pdf(a) / (0.5 * std::erfc(a / std::numbers::sqrt2));
    const double a2 = a * a;
    return a / (1.0 - 1.0 / a2 + 3.0 / (a2 * a2));
}
}  // namespace

double truncnorm_mean(const TruncatedNormalParams& params) {
    const double sigma = params.sigma();
    const double a = -params.mu / sigma;
    return params.mu + sigma * mills(a);
}

double truncnorm_variance(const TruncatedNormalParams& params) {
    const double sigma = params.sigma();
    const double a = -params.mu / sigma;
    const double lam = mills(a);
    return sigma * sigma * (1.0 + a * lam - lam * lam);
}

// ---------------------------------------------------------------------------
// Joint distribution
// ---------------------------------------------------------------------------

bool JointScrewDistribution::valid(double tol) const {
    return axis_vmf.valid(tol) && m_norm.valid() && theta_means.size() == d_means.size() &&
           theta_precision > 0.0 && d_precision > 0.0;
}

double joint_log_density(const JointScrewDistribution& dist, const ScrewObservation& obs) {
    if (static_cast<int>(obs.configs.size()) != dist.n_configs()) {
        throw DimensionMismatch("joint_log_density: configuration count mismatch");
    }
    double total = mvmf_log_density(dist.axis_vmf, obs.axis.stiefel_point());
    total += truncnorm_log_density(dist.m_norm, obs.axis.m_norm);
    for (int i = 0; i < dist.n_configs(); ++i) {
        total += truncnorm_log_density({dist.theta_means[i], dist.theta_precision},
                                       obs.configs[i].theta);
        total += truncnorm_log_density({dist.d_means[i], dist.d_precision}, obs.configs[i].d);
    }
    return total;
}

JointScrewDistribution map_raw_parameters(const std::vector<double>& raw) {
    const int len = static_cast<int>(raw.size());
    if (len < 12 || (len - 10) % 2 != 0) {
        throw DimensionMismatch("map_raw_parameters: raw length must be 10 + 2 (n-1)");
    }
    const int n_configs = (len - 10) / 2;

    JointScrewDistribution dist;
    dist.axis_vmf.alpha = kTwoPi * sigmoid(raw[0]);
    dist.axis_vmf.beta = kPi * sigmoid(raw[1]);
    dist.axis_vmf.gamma = kTwoPi * sigmoid(raw[2]);
    dist.axis_vmf.omega = kTwoPi * sigmoid(raw[3]);
    const double s1 = softplus(raw[4]);
    const double s2 = softplus(raw[5]);
    dist.axis_vmf.lambda1 = std::min(s1 + s2, kLambdaMax);
    dist.axis_vmf.lambda2 = std::min(s2, kLambdaMax);
    dist.m_norm.mu = softplus(raw[6]);
    dist.m_norm.precision = softplus(raw[7]);
    dist.theta_precision = softplus(raw[8]);
    dist.d_precision = softplus(raw[9]);
    dist.theta_means.resize(n_configs);
    dist.d_means.resize(n_configs);
    for (int i = 0; i < n_configs; ++i) {
        dist.theta_means[i] = softplus(raw[10 + i]);
        dist.d_means[i] = softplus(raw[10 + n_configs + i]);
    }
    return dist;
}

double vvmf_log_density(const VectorVMFParams& params, const Vec3& x) {
    if (std::abs(x.norm() - 1.0) > 1e-9) {
        throw NotOnManifold("vvmf_log_density: x must be a unit vector");
    }
    return std::log(vmf_norm_c3(params.kappa)) + params.kappa * params.mu.dot(x);
}

}  // namespace screwdist
