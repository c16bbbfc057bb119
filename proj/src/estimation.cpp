#include "screwdist/estimation.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <functional>
#include <numbers>

namespace screwdist {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void validate_dataset(const Dataset& data) {
    if (data.empty()) throw InvalidLabel("dataset is empty");
    const std::size_t n_configs = data.front().configs.size();
    for (const ScrewObservation& obs : data) {
        if (!obs.axis.valid(1e-6)) throw InvalidLabel("label axis violates invariants");
        if (obs.configs.size() != n_configs) throw InvalidLabel("inconsistent config lengths");
        for (const Configuration& c : obs.configs) {
            if (c.theta < 0.0 || c.theta >= kTwoPi || c.d < 0.0) {
                throw InvalidLabel("configuration outside canonical ranges");
            }
        }
    }
}

// phi(a) / Phi(a); a >= 0 in all uses here (locations are non-negative).
double cdf_mills(double a) { return norm_pdf(a) / norm_cdf(a); }

// d/dkappa log C_3(kappa) = 1/kappa - coth(kappa), with the small-kappa series.
double dlog_c3(double kappa) {
    if (kappa < 1e-4) return -kappa / 3.0 + kappa * kappa * kappa / 45.0;
    return 1.0 / kappa - 1.0 / std::tanh(kappa);
}

// Accumulates -sum_i log N+(x_i | mu, beta) and its (mu, beta) gradient.
struct TruncNormFitTerm {
    double value = 0.0;
    double d_mu = 0.0;
    double d_beta = 0.0;

    void add(double mu, double beta, double x) {
        const double a = mu * std::sqrt(beta);
        value -= 0.5 * std::log(beta) - 0.5 * std::log(kTwoPi) - 0.5 * beta * (x - mu) * (x - mu) -
                 norm_log_cdf(a);
        const double mills = cdf_mills(a);
        d_mu += -beta * (x - mu) + std::sqrt(beta) * mills;
        d_beta += -0.5 / beta + 0.5 * (x - mu) * (x - mu) + mills * mu / (2.0 * std::sqrt(beta));
    }
};

struct Objective {
    std::function<double(const std::vector<double>&)> value;
    std::function<std::pair<double, std::vector<double>>(const std::vector<double>&)> value_grad;
};

struct StageResult {
    std::vector<double> trace;
    double final_grad_norm = 0.0;
    bool converged = false;
};

// First-order minimizer: per-coordinate sign-adaptive steps (iRprop-) with
// global step halving so that accepted steps never increase the objective.
// Full-batch gradients are deterministic, which is exactly where
// sign-agreement adaptation shines: coordinates with a persistent descent
// direction accelerate geometrically, converged coordinates collapse their
// step instead of jittering.
StageResult minimize(std::vector<double>& raw, const Objective& objective,
                     const std::vector<bool>& mask, int max_iters, const FitConfig& config) {
    const std::size_t dim = raw.size();
    std::vector<double> eta(dim, config.step_size);
    std::vector<double> prev_g(dim, 0.0);
    StageResult result;

    auto [f0, g] = objective.value_grad(raw);
    result.trace.push_back(f0);
    for (int iter = 0; iter < max_iters; ++iter) {
        double grad_norm = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            if (!mask[i]) g[i] = 0.0;
            grad_norm += g[i] * g[i];
        }
        result.final_grad_norm = std::sqrt(grad_norm);

        std::vector<double> direction(dim, 0.0);
        for (std::size_t i = 0; i < dim; ++i) {
            const double agreement = g[i] * prev_g[i];
            if (agreement > 0.0) {
                eta[i] = std::min(eta[i] * 1.2, 1.0);
            } else if (agreement < 0.0) {
                eta[i] = std::max(eta[i] * 0.5, 1e-12);
                g[i] = 0.0;  // skip the move right after a sign flip
            }
            direction[i] = (g[i] > 0.0 ? 1.0 : (g[i] < 0.0 ? -1.0 : 0.0)) * eta[i];
            prev_g[i] = g[i];
        }

        double scale = 1.0;
        std::vector<double> candidate(dim);
        double f1 = f0;
        bool accepted = false;
        bool halved = false;
        for (int h = 0; h <= config.max_halvings; ++h) {
            for (std::size_t i = 0; i < dim; ++i) candidate[i] = raw[i] - scale * direction[i];
            f1 = objective.value(candidate);
            if (std::isfinite(f1) && f1 <= f0) {
                accepted = true;
                break;
            }
            scale *= 0.5;
            halved = true;
        }
        if (!accepted) {
            result.converged = true;  // no descent step available
            break;
        }
        if (halved) {
            // Bake the rejection into the per-coordinate steps.
            for (std::size_t i = 0; i < dim; ++i) eta[i] = std::max(eta[i] * scale, 1e-12);
        }
        raw = candidate;
        const double improvement = f0 - f1;
        result.trace.push_back(f1);
        auto vg = objective.value_grad(raw);
        f0 = f1;
        g = std::move(vg.second);
        // A tiny improvement on a halved step only means the step overshot;
        // convergence requires the full-scale step to stall.
        if (!halved && improvement < config.tol) {
            result.converged = true;
            break;
        }
    }
    return result;
}

std::vector<double> per_step_means(const Dataset& data, bool theta) {
    const std::size_t n = data.front().configs.size();
    std::vector<double> means(n, 0.0);
    for (const ScrewObservation& obs : data) {
        for (std::size_t i = 0; i < n; ++i) {
            means[i] += theta ? obs.configs[i].theta : obs.configs[i].d;
        }
    }
    for (double& x : means) x /= static_cast<double>(data.size());
    return means;
}

std::vector<double> per_step_vars(const Dataset& data, const std::vector<double>& means,
                                  bool theta) {
    std::vector<double> vars(means.size(), 0.0);
    for (const ScrewObservation& obs : data) {
        for (std::size_t i = 0; i < means.size(); ++i) {
            const double x = theta ? obs.configs[i].theta : obs.configs[i].d;
            vars[i] += (x - means[i]) * (x - means[i]);
        }
    }
    for (double& x : vars) x /= static_cast<double>(data.size());
    return vars;
}

double raw_precision_init(double variance) {
    const double precision = std::min(std::max(1.0 / std::max(variance, 1e-300), 1e-2), 1e4);
    return inv_softplus(precision);
}

double raw_location_init(double mean) { return inv_softplus(std::max(mean, 1e-8)); }

double clamped_inv_sigmoid(double fraction) {
    return inv_sigmoid(std::min(std::max(fraction, 1e-6), 1.0 - 1e-6));
}

Mat32 mean_stiefel_projection(const Dataset& data) {
    Mat32 sum = Mat32::Zero();
    for (const ScrewObservation& obs : data) sum += obs.axis.stiefel_point();
    sum /= static_cast<double>(data.size());
    Eigen::JacobiSVD<Mat32> svd(sum, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU().leftCols<2>() * svd.matrixV().transpose();
}

}  // namespace

ScrewObservation FitReport::point_prediction() const {
    ScrewObservation pred;
    if (soft_ortho) {
        pred.axis = {soft_ortho->l.mu, soft_ortho->m.mu, soft_ortho->m_norm.mu};
        for (std::size_t i = 0; i < soft_ortho->theta_means.size(); ++i) {
            pred.configs.push_back({soft_ortho->theta_means[i], soft_ortho->d_means[i]});
        }
        return pred;
    }
    const Mat32 mode = mvmf_mode(dist.axis_vmf);
    pred.axis = {mode.col(0), mode.col(1), dist.m_norm.mu};
    for (int i = 0; i < dist.n_configs(); ++i) {
        pred.configs.push_back({dist.theta_means[i], dist.d_means[i]});
    }
    return pred;
}

double nll(const JointScrewDistribution& dist, const Dataset& data) {
    validate_dataset(data);
    double total = 0.0;
    for (const ScrewObservation& obs : data) total -= joint_log_density(dist, obs);
    return total;
}

double nll_raw(const std::vector<double>& raw, const Dataset& data) {
    return nll(map_raw_parameters(raw), data);
}

std::pair<double, std::vector<double>> nll_gradient(const std::vector<double>& raw,
                                                    const Dataset& data) {
    validate_dataset(data);
    const JointScrewDistribution dist = map_raw_parameters(raw);
    const int n_configs = dist.n_configs();
    if (static_cast<int>(data.front().configs.size()) != n_configs) {
        throw DimensionMismatch("nll_gradient: dataset configs do not match raw layout");
    }
    const double n = static_cast<double>(data.size());

    Mat32 stat = Mat32::Zero();  // sum of observed Stiefel points
    for (const ScrewObservation& obs : data) stat += obs.axis.stiefel_point();

    const MatrixVMFParams& p = dist.axis_vmf;
    const double ca = std::cos(p.alpha), sa = std::sin(p.alpha);
    const double cb = std::cos(p.beta), sb = std::sin(p.beta);
    const double cg = std::cos(p.gamma), sg = std::sin(p.gamma);
    Mat3 rz, ry, rx, drz, dry, drx;
    rz << ca, -sa, 0, sa, ca, 0, 0, 0, 1;
    ry << cb, 0, sb, 0, 1, 0, -sb, 0, cb;
    rx << 1, 0, 0, 0, cg, -sg, 0, sg, cg;
    drz << -sa, -ca, 0, ca, -sa, 0, 0, 0, 0;
    dry << -sb, 0, cb, 0, 0, 0, -cb, 0, -sb;
    drx << 0, 0, 0, 0, -sg, -cg, 0, cg, -sg;

    Mat2 lambda = Mat2::Zero();
    lambda(0, 0) = p.lambda1;
    lambda(1, 1) = p.lambda2;
    const Mat2 om = p.omega_rotation();
    Mat2 dom;
    dom << -std::sin(p.omega), -std::cos(p.omega), std::cos(p.omega), -std::sin(p.omega);

    const Mat32 gamma_frame = (rz * ry * rx).leftCols<2>();
    const Mat32 f = gamma_frame * lambda * om.transpose();

    // Value: axis part.
    const Hyp0F1Result z = hyp0f1_matrix(1.5, p.lambda1, p.lambda2);
    double value = -(f.transpose() * stat).trace() + n * z.log_value;

    std::vector<double> grad(raw.size(), 0.0);

    // Angles of Gamma.
    const Mat2 lam_om = lambda * om.transpose();
    grad[0] = -(((drz * ry * rx).leftCols<2>() * lam_om).transpose() * stat).trace();
    grad[1] = -(((rz * dry * rx).leftCols<2>() * lam_om).transpose() * stat).trace();
    grad[2] = -(((rz * ry * drx).leftCols<2>() * lam_om).transpose() * stat).trace();
    // Omega.
    grad[3] = -((gamma_frame * lambda * dom.transpose()).transpose() * stat).trace();

    // Singular values: data term plus normalizer derivative, through the cap.
    const Mat2 projected = gamma_frame.transpose() * stat * om;
    const auto [dz1, dz2] = log_hyp0f1_grad(p.lambda1, p.lambda2);
    const double d_lambda1 = -projected(0, 0) + n * dz1;
    const double d_lambda2 = -projected(1, 1) + n * dz2;
    const double s1 = softplus(raw[4]);
    const double s2 = softplus(raw[5]);
    const bool cap1 = s1 + s2 >= kLambdaMax;
    const bool cap2 = s2 >= kLambdaMax;
    const double d_s1 = cap1 ? 0.0 : d_lambda1;
    const double d_s2 = (cap1 ? 0.0 : d_lambda1) + (cap2 ? 0.0 : d_lambda2);
    grad[4] = d_s1 * sigmoid(raw[4]);
    grad[5] = d_s2 * sigmoid(raw[5]);

    // Scalar truncated-normal terms.
    TruncNormFitTerm m_term;
    for (const ScrewObservation& obs : data) {
        m_term.add(dist.m_norm.mu, dist.m_norm.precision, obs.axis.m_norm);
    }
    value += m_term.value;
    grad[6] = m_term.d_mu * sigmoid(raw[6]);
    grad[7] = m_term.d_beta * sigmoid(raw[7]);

    double d_beta_theta = 0.0, d_beta_d = 0.0;
    for (int i = 0; i < n_configs; ++i) {
        TruncNormFitTerm theta_term, d_term;
        for (const ScrewObservation& obs : data) {
            theta_term.add(dist.theta_means[i], dist.theta_precision, obs.configs[i].theta);
            d_term.add(dist.d_means[i], dist.d_precision, obs.configs[i].d);
        }
        value += theta_term.value + d_term.value;
        grad[10 + i] = theta_term.d_mu * sigmoid(raw[10 + i]);
        grad[10 + n_configs + i] = d_term.d_mu * sigmoid(raw[10 + n_configs + i]);
        d_beta_theta += theta_term.d_beta;
        d_beta_d += d_term.d_beta;
    }
    grad[8] = d_beta_theta * sigmoid(raw[8]);
    grad[9] = d_beta_d * sigmoid(raw[9]);

    // Chain through the sigmoid range mapping of the four angles.
    const double ranges[4] = {kTwoPi, std::numbers::pi, kTwoPi, kTwoPi};
    for (int i = 0; i < 4; ++i) {
        const double s = sigmoid(raw[i]);
        grad[i] *= ranges[i] * s * (1.0 - s);
    }
    return {value, grad};
}

FitReport fit(const Dataset& data, const FitConfig& config, Rng& rng) {
    (void)rng;  // fit is deterministic; the stream is part of the interface
    validate_dataset(data);
    const int n_configs = static_cast<int>(data.front().configs.size());

    // Moment initialization; Lambda starts at diag(1, 1).
    std::vector<double> raw(raw_parameter_length(n_configs), 0.0);
    const Mat32 mode0 = mean_stiefel_projection(data);
    const MatrixVMFParams angles = MatrixVMFParams::from_mode(mode0, 1.0, 1.0);
    raw[0] = clamped_inv_sigmoid(angles.alpha / kTwoPi);
    raw[1] = clamped_inv_sigmoid(angles.beta / std::numbers::pi);
    raw[2] = clamped_inv_sigmoid(angles.gamma / kTwoPi);
    raw[3] = clamped_inv_sigmoid(angles.omega / kTwoPi);
    raw[4] = -20.0;  // s1 ~ 0
    raw[5] = inv_softplus(1.0);

    double m_mean = 0.0, m_var = 0.0;
    for (const ScrewObservation& obs : data) m_mean += obs.axis.m_norm;
    m_mean /= static_cast<double>(data.size());
    for (const ScrewObservation& obs : data) {
        m_var += (obs.axis.m_norm - m_mean) * (obs.axis.m_norm - m_mean);
    }
    m_var /= static_cast<double>(data.size());
    raw[6] = raw_location_init(m_mean);
    raw[7] = raw_precision_init(m_var);

    const std::vector<double> theta_means = per_step_means(data, true);
    const std::vector<double> d_means = per_step_means(data, false);
    const std::vector<double> theta_vars = per_step_vars(data, theta_means, true);
    const std::vector<double> d_vars = per_step_vars(data, d_means, false);
    double theta_var = 0.0, d_var = 0.0;
    for (double x : theta_vars) theta_var += x;
    for (double x : d_vars) d_var += x;
    raw[8] = raw_precision_init(theta_var / theta_vars.size());
    raw[9] = raw_precision_init(d_var / d_vars.size());
    for (int i = 0; i < n_configs; ++i) {
        raw[10 + i] = raw_location_init(theta_means[i]);
        raw[10 + n_configs + i] = raw_location_init(d_means[i]);
    }

    Objective objective{
        [&](const std::vector<double>& r) { return nll_raw(r, data); },
        [&](const std::vector<double>& r) { return nll_gradient(r, data); }};

    FitReport report;
    report.method = "dustnet";
    for (const StageConfig& stage : config.stages) {
        std::vector<bool> mask(raw.size(), true);
        if (stage.axis_frame_only) {
            std::fill(mask.begin(), mask.end(), false);
            for (int i = 0; i < 4; ++i) mask[i] = true;
        }
        if (stage.freeze_lambda) mask[4] = mask[5] = false;
        const StageResult res = minimize(raw, objective, mask, stage.max_iters, config);
        report.nll_trace.push_back(res.trace);
        report.stage_final_grad_norm.push_back(res.final_grad_norm);
        report.stage_converged.push_back(res.converged);
        if (!res.converged) report.non_convergence = true;
    }
    report.raw = raw;
    report.dist = map_raw_parameters(raw);
    report.final_nll = nll_raw(raw, data);
    return report;
}

// ---------------------------------------------------------------------------
// Baseline: vm-SoftOrtho
// ---------------------------------------------------------------------------

namespace {

// Raw layout: [u_l(3), kappa_l, u_m(3), kappa_m, mu_m, beta_m, beta_theta,
// beta_d, theta locations..., d locations...]
struct SoftOrthoView {
    int n_configs;
    int length() const { return 12 + 2 * n_configs; }
};

SoftOrthoParams soft_ortho_from_raw(const std::vector<double>& raw, int n_configs) {
    SoftOrthoParams p;
    const Vec3 ul(raw[0], raw[1], raw[2]);
    const Vec3 um(raw[4], raw[5], raw[6]);
    p.l = {ul / ul.norm(), softplus(raw[3])};
    p.m = {um / um.norm(), softplus(raw[7])};
    p.m_norm = {softplus(raw[8]), softplus(raw[9])};
    p.theta_precision = softplus(raw[10]);
    p.d_precision = softplus(raw[11]);
    for (int i = 0; i < n_configs; ++i) {
        p.theta_means.push_back(softplus(raw[12 + i]));
        p.d_means.push_back(softplus(raw[12 + n_configs + i]));
    }
    return p;
}

std::pair<double, std::vector<double>> soft_ortho_objective(const std::vector<double>& raw,
                                                            const Dataset& data,
                                                            double penalty) {
    const int n_configs = static_cast<int>(data.front().configs.size());
    const SoftOrthoParams p = soft_ortho_from_raw(raw, n_configs);
    const double n = static_cast<double>(data.size());

    Vec3 sum_l = Vec3::Zero(), sum_m = Vec3::Zero();
    for (const ScrewObservation& obs : data) {
        sum_l += obs.axis.l_hat;
        sum_m += obs.axis.m_hat;
    }

    double value = 0.0;
    std::vector<double> grad(raw.size(), 0.0);

    // Two independent vMF likelihoods.
    struct VmfPart {
        const Vec3 u;
        const double kappa;
        const Vec3& sum;
        int base;
    };
    const Vec3 ul(raw[0], raw[1], raw[2]);
    const Vec3 um(raw[4], raw[5], raw[6]);
    const VmfPart parts[2] = {{ul, p.l.kappa, sum_l, 0}, {um, p.m.kappa, sum_m, 4}};
    for (const VmfPart& part : parts) {
        const double norm = part.u.norm();
        const Vec3 mu = part.u / norm;
        value += -n * std::log(vmf_norm_c3(part.kappa)) - part.kappa * mu.dot(part.sum);
        const Vec3 d_mu = -part.kappa * (part.sum - mu * mu.dot(part.sum)) / norm;
        for (int i = 0; i < 3; ++i) grad[part.base + i] = d_mu[i];
        const double d_kappa = -n * dlog_c3(part.kappa) - mu.dot(part.sum);
        grad[part.base + 3] = d_kappa * sigmoid(raw[part.base + 3]);
    }

    // Soft orthogonality penalty on the two modes.
    const Vec3 mu_l = p.l.mu, mu_m = p.m.mu;
    const double dot = mu_l.dot(mu_m);
    value += penalty * n * dot * dot;
    const Vec3 pen_l = penalty * n * 2.0 * dot * (mu_m - mu_l * dot) / ul.norm();
    const Vec3 pen_m = penalty * n * 2.0 * dot * (mu_l - mu_m * dot) / um.norm();
    for (int i = 0; i < 3; ++i) {
        grad[i] += pen_l[i];
        grad[4 + i] += pen_m[i];
    }

    // Scalar terms.
    TruncNormFitTerm m_term;
    for (const ScrewObservation& obs : data) {
        m_term.add(p.m_norm.mu, p.m_norm.precision, obs.axis.m_norm);
    }
    value += m_term.value;
    grad[8] = m_term.d_mu * sigmoid(raw[8]);
    grad[9] = m_term.d_beta * sigmoid(raw[9]);

    double d_beta_theta = 0.0, d_beta_d = 0.0;
    for (int i = 0; i < n_configs; ++i) {
        TruncNormFitTerm theta_term, d_term;
        for (const ScrewObservation& obs : data) {
            theta_term.add(p.theta_means[i], p.theta_precision, obs.configs[i].theta);
            d_term.add(p.d_means[i], p.d_precision, obs.configs[i].d);
        }
        value += theta_term.value + d_term.value;
        grad[12 + i] = theta_term.d_mu * sigmoid(raw[12 + i]);
        grad[12 + n_configs + i] = d_term.d_mu * sigmoid(raw[12 + n_configs + i]);
        d_beta_theta += theta_term.d_beta;
        d_beta_d += d_term.d_beta;
    }
    grad[10] = d_beta_theta * sigmoid(raw[10]);
    grad[11] = d_beta_d * sigmoid(raw[11]);

    return {value, grad};
}

}  // namespace

FitReport fit_vm_soft_ortho(const Dataset& data, const FitConfig& config, Rng& rng) {
    (void)rng;
    validate_dataset(data);
    const int n_configs = static_cast<int>(data.front().configs.size());
    const SoftOrthoView view{n_configs};

    std::vector<double> raw(view.length(), 0.0);
    Vec3 sum_l = Vec3::Zero(), sum_m = Vec3::Zero();
    for (const ScrewObservation& obs : data) {
        sum_l += obs.axis.l_hat;
        sum_m += obs.axis.m_hat;
    }
    const Vec3 mu_l0 = sum_l.norm() > 1e-12 ? Vec3(sum_l / sum_l.norm()) : Vec3::UnitX();
    const Vec3 mu_m0 = sum_m.norm() > 1e-12 ? Vec3(sum_m / sum_m.norm()) : Vec3::UnitY();
    for (int i = 0; i < 3; ++i) raw[i] = mu_l0[i];
    for (int i = 0; i < 3; ++i) raw[4 + i] = mu_m0[i];
    raw[3] = inv_softplus(1.0);
    raw[7] = inv_softplus(1.0);

    double m_mean = 0.0, m_var = 0.0;
    for (const ScrewObservation& obs : data) m_mean += obs.axis.m_norm;
    m_mean /= static_cast<double>(data.size());
    for (const ScrewObservation& obs : data) {
        m_var += (obs.axis.m_norm - m_mean) * (obs.axis.m_norm - m_mean);
    }
    m_var /= static_cast<double>(data.size());
    raw[8] = raw_location_init(m_mean);
    raw[9] = raw_precision_init(m_var);

    const std::vector<double> theta_means = per_step_means(data, true);
    const std::vector<double> d_means = per_step_means(data, false);
    const std::vector<double> theta_vars = per_step_vars(data, theta_means, true);
    const std::vector<double> d_vars = per_step_vars(data, d_means, false);
    double theta_var = 0.0, d_var = 0.0;
    for (double x : theta_vars) theta_var += x;
    for (double x : d_vars) d_var += x;
    raw[10] = raw_precision_init(theta_var / theta_vars.size());
    raw[11] = raw_precision_init(d_var / d_vars.size());
    for (int i = 0; i < n_configs; ++i) {
        raw[12 + i] = raw_location_init(theta_means[i]);
        raw[12 + n_configs + i] = raw_location_init(d_means[i]);
    }

    Objective objective{
        [&](const std::vector<double>& r) {
            return soft_ortho_objective(r, data, config.ortho_penalty).first;
        },
        [&](const std::vector<double>& r) {
            return soft_ortho_objective(r, data, config.ortho_penalty);
        }};

    int total_iters = 0;
    for (const StageConfig& stage : config.stages) total_iters += stage.max_iters;

    FitReport report;
    report.method = "vm-soft-ortho";
    std::vector<bool> mask(raw.size(), true);
    const StageResult res = minimize(raw, objective, mask, total_iters, config);
    report.nll_trace.push_back(res.trace);
    report.stage_final_grad_norm.push_back(res.final_grad_norm);
    report.stage_converged.push_back(res.converged);
    report.non_convergence = !res.converged;
    report.raw = raw;
    report.soft_ortho = soft_ortho_from_raw(raw, n_configs);
    report.final_nll = soft_ortho_objective(raw, data, config.ortho_penalty).first;
    return report;
}

// ---------------------------------------------------------------------------
// Baseline: Direct-F
// ---------------------------------------------------------------------------

namespace {

// Raw layout: [F column-major (6), mu_m, beta_m, beta_theta, beta_d,
// theta locations..., d locations...]
std::pair<double, std::vector<double>> direct_f_objective(const std::vector<double>& raw,
                                                          const Dataset& data) {
    const int n_configs = static_cast<int>(data.front().configs.size());
    const double n = static_cast<double>(data.size());
    Mat32 f;
    f << raw[0], raw[3], raw[1], raw[4], raw[2], raw[5];

    Mat32 stat = Mat32::Zero();
    for (const ScrewObservation& obs : data) stat += obs.axis.stiefel_point();

    Eigen::JacobiSVD<Mat32> svd(f, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double l1 = std::min(svd.singularValues()[0], kLambdaMax);
    const double l2 = std::min(svd.singularValues()[1], kLambdaMax);
    const Hyp0F1Result z = hyp0f1_matrix(1.5, l1, l2);

    double value = -(f.transpose() * stat).trace() + n * z.log_value;
    std::vector<double> grad(raw.size(), 0.0);

    const auto [dz1, dz2] = log_hyp0f1_grad(l1, l2);
    Mat32 d_f = -stat;
    if (svd.singularValues()[0] < kLambdaMax) {
        d_f += n * dz1 * svd.matrixU().col(0) * svd.matrixV().col(0).transpose();
    }
    if (svd.singularValues()[1] < kLambdaMax) {
        d_f += n * dz2 * svd.matrixU().col(1) * svd.matrixV().col(1).transpose();
    }
    for (int c = 0; c < 2; ++c) {
        for (int r = 0; r < 3; ++r) grad[3 * c + r] = d_f(r, c);
    }

    TruncNormFitTerm m_term;
    const double mu_m = softplus(raw[6]);
    const double beta_m = softplus(raw[7]);
    const double beta_theta = softplus(raw[8]);
    const double beta_d = softplus(raw[9]);
    for (const ScrewObservation& obs : data) m_term.add(mu_m, beta_m, obs.axis.m_norm);
    value += m_term.value;
    grad[6] = m_term.d_mu * sigmoid(raw[6]);
    grad[7] = m_term.d_beta * sigmoid(raw[7]);

    double d_bt = 0.0, d_bd = 0.0;
    for (int i = 0; i < n_configs; ++i) {
        TruncNormFitTerm theta_term, d_term;
        const double mu_t = softplus(raw[10 + i]);
        const double mu_d = softplus(raw[10 + n_configs + i]);
        for (const ScrewObservation& obs : data) {
            theta_term.add(mu_t, beta_theta, obs.configs[i].theta);
            d_term.add(mu_d, beta_d, obs.configs[i].d);
        }
        value += theta_term.value + d_term.value;
        grad[10 + i] = theta_term.d_mu * sigmoid(raw[10 + i]);
        grad[10 + n_configs + i] = d_term.d_mu * sigmoid(raw[10 + n_configs + i]);
        d_bt += theta_term.d_beta;
        d_bd += d_term.d_beta;
    }
    grad[8] = d_bt * sigmoid(raw[8]);
    grad[9] = d_bd * sigmoid(raw[9]);

    return {value, grad};
}

}  // namespace

FitReport fit_direct_f(const Dataset& data, const FitConfig& config, Rng& rng) {
    (void)rng;
    validate_dataset(data);
    const int n_configs = static_cast<int>(data.front().configs.size());

    std::vector<double> raw(raw_parameter_length(n_configs), 0.0);
    const Mat32 f0 = mean_stiefel_projection(data);  // F = M at Lambda = I
    for (int c = 0; c < 2; ++c) {
        for (int r = 0; r < 3; ++r) raw[3 * c + r] = f0(r, c);
    }

    double m_mean = 0.0, m_var = 0.0;
    for (const ScrewObservation& obs : data) m_mean += obs.axis.m_norm;
    m_mean /= static_cast<double>(data.size());
    for (const ScrewObservation& obs : data) {
        m_var += (obs.axis.m_norm - m_mean) * (obs.axis.m_norm - m_mean);
    }
    m_var /= static_cast<double>(data.size());
    raw[6] = raw_location_init(m_mean);
    raw[7] = raw_precision_init(m_var);

    const std::vector<double> theta_means = per_step_means(data, true);
    const std::vector<double> d_means = per_step_means(data, false);
    const std::vector<double> theta_vars = per_step_vars(data, theta_means, true);
    const std::vector<double> d_vars = per_step_vars(data, d_means, false);
    double theta_var = 0.0, d_var = 0.0;
    for (double x : theta_vars) theta_var += x;
    for (double x : d_vars) d_var += x;
    raw[8] = raw_precision_init(theta_var / theta_vars.size());
    raw[9] = raw_precision_init(d_var / d_vars.size());
    for (int i = 0; i < n_configs; ++i) {
        raw[10 + i] = raw_location_init(theta_means[i]);
        raw[10 + n_configs + i] = raw_location_init(d_means[i]);
    }

    Objective objective{
        [&](const std::vector<double>& r) { return direct_f_objective(r, data).first; },
        [&](const std::vector<double>& r) { return direct_f_objective(r, data); }};

    int total_iters = 0;
    for (const StageConfig& stage : config.stages) total_iters += stage.max_iters;

    FitReport report;
    report.method = "direct-f";
    std::vector<bool> mask(raw.size(), true);
    const StageResult res = minimize(raw, objective, mask, total_iters, config);
    report.nll_trace.push_back(res.trace);
    report.stage_final_grad_norm.push_back(res.final_grad_norm);
    report.stage_converged.push_back(res.converged);
    report.non_convergence = !res.converged;
    report.raw = raw;

    Mat32 f;
    f << raw[0], raw[3], raw[1], raw[4], raw[2], raw[5];
    report.f_direct = f;

    // Recover the structured parameter set through the SVD of F.
    Eigen::JacobiSVD<Mat32> svd(f, Eigen::ComputeFullU | Eigen::ComputeFullV);
    report.dist.axis_vmf = MatrixVMFParams::from_svd(
        svd.matrixU().leftCols<2>(), std::min(svd.singularValues()[0], kLambdaMax),
        std::min(svd.singularValues()[1], kLambdaMax), svd.matrixV());
    report.dist.m_norm = {softplus(raw[6]), softplus(raw[7])};
    report.dist.theta_precision = softplus(raw[8]);
    report.dist.d_precision = softplus(raw[9]);
    for (int i = 0; i < n_configs; ++i) {
        report.dist.theta_means.push_back(softplus(raw[10 + i]));
        report.dist.d_means.push_back(softplus(raw[10 + n_configs + i]));
    }
    report.final_nll = direct_f_objective(raw, data).first;
    return report;
}

}  // namespace screwdist
