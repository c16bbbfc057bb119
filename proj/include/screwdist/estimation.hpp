#pragma once

#include <optional>
#include <string>

#include "screwdist/distributions.hpp"

namespace screwdist {

struct InvalidLabel : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

using Dataset = std::vector<ScrewObservation>;

/// One optimization stage: which raw coordinates move and for how long.
struct StageConfig {
    bool freeze_lambda = false;     // lambda entries held fixed
    bool axis_frame_only = false;   // only the four frame angles move
    int max_iters = 600;
};

struct FitConfig {
    // Default schedule: frame angles with Lambda pinned at diag(1,1), then
    // everything but Lambda, then the full parameter set.
    std::vector<StageConfig> stages = {
        {true, true, 400}, {true, false, 600}, {false, false, 2000}};
    double step_size = 0.05;
    double tol = 1e-10;          // stop when an accepted step improves NLL less than this
    double lambda_cap = kLambdaMax;
    double ortho_penalty = 100.0;  // vm-SoftOrtho soft-orthogonality weight
    int max_halvings = 40;
    int n_configs = 15;          // configuration pairs per sequence
};

struct SoftOrthoParams {
    VectorVMFParams l;
    VectorVMFParams m;
    TruncatedNormalParams m_norm;
    std::vector<double> theta_means;
    double theta_precision = 1.0;
    std::vector<double> d_means;
    double d_precision = 1.0;
};

struct FitReport {
    std::string method;
    JointScrewDistribution dist;             // dustnet and direct-f
    std::vector<double> raw;                 // final unconstrained parameters
    std::optional<Mat32> f_direct;           // direct-f: the fitted F itself
    std::optional<SoftOrthoParams> soft_ortho;
    std::vector<std::vector<double>> nll_trace;  // accepted NLL values per stage
    std::vector<double> stage_final_grad_norm;
    std::vector<bool> stage_converged;
    bool non_convergence = false;
    double final_nll = 0.0;

    /// Mode-based point estimate for metric evaluation. For vm-SoftOrtho the
    /// axis pair is the two fitted mean directions and need not be orthogonal.
    ScrewObservation point_prediction() const;
};

/// Negative log likelihood, summed over the dataset.
double nll(const JointScrewDistribution& dist, const Dataset& data);

/// NLL as a function of the unconstrained parameter vector.
double nll_raw(const std::vector<double>& raw, const Dataset& data);

/// Analytic gradient of nll_raw; matches central finite differences away from
/// the lambda cap. Returns (value, gradient).
std::pair<double, std::vector<double>> nll_gradient(const std::vector<double>& raw,
                                                    const Dataset& data);

/// Staged maximum-likelihood fit of the joint screw distribution.
FitReport fit(const Dataset& data, const FitConfig& config, Rng& rng);

/// Baseline: two independent vector vMFs for l and m directions plus a soft
/// orthogonality penalty on their modes; truncated normals for the scalars.
FitReport fit_vm_soft_ortho(const Dataset& data, const FitConfig& config, Rng& rng);

/// Baseline: same joint density, but optimizing the six entries of F
/// directly; mode and concentration recovered through the SVD.
FitReport fit_direct_f(const Dataset& data, const FitConfig& config, Rng& rng);

}  // namespace screwdist
