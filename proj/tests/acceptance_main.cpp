// Acceptance suite: runs every criterion at its stated tolerance and prints
// one line per criterion. Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include "oracles/stats_oracle.hpp"
#include "oracles/symfun_oracle.hpp"
#include "screwdist/estimation.hpp"
#include "screwdist/metrics.hpp"
#include "screwdist/synthetic_data.hpp"

using namespace screwdist;
namespace sdt = screwdist::testing;

namespace {

constexpr double kPi = std::numbers::pi;

int g_failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

void report(int number, const char* name, bool pass, double seconds, const char* detail) {
    std::printf("[%s] criterion %2d: %-28s (%6.1f s) %s\n", pass ? "PASS" : "FAIL", number,
                name, seconds, detail);
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

Dataset observations_of(const std::vector<LabeledSequence>& sequences) {
    Dataset data;
    for (const auto& seq : sequences) data.push_back(seq.observation());
    return data;
}

// --------------------------------------------------------------------------
// 1. Zonal identity: sum over partitions of C_nu(Y) = (tr Y)^n, n <= 12,
//    100 random diagonal arguments, rel err <= 1e-9, runtime <= 10 s.
void criterion_1() {
    Timer timer;
    const ZonalTable table2(12, 2);
    const ZonalTable table3(12, 3);
    Rng rng(1001);
    std::uniform_real_distribution<double> unif(0.05, 2.0);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const std::vector<double> y2 = {unif(rng), unif(rng)};
        const std::vector<double> y3 = {unif(rng), unif(rng), unif(rng)};
        for (int n = 1; n <= 12; ++n) {
            double sum2 = 0.0, sum3 = 0.0;
            for (const Partition& nu : table2.basis(n)) sum2 += table2.zonal(nu, y2);
            for (const Partition& nu : table3.basis(n)) sum3 += table3.zonal(nu, y3);
            const double t2 = std::pow(y2[0] + y2[1], n);
            const double t3 = std::pow(y3[0] + y3[1] + y3[2], n);
            worst = std::max(worst, std::abs(sum2 - t2) / t2);
            worst = std::max(worst, std::abs(sum3 - t3) / t3);
        }
    }
    const double elapsed = timer.seconds();
    char detail[128];
    std::snprintf(detail, sizeof(detail), "max rel err %.2e (limit 1e-9)", worst);
    report(1, "zonal trace identity", worst <= 1e-9 && elapsed <= 10.0, elapsed, detail);
}

// --------------------------------------------------------------------------
// 2. 0F1 correctness: (a) truncated series vs brute-force partition sum,
//    rel err <= 1e-10 for lambda <= 10; (b) scalar reduction sinh(l)/l at
//    (l, 0), rel err <= 1e-8; (c) weight layers decreasing at n = 25 for all
//    lambda1, lambda2 <= 50.
void criterion_2() {
    Timer timer;
    const sdt::TwoVarZonalOracle oracle(kDefaultTruncation);

    double worst_brute = 0.0;
    for (double l1 : {0.0, 1.0, 3.0, 7.0, 10.0}) {
        for (double l2 : {0.0, 1.0, 3.0, 7.0, 10.0}) {
            if (l2 > l1) continue;
            const double ours = hyp0f1_matrix(1.5, l1, l2).value;
            const double brute = oracle.hyp0f1(l1, l2, kDefaultTruncation);
            worst_brute = std::max(worst_brute, std::abs(ours - brute) / brute);
        }
    }
    const bool pass_brute = worst_brute <= 1e-10;

    double worst_scalar = 0.0;
    for (double l : {0.5, 1.0, 2.0, 5.0, 10.0}) {
        const double ours = hyp0f1_matrix(1.5, l, 0.0).value;
        const double truth = std::sinh(l) / l;
        worst_scalar = std::max(worst_scalar, std::abs(ours - truth) / truth);
    }
    const bool pass_scalar = worst_scalar <= 1e-8;

    bool layers_decreasing = true;
    double worst_l1 = 0.0, worst_l2 = 0.0;
    for (double l1 : {0.0, 10.0, 25.0, 40.0, 50.0}) {
        for (double l2 : {0.0, 10.0, 25.0, 40.0, 50.0}) {
            if (l2 > l1) continue;
            if (hyp0f1_matrix(1.5, l1, l2).diverging) {
                if (layers_decreasing) {
                    worst_l1 = l1;
                    worst_l2 = l2;
                }
                layers_decreasing = false;
            }
        }
    }

    const double elapsed = timer.seconds();
    char detail[256];
    std::snprintf(detail, sizeof(detail),
                  "brute %.1e (1e-10) scalar %.1e (1e-8) layers %s", worst_brute, worst_scalar,
                  layers_decreasing ? "decreasing" : "INCREASING");
    if (!layers_decreasing) {
        std::printf(
            "       layer check: first failure at lambda = (%.0f, %.0f). The series argument\n"
            "       is Lambda^2/4, so its weight layers peak near sqrt(tr(Lambda^2)/4); with\n"
            "       both singular values large that peak lies past 25 and the truncated tail\n"
            "       is still growing. A truncation at 25 turns over in time only for\n"
            "       near-rank-1 arguments (e.g. every (lambda, 0) up to the cap passes).\n"
            "       The value itself stays finite and the divergence flag reports the\n"
            "       regime, which is what downstream callers rely on.\n",
            worst_l1, worst_l2);
    }
    report(2, "0F1 series correctness", pass_brute && pass_scalar && layers_decreasing,
           elapsed, detail);
}

// --------------------------------------------------------------------------
// 3. Density normalization: Monte Carlo integral over uniform V_{2,3} within
//    [0.98, 1.02] at lambda in {(0,0), (2,1), (5,5)}, 1e6 samples, <= 60 s.
void criterion_3() {
    Timer timer;
    Rng rng(1003);
    bool pass = true;
    char detail[160];
    std::string parts;
    for (const auto& [l1, l2] : std::vector<std::pair<double, double>>{
             {0.0, 0.0}, {2.0, 1.0}, {5.0, 5.0}}) {
        const MatrixVMFParams params =
            MatrixVMFParams::from_mode(sample_uniform_stiefel(rng), l1, l2);
        const Mat32 f = params.f_matrix();
        const double log_z = hyp0f1_matrix(1.5, l1, l2).log_value;
        // Spot-check that the inlined formula is the library density.
        {
            const Mat32 x = sample_uniform_stiefel(rng);
            const double direct = (f.transpose() * x).trace() - log_z;
            if (std::abs(direct - mvmf_log_density(params, x)) > 1e-12) pass = false;
        }
        double total = 0.0;
        const int n = 1000000;
        for (int i = 0; i < n; ++i) {
            const Mat32 x = sample_uniform_stiefel(rng);
            total += std::exp((f.transpose() * x).trace() - log_z);
        }
        const double integral = total / n;
        char buf[48];
        std::snprintf(buf, sizeof(buf), "(%.0f,%.0f): %.4f ", l1, l2, integral);
        parts += buf;
        if (integral < 0.98 || integral > 1.02) pass = false;
    }
    const double elapsed = timer.seconds();
    std::snprintf(detail, sizeof(detail), "%s(limits [0.98, 1.02])", parts.c_str());
    report(3, "density MC normalization", pass && elapsed <= 60.0, elapsed, detail);
}

// --------------------------------------------------------------------------
// 4. Sampler correctness: Gibbs vs uniform-proposal rejection at (2,1),
//    KS p > 0.01 on tr(F^T X) with 1e5 draws; all draws on-manifold to 1e-9.
void criterion_4() {
    Timer timer;
    Rng rng(1004);
    const MatrixVMFParams params =
        MatrixVMFParams::from_mode(sample_uniform_stiefel(rng), 2.0, 1.0);
    const Mat32 f = params.f_matrix();

    const int n = 100000;
    bool on_manifold = true;
    std::vector<double> gibbs_stats, oracle_stats;
    gibbs_stats.reserve(n);
    oracle_stats.reserve(n);
    for (const Mat32& x : mvmf_sample(params, rng, n)) {
        if ((x.transpose() * x - Mat2::Identity()).cwiseAbs().maxCoeff() > 1e-9) {
            on_manifold = false;
        }
        gibbs_stats.push_back((f.transpose() * x).trace());
    }
    for (int i = 0; i < n; ++i) {
        oracle_stats.push_back((f.transpose() * sdt::mvmf_rejection_sample(params, rng)).trace());
    }
    const double p = sdt::ks_two_sample_pvalue(gibbs_stats, oracle_stats);
    const double elapsed = timer.seconds();
    char detail[96];
    std::snprintf(detail, sizeof(detail), "KS p = %.3f (> 0.01), on-manifold %s", p,
                  on_manifold ? "yes" : "NO");
    report(4, "Gibbs sampler vs rejection", p > 0.01 && on_manifold, elapsed, detail);
}

// --------------------------------------------------------------------------
// 5. Gradient check: analytic NLL gradient vs central finite differences,
//    componentwise rel err <= 1e-5 on 100 random instances with n-1 = 15.
void criterion_5() {
    Timer timer;
    Rng rng(1005);
    DatasetTemplate tmpl;
    tmpl.categories = {Category::revolute};
    tmpl.n_configs = 15;
    tmpl.shared_axis = true;

    std::uniform_real_distribution<double> angle_raw(-1.5, 1.5);
    std::uniform_real_distribution<double> scale_raw(-1.0, 1.5);
    double worst = 0.0;
    for (int instance = 0; instance < 100; ++instance) {
        NoiseSpec noise;
        noise.axis_lambda = {20.0, 20.0};
        noise.scalar = NoiseSpec::ScalarNoise{50.0, 50.0, 50.0};
        const Dataset data = observations_of(generate_dataset(tmpl, 2, noise, 2000 + instance));
        std::vector<double> raw(raw_parameter_length(15));
        for (int i = 0; i < 4; ++i) raw[i] = angle_raw(rng);
        for (std::size_t i = 4; i < raw.size(); ++i) raw[i] = scale_raw(rng);

        const auto [value, grad] = nll_gradient(raw, data);
        (void)value;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            std::vector<double> plus = raw, minus = raw;
            plus[i] += 1e-5;
            minus[i] -= 1e-5;
            const double fd = (nll_raw(plus, data) - nll_raw(minus, data)) / 2e-5;
            const double scale = std::max({1.0, std::abs(fd), std::abs(grad[i])});
            worst = std::max(worst, std::abs(grad[i] - fd) / scale);
        }
    }
    const double elapsed = timer.seconds();
    char detail[96];
    std::snprintf(detail, sizeof(detail), "max componentwise rel err %.2e (limit 1e-5)", worst);
    report(5, "NLL gradient vs differences", worst <= 1e-5, elapsed, detail);
}

// --------------------------------------------------------------------------
// 6. Geometry roundtrip: 1e4 random rigid transforms reconstruct to 1e-9;
//    line-motion composition and Plücker invariants preserved to 1e-9.
void criterion_6() {
    Timer timer;
    Rng rng(1006);
    std::normal_distribution<double> normal(0.0, 1.0);

    double worst_roundtrip = 0.0;
    for (int rep = 0; rep < 10000; ++rep) {
        Eigen::Quaterniond q(normal(rng), normal(rng), normal(rng), normal(rng));
        q.normalize();
        const RigidTransform t{q.toRotationMatrix(),
                               Vec3(normal(rng), normal(rng), normal(rng)) * 2.0};
        const ScrewDecomposition dec = transform_to_screw(t);
        const RigidTransform back = screw_to_transform(dec.axis, dec.config);
        worst_roundtrip =
            std::max(worst_roundtrip, (back.matrix() - t.matrix()).cwiseAbs().maxCoeff());
    }

    double worst_line = 0.0;
    for (int rep = 0; rep < 10000; ++rep) {
        Eigen::Quaterniond qa(normal(rng), normal(rng), normal(rng), normal(rng));
        Eigen::Quaterniond qb(normal(rng), normal(rng), normal(rng), normal(rng));
        qa.normalize();
        qb.normalize();
        const RigidTransform a{qa.toRotationMatrix(), Vec3(normal(rng), normal(rng), normal(rng))};
        const RigidTransform b{qb.toRotationMatrix(), Vec3(normal(rng), normal(rng), normal(rng))};
        const Mat6 composed = line_motion_matrix(a.rotation, a.translation) *
                              line_motion_matrix(b.rotation, b.translation);
        const RigidTransform ab = a * b;
        worst_line = std::max(
            worst_line,
            (composed - line_motion_matrix(ab.rotation, ab.translation)).cwiseAbs().maxCoeff());

        Vec3 l(normal(rng), normal(rng), normal(rng));
        l.normalize();
        Vec3 p(normal(rng), normal(rng), normal(rng));
        const PluckerLine moved = transform_line(a, {l, p.cross(l)});
        worst_line = std::max(worst_line, std::abs(moved.l_hat.norm() - 1.0));
        worst_line = std::max(worst_line, std::abs(moved.l_hat.dot(moved.m)));
    }
    const double elapsed = timer.seconds();
    const bool pass = worst_roundtrip <= 1e-9 && worst_line <= 1e-9;
    char detail[96];
    std::snprintf(detail, sizeof(detail), "roundtrip %.1e, line ops %.1e (limits 1e-9)",
                  worst_roundtrip, worst_line);
    report(6, "screw/line geometry", pass, elapsed, detail);
}

// --------------------------------------------------------------------------
// 7. Noiseless recovery: 50 noiseless revolute sequences; MAAD(l) <= 0.05,
//    screw_dist <= 0.01 m, fitted lambda at the cap 50; runtime <= 2 min.
void criterion_7() {
    Timer timer;
    DatasetTemplate tmpl;
    tmpl.categories = {Category::revolute};
    tmpl.n_configs = 15;
    tmpl.shared_axis = true;
    const auto sequences = generate_dataset(tmpl, 50, {}, 1007);
    const Dataset data = observations_of(sequences);

    FitConfig config;
    Rng rng(1007);
    const FitReport fit_report = fit(data, config, rng);

    std::vector<ScrewObservation> predictions(data.size(), fit_report.point_prediction());
    const MetricReport metrics = evaluate(predictions, data);

    const double lambda1 = fit_report.dist.axis_vmf.lambda1;
    const double lambda2 = fit_report.dist.axis_vmf.lambda2;
    const double elapsed = timer.seconds();
    const bool pass = metrics.maad_mean.l <= 0.05 && metrics.screw_mean.dist <= 0.01 &&
                      lambda1 >= kLambdaMax - 1e-6 && lambda2 >= kLambdaMax - 1e-6 &&
                      elapsed <= 120.0;
    char detail[128];
    std::snprintf(detail, sizeof(detail),
                  "maad_l %.2e (0.05) dist %.2e (0.01) lambda (%.1f, %.1f) (cap 50)",
                  metrics.maad_mean.l, metrics.screw_mean.dist, lambda1, lambda2);
    report(7, "noiseless axis recovery", pass, elapsed, detail);
}

// --------------------------------------------------------------------------
// 8. Calibration monotonicity: noise grid {none, 15, 12, 10} with scalar
//    precisions 50 gives strictly decreasing fitted lambda means; <= 10 min.
void criterion_8() {
    Timer timer;
    std::vector<double> recovered;
    for (int gi = 0; gi < 4; ++gi) {
        const double levels[4] = {0.0, 15.0, 12.0, 10.0};
        NoiseSpec noise;
        if (levels[gi] > 0.0) {
            noise.axis_lambda = {levels[gi], levels[gi]};
            noise.scalar = NoiseSpec::ScalarNoise{50.0, 50.0, 50.0};
        }
        DatasetTemplate tmpl;
        tmpl.categories = {Category::revolute};
        tmpl.n_configs = 15;
        tmpl.shared_axis = true;
        const Dataset data = observations_of(generate_dataset(tmpl, 50, noise, 1008 + gi));
        FitConfig config;
        Rng rng(1008 + gi);
        const FitReport fit_report = fit(data, config, rng);
        recovered.push_back(
            0.5 * (fit_report.dist.axis_vmf.lambda1 + fit_report.dist.axis_vmf.lambda2));
    }
    bool strictly_decreasing = true;
    for (std::size_t i = 1; i < recovered.size(); ++i) {
        if (!(recovered[i] < recovered[i - 1])) strictly_decreasing = false;
    }
    const double elapsed = timer.seconds();
    char detail[128];
    std::snprintf(detail, sizeof(detail),
                  "lambda-hat: none %.1f, 15 -> %.1f, 12 -> %.1f, 10 -> %.1f", recovered[0],
                  recovered[1], recovered[2], recovered[3]);
    report(8, "calibration monotonicity", strictly_decreasing && elapsed <= 600.0, elapsed,
           detail);
}

// --------------------------------------------------------------------------
// 9. Baseline defect: on orthogonality-stressed data at matched budgets,
//    vm-SoftOrtho's reconstructed axes have strictly larger mean screw_dist
//    than the joint fit's. The stress is a dispersed axis population: two
//    noisy clusters whose frames differ by a rotation about a direction with
//    components along both l and m, so the population means of the two
//    directions are not an orthogonal pair. A weak penalty (1) keeps the
//    constraint soft; the joint parameterization is orthonormal by
//    construction.
void criterion_9() {
    Timer timer;
    bool pass = true;
    std::string parts;
    for (int scenario = 0; scenario < 3; ++scenario) {
        DatasetTemplate tmpl;
        tmpl.categories = {Category::revolute};
        tmpl.n_configs = 15;
        tmpl.shared_axis = true;
        NoiseSpec noise;
        noise.axis_lambda = {30.0, 30.0};
        noise.scalar = NoiseSpec::ScalarNoise{50.0, 50.0, 50.0};
        const std::uint64_t seed = 1009 + scenario;
        const auto cluster_a = generate_dataset(tmpl, 25, noise, seed);
        const auto clean = generate_dataset(tmpl, 25, {}, seed);
        const ScrewAxis axis_a = clean.front().axis;
        const Vec3 skew_dir = (axis_a.l_hat + axis_a.m_hat).normalized();
        const Mat3 rot = axis_angle_rotation(skew_dir, 80.0 * kPi / 180.0);
        const ScrewAxis axis_b{rot * axis_a.l_hat, rot * axis_a.m_hat, axis_a.m_norm};

        Dataset data, truth;
        for (const auto& seq : cluster_a) {
            data.push_back(seq.observation());
            truth.push_back({axis_a, seq.configs});
        }
        Rng noise_rng(555 + scenario);
        for (const auto& seq : clean) {
            LabeledSequence b = seq;
            b.axis = axis_b;
            const LabeledSequence noisy = inject_noise(b, noise, noise_rng);
            data.push_back(noisy.observation());
            truth.push_back({axis_b, noisy.configs});
        }

        FitConfig config;
        config.ortho_penalty = 1.0;
        Rng rng_a(1), rng_b(1);
        const FitReport joint = fit(data, config, rng_a);
        const FitReport ortho = fit_vm_soft_ortho(data, config, rng_b);

        const double joint_dist =
            evaluate(std::vector<ScrewObservation>(data.size(), joint.point_prediction()),
                     truth)
                .screw_mean.dist;
        const double ortho_dist =
            evaluate(std::vector<ScrewObservation>(data.size(), ortho.point_prediction()),
                     truth)
                .screw_mean.dist;
        pass = pass && ortho_dist > joint_dist;
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.3f>%.3f ", ortho_dist, joint_dist);
        parts += buf;
    }
    const double elapsed = timer.seconds();
    char detail[160];
    std::snprintf(detail, sizeof(detail), "screw_dist vm-SoftOrtho vs joint (m): %s",
                  parts.c_str());
    report(9, "baseline defect ordering", pass, elapsed, detail);
}

// --------------------------------------------------------------------------
// 10. Metric sanity: identical pairs give an all-zero report; parallel axes
//     offset by a constructed amount give screw_dist equal to it to 1e-12.
void criterion_10() {
    Timer timer;
    Rng rng(1010);
    DatasetTemplate tmpl;
    tmpl.n_configs = 4;
    const auto sequences = generate_dataset(tmpl, 5, {}, 1010);
    const Dataset data = observations_of(sequences);
    const MetricReport zeros = evaluate(data, data);
    bool pass = zeros.maad_mean.l == 0.0 && zeros.maad_mean.mhat == 0.0 &&
                zeros.maad_mean.mnorm == 0.0 && zeros.maad_mean.theta == 0.0 &&
                zeros.maad_mean.d == 0.0 && zeros.screw_mean.ang == 0.0 &&
                zeros.screw_mean.dist == 0.0 && zeros.screw_mean.theta_err == 0.0 &&
                zeros.screw_mean.d_err == 0.0;

    double worst = 0.0;
    std::uniform_real_distribution<double> unif(0.01, 2.0);
    for (int rep = 0; rep < 100; ++rep) {
        const double offset = unif(rng);
        const Vec3 l = Vec3::UnitZ();
        const ScrewAxis a{l, orthogonal_unit(l), 0.0};
        const Vec3 p = offset * Vec3::UnitX();
        const Vec3 m = p.cross(l);
        const ScrewAxis b{l, m.normalized(), m.norm()};
        const ScrewObservation oa{a, {{0.1, 0.0}}};
        const ScrewObservation ob{b, {{0.1, 0.0}}};
        worst = std::max(worst, std::abs(screw_loss(oa, ob).dist - offset));
    }
    pass = pass && worst <= 1e-12;
    const double elapsed = timer.seconds();
    char detail[96];
    std::snprintf(detail, sizeof(detail), "offset error %.1e (limit 1e-12)", worst);
    report(10, "metric sanity", pass, elapsed, detail);
}

}  // namespace

int main() {
    std::printf("acceptance suite\n");
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    std::printf("%d of 10 criteria passed\n", 10 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
