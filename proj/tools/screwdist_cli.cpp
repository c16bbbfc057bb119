// Command-line front end: dataset generation, fitting, evaluation, the
// calibration sweep, and sampler dumps. Exit codes: 0 success, 2 usage,
// 3 data error, 4 non-convergence.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "screwdist/serialization.hpp"

namespace sd = screwdist;

namespace {

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

sd::FitConfig make_fit_config(const std::string& stage_budget, double step, double tol,
                              double penalty, int n_configs) {
    sd::FitConfig config;
    if (!stage_budget.empty()) {
        std::vector<int> budgets;
        std::stringstream ss(stage_budget);
        std::string tok;
        while (std::getline(ss, tok, ',')) budgets.push_back(std::stoi(tok));
        if (budgets.size() != config.stages.size()) {
            throw CLI::ValidationError("--stage-budget", "expected three comma-separated budgets");
        }
        int total = 0;
        for (std::size_t i = 0; i < budgets.size(); ++i) {
            if (budgets[i] < 0) throw CLI::ValidationError("--stage-budget", "must be >= 0");
            config.stages[i].max_iters = budgets[i];
            total += budgets[i];
        }
        if (total == 0) throw CLI::ValidationError("--stage-budget", "all budgets are zero");
    }
    config.step_size = step;
    config.tol = tol;
    config.ortho_penalty = penalty;
    config.n_configs = n_configs;
    return config;
}

sd::FitReport run_fit(const std::string& method, const sd::Dataset& data,
                      const sd::FitConfig& config, sd::Rng& rng) {
    if (method == "dustnet") return sd::fit(data, config, rng);
    if (method == "vm-soft-ortho") return sd::fit_vm_soft_ortho(data, config, rng);
    if (method == "direct-f") return sd::fit_direct_f(data, config, rng);
    throw CLI::ValidationError("--method", "unknown method " + method);
}

int cmd_generate(const std::string& out_path, const std::string& category, int count,
                 std::uint64_t seed, int n_configs, double noise_lambda, double noise_beta,
                 bool shared_axis, double frame_skip, double pitch) {
    Timer timer;
    sd::DatasetTemplate tmpl;
    if (category == "mixed") {
        tmpl.categories = {sd::Category::revolute, sd::Category::prismatic,
                           sd::Category::helical, sd::Category::rigid};
    } else {
        tmpl.categories = {sd::category_from_string(category)};
    }
    if (pitch > 0.0) {
        if (category != "helical") {
            throw CLI::ValidationError("--pitch", "only valid for the helical category");
        }
        tmpl.pitch_min = tmpl.pitch_max = pitch;
    }
    tmpl.n_configs = n_configs;
    tmpl.shared_axis = shared_axis;
    tmpl.frame_skip_prob = frame_skip;

    sd::NoiseSpec noise;
    if (noise_lambda > 0.0) {
        noise.axis_lambda = {noise_lambda, noise_lambda};
        noise.scalar = sd::NoiseSpec::ScalarNoise{noise_beta, noise_beta, noise_beta};
    } else if (noise_beta > 0.0) {
        noise.scalar = sd::NoiseSpec::ScalarNoise{noise_beta, noise_beta, noise_beta};
    }

    const auto sequences = sd::generate_dataset(tmpl, count, noise, seed);
    sd::write_dataset_jsonl(out_path, sequences);

    sd::RunManifest manifest;
    manifest.command = "generate";
    manifest.seed = seed;
    manifest.flags = {{"category", category},        {"count", count},
                      {"n_configs", n_configs},      {"noise_lambda", noise_lambda},
                      {"noise_beta", noise_beta},    {"shared_axis", shared_axis},
                      {"frame_skip_prob", frame_skip}, {"pitch", pitch},
                      {"theta_wrap", "modulo_2pi"}};
    manifest.outputs = {{out_path, sd::fnv1a64_file(out_path)}};
    manifest.wall_time_s = timer.seconds();
    manifest.write(out_path + ".manifest.json");
    std::cout << "wrote " << sequences.size() << " sequences to " << out_path << "\n";
    return 0;
}

int cmd_fit(const std::string& dataset_path, const std::string& out_path,
            const std::string& method, const std::string& stage_budget, double step, double tol,
            double penalty, std::uint64_t seed) {
    Timer timer;
    const auto sequences = sd::read_dataset_jsonl(dataset_path);
    sd::Dataset data;
    for (const auto& seq : sequences) data.push_back(seq.observation());
    const int n_configs = static_cast<int>(data.front().configs.size());

    const sd::FitConfig config = make_fit_config(stage_budget, step, tol, penalty, n_configs);
    sd::Rng rng(seed);
    const sd::FitReport report = run_fit(method, data, config, rng);

    const std::string dataset_hash = sd::fnv1a64_file(dataset_path);
    std::ofstream out(out_path);
    if (!out) throw sd::DataError("cannot write fit report: " + out_path);
    out << sd::fit_report_to_json(report, dataset_hash).dump(2) << "\n";
    out.close();

    sd::RunManifest manifest;
    manifest.command = "fit";
    manifest.seed = seed;
    manifest.flags = {{"method", method}, {"stage_budget", stage_budget},
                      {"step", step},     {"tol", tol},
                      {"penalty", penalty}};
    manifest.inputs = {{dataset_path, dataset_hash}};
    manifest.outputs = {{out_path, sd::fnv1a64_file(out_path)}};
    manifest.wall_time_s = timer.seconds();
    manifest.write(out_path + ".manifest.json");

    std::cout << "method " << method << " final NLL " << report.final_nll
              << (report.non_convergence ? " (did not converge)" : "") << "\n";
    return report.non_convergence ? 4 : 0;
}

int cmd_eval(const std::string& dataset_path, const std::string& report_path,
             const std::string& out_prefix, const std::string& format) {
    Timer timer;
    const auto sequences = sd::read_dataset_jsonl(dataset_path);

    std::ifstream in(report_path);
    if (!in) throw sd::DataError("cannot open fit report: " + report_path);
    nlohmann::json report_json;
    in >> report_json;
    const std::string recorded_hash = sd::fit_report_dataset_hash(report_json);
    const std::string actual_hash = sd::fnv1a64_file(dataset_path);
    if (recorded_hash != actual_hash) {
        throw sd::DataError("dataset/report pairing mismatch: report was fitted on " +
                            recorded_hash + ", dataset hashes to " + actual_hash);
    }
    const sd::FitReport report = sd::fit_report_from_json(report_json);

    const sd::ScrewObservation prediction = report.point_prediction();
    std::vector<sd::ScrewObservation> predictions(sequences.size(), prediction);
    std::vector<sd::ScrewObservation> labels;
    for (const auto& seq : sequences) labels.push_back(seq.observation());
    const sd::MetricReport metrics = sd::evaluate(predictions, labels);

    sd::RunManifest manifest;
    manifest.command = "eval";
    manifest.flags = {{"format", format}};
    manifest.inputs = {{dataset_path, actual_hash}, {report_path, sd::fnv1a64_file(report_path)}};
    if (format == "csv" || format == "both") {
        const std::string path = out_prefix + ".csv";
        std::ofstream out(path);
        if (!out) throw sd::DataError("cannot write metrics: " + path);
        out << sd::metric_report_to_csv(metrics);
        out.close();
        manifest.outputs.push_back({path, sd::fnv1a64_file(path)});
    }
    if (format == "json" || format == "both") {
        const std::string path = out_prefix + ".json";
        std::ofstream out(path);
        if (!out) throw sd::DataError("cannot write metrics: " + path);
        out << sd::metric_report_to_json(metrics).dump(2) << "\n";
        out.close();
        manifest.outputs.push_back({path, sd::fnv1a64_file(path)});
    }
    manifest.wall_time_s = timer.seconds();
    manifest.write(out_prefix + ".manifest.json");

    std::cout << "maad_l " << metrics.maad_mean.l << " screw_dist " << metrics.screw_mean.dist
              << "\n";
    return 0;
}

int cmd_calibrate(const std::string& out_path, const std::string& grid_spec, double beta,
                  int count, std::uint64_t seed, const std::string& method,
                  const std::string& stage_budget, double step, double tol, double penalty,
                  int n_configs) {
    Timer timer;
    std::vector<std::string> grid;
    std::stringstream ss(grid_spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) grid.push_back(tok);
    if (grid.empty()) throw CLI::ValidationError("--grid", "empty noise grid");

    std::ostringstream csv;
    csv.precision(17);
    csv << "noise_label,lambda_noise,beta_noise,lambda1_hat,lambda2_hat,lambda_mean_hat,"
           "beta_m_hat,beta_theta_hat,beta_d_hat,converged\n";

    bool any_nonconverged = false;
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        sd::NoiseSpec noise;
        double lambda_noise = 0.0;
        if (grid[gi] != "none") {
            lambda_noise = std::stod(grid[gi]);
            if (lambda_noise <= 0.0) throw CLI::ValidationError("--grid", "lambda must be > 0");
            noise.axis_lambda = {lambda_noise, lambda_noise};
            noise.scalar = sd::NoiseSpec::ScalarNoise{beta, beta, beta};
        }

        sd::DatasetTemplate tmpl;
        tmpl.categories = {sd::Category::revolute};
        tmpl.n_configs = n_configs;
        tmpl.shared_axis = true;
        const auto sequences = sd::generate_dataset(tmpl, count, noise, seed + gi);
        sd::Dataset data;
        for (const auto& seq : sequences) data.push_back(seq.observation());

        const sd::FitConfig config = make_fit_config(stage_budget, step, tol, penalty, n_configs);
        sd::Rng rng(seed + gi);
        const sd::FitReport report = run_fit(method, data, config, rng);
        any_nonconverged = any_nonconverged || report.non_convergence;

        const auto& d = report.dist;
        csv << grid[gi] << ',' << lambda_noise << ',' << (grid[gi] == "none" ? 0.0 : beta) << ','
            << d.axis_vmf.lambda1 << ',' << d.axis_vmf.lambda2 << ','
            << 0.5 * (d.axis_vmf.lambda1 + d.axis_vmf.lambda2) << ',' << d.m_norm.precision << ','
            << d.theta_precision << ',' << d.d_precision << ','
            << (report.non_convergence ? 0 : 1) << "\n";
    }

    std::ofstream out(out_path);
    if (!out) throw sd::DataError("cannot write calibration table: " + out_path);
    out << csv.str();
    out.close();

    sd::RunManifest manifest;
    manifest.command = "calibrate";
    manifest.seed = seed;
    manifest.flags = {{"grid", grid_spec}, {"beta", beta},     {"count", count},
                      {"method", method},  {"stage_budget", stage_budget},
                      {"step", step},      {"tol", tol}};
    manifest.outputs = {{out_path, sd::fnv1a64_file(out_path)}};
    manifest.wall_time_s = timer.seconds();
    manifest.write(out_path + ".manifest.json");

    std::cout << "calibration table written to " << out_path << "\n";
    return any_nonconverged ? 4 : 0;
}

int cmd_sample(const std::string& out_path, int count, std::uint64_t seed, double lambda1,
               double lambda2, double mu, double precision) {
    if (count < 0) throw CLI::ValidationError("--count", "must be >= 0");
    if (lambda1 < lambda2 || lambda2 < 0.0 || lambda1 > sd::kLambdaMax) {
        throw CLI::ValidationError("--lambda1/--lambda2",
                                   "need lambda1 >= lambda2 >= 0 and lambda1 <= 50");
    }
    Timer timer;
    sd::Rng rng(seed);
    sd::MatrixVMFParams params;
    params.lambda1 = lambda1;
    params.lambda2 = lambda2;
    const auto draws = sd::mvmf_sample(params, rng, count);
    const sd::TruncatedNormalParams tn{mu, precision};

    std::ofstream out(out_path);
    if (!out) throw sd::DataError("cannot write samples: " + out_path);
    for (const auto& x : draws) {
        nlohmann::json line = {
            {"x", {{x(0, 0), x(0, 1)}, {x(1, 0), x(1, 1)}, {x(2, 0), x(2, 1)}}},
            {"m_norm", sd::truncnorm_sample(tn, rng)}};
        out << line.dump() << "\n";
    }
    out.close();

    sd::RunManifest manifest;
    manifest.command = "sample";
    manifest.seed = seed;
    manifest.flags = {{"count", count}, {"lambda1", lambda1}, {"lambda2", lambda2},
                      {"mu", mu},       {"precision", precision}};
    manifest.outputs = {{out_path, sd::fnv1a64_file(out_path)}};
    manifest.wall_time_s = timer.seconds();
    manifest.write(out_path + ".manifest.json");
    std::cout << "wrote " << draws.size() << " draws to " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Distributions over screw transformations: synthetic data, fitting, metrics"};
    app.require_subcommand(1);

    // generate
    auto* generate = app.add_subcommand("generate", "Generate a labeled dataset (JSONL)");
    std::string g_out = "dataset.jsonl", g_category = "revolute";
    int g_count = 50, g_nconfigs = 15;
    std::uint64_t g_seed = 0;
    double g_noise_lambda = 0.0, g_noise_beta = 0.0, g_frame_skip = 0.0, g_pitch = 0.0;
    bool g_shared_axis = false;
    generate->add_option("--out", g_out, "Output JSONL path");
    generate->add_option("--category", g_category,
                         "rigid, revolute, prismatic, helical, or mixed");
    generate->add_option("--count", g_count, "Number of sequences")->check(CLI::PositiveNumber);
    generate->add_option("--seed", g_seed, "RNG seed");
    generate->add_option("--n-configs", g_nconfigs, "Configurations per sequence (n-1)")
        ->check(CLI::PositiveNumber);
    generate->add_option("--noise-lambda", g_noise_lambda,
                         "Axis noise concentration (0 = no axis noise)");
    generate->add_option("--noise-beta", g_noise_beta,
                         "Scalar noise precision (0 = no scalar noise)");
    generate->add_flag("--shared-axis", g_shared_axis, "One axis placement for all sequences");
    generate->add_option("--frame-skip-prob", g_frame_skip, "Random frame skipping probability");
    generate->add_option("--pitch", g_pitch, "Fixed pitch, helical only (m/rad)");

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "Fit a distribution to a dataset");
    std::string f_dataset, f_out = "fit.json", f_method = "dustnet", f_budget;
    double f_step = 0.05, f_tol = 1e-10, f_penalty = 100.0;
    std::uint64_t f_seed = 0;
    fit_cmd->add_option("--dataset", f_dataset, "Input JSONL dataset")->required();
    fit_cmd->add_option("--out", f_out, "Output fit report (JSON)");
    fit_cmd->add_option("--method", f_method, "dustnet, vm-soft-ortho, or direct-f")
        ->check(CLI::IsMember({"dustnet", "vm-soft-ortho", "direct-f"}));
    fit_cmd->add_option("--stage-budget", f_budget, "Three comma-separated iteration budgets");
    fit_cmd->add_option("--step", f_step, "Optimizer step size");
    fit_cmd->add_option("--tol", f_tol, "NLL improvement tolerance");
    fit_cmd->add_option("--penalty", f_penalty, "vm-SoftOrtho orthogonality weight");
    fit_cmd->add_option("--seed", f_seed, "RNG seed");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a fit report against a dataset");
    std::string e_dataset, e_report, e_prefix = "metrics", e_format = "both";
    eval_cmd->add_option("--dataset", e_dataset, "Input JSONL dataset")->required();
    eval_cmd->add_option("--report", e_report, "Fit report (JSON)")->required();
    eval_cmd->add_option("--out-prefix", e_prefix, "Output prefix for .csv/.json");
    eval_cmd->add_option("--format", e_format, "csv, json, or both")
        ->check(CLI::IsMember({"csv", "json", "both"}));

    // calibrate
    auto* cal = app.add_subcommand("calibrate", "Noise sweep: generate, fit, tabulate");
    std::string c_out = "calibration.csv", c_grid = "none,15,12,10", c_method = "dustnet",
                c_budget;
    double c_beta = 50.0, c_step = 0.05, c_tol = 1e-10, c_penalty = 100.0;
    int c_count = 50, c_nconfigs = 15;
    std::uint64_t c_seed = 0;
    cal->add_option("--out", c_out, "Output CSV path");
    cal->add_option("--grid", c_grid, "Comma list of noise levels ('none' or lambda)");
    cal->add_option("--beta", c_beta, "Scalar noise precision for noisy grid points");
    cal->add_option("--count", c_count, "Sequences per grid point")->check(CLI::PositiveNumber);
    cal->add_option("--n-configs", c_nconfigs, "Configurations per sequence")
        ->check(CLI::PositiveNumber);
    cal->add_option("--seed", c_seed, "RNG seed");
    cal->add_option("--method", c_method, "Fit method")
        ->check(CLI::IsMember({"dustnet", "vm-soft-ortho", "direct-f"}));
    cal->add_option("--stage-budget", c_budget, "Three comma-separated iteration budgets");
    cal->add_option("--step", c_step, "Optimizer step size");
    cal->add_option("--tol", c_tol, "NLL improvement tolerance");
    cal->add_option("--penalty", c_penalty, "vm-SoftOrtho orthogonality weight");

    // sample
    auto* sample = app.add_subcommand("sample", "Dump draws from the distributions");
    std::string s_out = "samples.jsonl";
    int s_count = 100;
    std::uint64_t s_seed = 0;
    double s_l1 = 0.0, s_l2 = 0.0, s_mu = 1.0, s_precision = 1.0;
    sample->add_option("--out", s_out, "Output JSONL path");
    sample->add_option("--count", s_count, "Number of draws");
    sample->add_option("--seed", s_seed, "RNG seed");
    sample->add_option("--lambda1", s_l1, "Matrix vMF singular value 1");
    sample->add_option("--lambda2", s_l2, "Matrix vMF singular value 2");
    sample->add_option("--mu", s_mu, "Truncated normal location");
    sample->add_option("--precision", s_precision, "Truncated normal precision");

    try {
        app.parse(argc, argv);
        if (generate->parsed()) {
            return cmd_generate(g_out, g_category, g_count, g_seed, g_nconfigs, g_noise_lambda,
                                g_noise_beta, g_shared_axis, g_frame_skip, g_pitch);
        }
        if (fit_cmd->parsed()) {
            return cmd_fit(f_dataset, f_out, f_method, f_budget, f_step, f_tol, f_penalty,
                           f_seed);
        }
        if (eval_cmd->parsed()) return cmd_eval(e_dataset, e_report, e_prefix, e_format);
        if (cal->parsed()) {
            return cmd_calibrate(c_out, c_grid, c_beta, c_count, c_seed, c_method, c_budget,
                                 c_step, c_tol, c_penalty, c_nconfigs);
        }
        if (sample->parsed()) {
            return cmd_sample(s_out, s_count, s_seed, s_l1, s_l2, s_mu, s_precision);
        }
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const sd::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
