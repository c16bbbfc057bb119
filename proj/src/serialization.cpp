#include "screwdist/serialization.hpp"

#include <fstream>
#include <sstream>

namespace screwdist {

namespace {

nlohmann::json vec3_to_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
Vec3 vec3_from_json(const nlohmann::json& j) {
    return Vec3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}

nlohmann::json mat32_to_json(const Mat32& m) {
    return {{m(0, 0), m(0, 1)}, {m(1, 0), m(1, 1)}, {m(2, 0), m(2, 1)}};
}

nlohmann::json noise_to_json(const NoiseSpec& noise) {
    if (noise.none()) return nullptr;
    nlohmann::json j;
    if (noise.axis_lambda) {
        j["axis_lambda"] = {noise.axis_lambda->first, noise.axis_lambda->second};
    } else {
        j["axis_lambda"] = nullptr;
    }
    if (noise.scalar) {
        j["scalar"] = {{"beta_m_norm", noise.scalar->beta_m_norm},
                       {"beta_theta", noise.scalar->beta_theta},
                       {"beta_d", noise.scalar->beta_d}};
    } else {
        j["scalar"] = nullptr;
    }
    return j;
}

NoiseSpec noise_from_json(const nlohmann::json& j) {
    NoiseSpec noise;
    if (j.is_null()) return noise;
    if (j.contains("axis_lambda") && !j.at("axis_lambda").is_null()) {
        noise.axis_lambda = {j.at("axis_lambda").at(0), j.at("axis_lambda").at(1)};
    }
    if (j.contains("scalar") && !j.at("scalar").is_null()) {
        const auto& s = j.at("scalar");
        noise.scalar = NoiseSpec::ScalarNoise{s.at("beta_m_norm"), s.at("beta_theta"),
                                              s.at("beta_d")};
    }
    return noise;
}

nlohmann::json truncnorm_to_json(const TruncatedNormalParams& p) {
    return {{"mu", p.mu}, {"precision", p.precision}};
}

TruncatedNormalParams truncnorm_from_json(const nlohmann::json& j) {
    return {j.at("mu"), j.at("precision")};
}

}  // namespace

std::string fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file for hashing: " + path);
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    char buffer[1 << 14];
    while (in.read(buffer, sizeof(buffer)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            hash ^= static_cast<unsigned char>(buffer[i]);
            hash *= 0x100000001b3ULL;
        }
        if (!in) break;
    }
    std::ostringstream out;
    out << std::hex << hash;
    return out.str();
}

nlohmann::json sequence_to_json(const LabeledSequence& seq) {
    nlohmann::json configs = nlohmann::json::array();
    for (const Configuration& q : seq.configs) {
        configs.push_back({{"theta", q.theta}, {"d", q.d}});
    }
    return {{"version", kSchemaVersion},
            {"id", seq.id},
            {"category", to_string(seq.category)},
            {"axis",
             {{"l", vec3_to_json(seq.axis.l_hat)},
              {"m_hat", vec3_to_json(seq.axis.m_hat)},
              {"m_norm", seq.axis.m_norm}}},
            {"configs", configs},
            {"noise", noise_to_json(seq.noise)},
            {"seed", seq.seed}};
}

LabeledSequence sequence_from_json(const nlohmann::json& j) {
    if (j.at("version").get<int>() != kSchemaVersion) {
        throw DataError("unsupported dataset schema version");
    }
    LabeledSequence seq;
    seq.id = j.at("id");
    seq.category = category_from_string(j.at("category"));
    const auto& axis = j.at("axis");
    seq.axis = {vec3_from_json(axis.at("l")), vec3_from_json(axis.at("m_hat")),
                axis.at("m_norm")};
    for (const auto& q : j.at("configs")) {
        seq.configs.push_back({q.at("theta"), q.at("d")});
    }
    seq.noise = noise_from_json(j.at("noise"));
    seq.seed = j.at("seed");
    return seq;
}

void write_dataset_jsonl(const std::string& path, const std::vector<LabeledSequence>& sequences) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open dataset for writing: " + path);
    for (const LabeledSequence& seq : sequences) out << sequence_to_json(seq).dump() << "\n";
}

std::vector<LabeledSequence> read_dataset_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset: " + path);
    std::vector<LabeledSequence> sequences;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            sequences.push_back(sequence_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw DataError("bad dataset line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (sequences.empty()) throw DataError("dataset is empty: " + path);
    return sequences;
}

nlohmann::json fit_report_to_json(const FitReport& report, const std::string& dataset_hash) {
    nlohmann::json j;
    j["version"] = kSchemaVersion;
    j["tool_version"] = kToolVersion;
    j["method"] = report.method;
    j["dataset_hash"] = dataset_hash;
    j["non_convergence"] = report.non_convergence;
    j["final_nll"] = report.final_nll;
    j["nll_trace"] = report.nll_trace;
    j["stage_converged"] = report.stage_converged;
    j["stage_final_grad_norm"] = report.stage_final_grad_norm;
    j["raw"] = report.raw;

    if (report.soft_ortho) {
        const SoftOrthoParams& p = *report.soft_ortho;
        j["params"] = {{"l", {{"mu", vec3_to_json(p.l.mu)}, {"kappa", p.l.kappa}}},
                       {"m", {{"mu", vec3_to_json(p.m.mu)}, {"kappa", p.m.kappa}}},
                       {"m_norm", truncnorm_to_json(p.m_norm)},
                       {"theta_means", p.theta_means},
                       {"theta_precision", p.theta_precision},
                       {"d_means", p.d_means},
                       {"d_precision", p.d_precision}};
    } else {
        const JointScrewDistribution& d = report.dist;
        const auto [gauge_gamma, gauge_omega] = mvmf_canonical_gauge(d.axis_vmf);
        j["params"] = {{"axis_vmf",
                        {{"alpha", d.axis_vmf.alpha},
                         {"beta", d.axis_vmf.beta},
                         {"gamma", d.axis_vmf.gamma},
                         {"omega", d.axis_vmf.omega},
                         {"lambda1", d.axis_vmf.lambda1},
                         {"lambda2", d.axis_vmf.lambda2},
                         {"mode", mat32_to_json(mvmf_mode(d.axis_vmf))},
                         {"gauge_gamma", mat32_to_json(gauge_gamma)}}},
                       {"m_norm", truncnorm_to_json(d.m_norm)},
                       {"theta_means", d.theta_means},
                       {"theta_precision", d.theta_precision},
                       {"d_means", d.d_means},
                       {"d_precision", d.d_precision}};
        (void)gauge_omega;
        if (report.f_direct) j["params"]["f_matrix"] = mat32_to_json(*report.f_direct);
    }
    return j;
}

FitReport fit_report_from_json(const nlohmann::json& j) {
    if (j.at("version").get<int>() != kSchemaVersion) {
        throw DataError("unsupported fit report schema version");
    }
    FitReport report;
    report.method = j.at("method");
    report.non_convergence = j.at("non_convergence");
    report.final_nll = j.at("final_nll");
    report.nll_trace = j.at("nll_trace").get<std::vector<std::vector<double>>>();
    report.stage_converged = j.at("stage_converged").get<std::vector<bool>>();
    report.stage_final_grad_norm = j.at("stage_final_grad_norm").get<std::vector<double>>();
    report.raw = j.at("raw").get<std::vector<double>>();

    const auto& params = j.at("params");
    if (report.method == "vm-soft-ortho") {
        SoftOrthoParams p;
        p.l = {vec3_from_json(params.at("l").at("mu")), params.at("l").at("kappa")};
        p.m = {vec3_from_json(params.at("m").at("mu")), params.at("m").at("kappa")};
        p.m_norm = truncnorm_from_json(params.at("m_norm"));
        p.theta_means = params.at("theta_means").get<std::vector<double>>();
        p.theta_precision = params.at("theta_precision");
        p.d_means = params.at("d_means").get<std::vector<double>>();
        p.d_precision = params.at("d_precision");
        report.soft_ortho = std::move(p);
    } else {
        const auto& vmf = params.at("axis_vmf");
        report.dist.axis_vmf.alpha = vmf.at("alpha");
        report.dist.axis_vmf.beta = vmf.at("beta");
        report.dist.axis_vmf.gamma = vmf.at("gamma");
        report.dist.axis_vmf.omega = vmf.at("omega");
        report.dist.axis_vmf.lambda1 = vmf.at("lambda1");
        report.dist.axis_vmf.lambda2 = vmf.at("lambda2");
        report.dist.m_norm = truncnorm_from_json(params.at("m_norm"));
        report.dist.theta_means = params.at("theta_means").get<std::vector<double>>();
        report.dist.theta_precision = params.at("theta_precision");
        report.dist.d_means = params.at("d_means").get<std::vector<double>>();
        report.dist.d_precision = params.at("d_precision");
        if (params.contains("f_matrix")) {
            const auto& fm = params.at("f_matrix");
            Mat32 f;
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 2; ++c) f(r, c) = fm.at(r).at(c);
            report.f_direct = f;
        }
    }
    return report;
}

std::string fit_report_dataset_hash(const nlohmann::json& j) {
    return j.at("dataset_hash").get<std::string>();
}

std::string metric_report_to_csv(const MetricReport& report) {
    std::ostringstream out;
    out.precision(17);
    out << "id,maad_l,maad_mhat,maad_mnorm,maad_theta,maad_d,"
           "screw_ang,screw_dist,screw_theta_err,screw_d_err\n";
    auto row = [&](const std::string& id, const MaadComponents& m, const ScrewLossComponents& s) {
        out << id << ',' << m.l << ',' << m.mhat << ',' << m.mnorm << ',' << m.theta << ','
            << m.d << ',' << s.ang << ',' << s.dist << ',' << s.theta_err << ',' << s.d_err
            << "\n";
    };
    for (const SequenceMetrics& m : report.per_sequence) {
        row(std::to_string(m.id), m.maad, m.screw);
    }
    row("mean", report.maad_mean, report.screw_mean);
    return out.str();
}

nlohmann::json metric_report_to_json(const MetricReport& report) {
    auto maad_json = [](const MaadComponents& m) {
        return nlohmann::json{
            {"l", m.l}, {"mhat", m.mhat}, {"mnorm", m.mnorm}, {"theta", m.theta}, {"d", m.d}};
    };
    auto screw_json = [](const ScrewLossComponents& s) {
        return nlohmann::json{
            {"ang", s.ang}, {"dist", s.dist}, {"theta_err", s.theta_err}, {"d_err", s.d_err}};
    };
    nlohmann::json per = nlohmann::json::array();
    for (const SequenceMetrics& m : report.per_sequence) {
        per.push_back({{"id", m.id}, {"maad", maad_json(m.maad)}, {"screw", screw_json(m.screw)}});
    }
    return {{"version", kSchemaVersion},
            {"reference_point", report.reference_point},
            {"per_sequence", per},
            {"mean", {{"maad", maad_json(report.maad_mean)}, {"screw", screw_json(report.screw_mean)}}}};
}

nlohmann::json RunManifest::to_json() const {
    auto files = [](const std::vector<std::pair<std::string, std::string>>& v) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& [path, hash] : v) arr.push_back({{"path", path}, {"fnv64", hash}});
        return arr;
    };
    return {{"version", kSchemaVersion}, {"tool_version", kToolVersion},
            {"command", command},        {"flags", flags},
            {"seed", seed},              {"inputs", files(inputs)},
            {"outputs", files(outputs)}, {"wall_time_s", wall_time_s}};
}

void RunManifest::write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write manifest: " + path);
    out << to_json().dump(2) << "\n";
}

}  // namespace screwdist
