#pragma once

#include <string>

#include <json.hpp>

#include "screwdist/estimation.hpp"
#include "screwdist/metrics.hpp"
#include "screwdist/synthetic_data.hpp"

namespace screwdist {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// FNV-1a 64-bit hash of a file's bytes, as a hex string.
std::string fnv1a64_file(const std::string& path);

nlohmann::json sequence_to_json(const LabeledSequence& seq);
LabeledSequence sequence_from_json(const nlohmann::json& j);

/// One JSON object per line; schema: {"version", "id", "category",
/// "axis": {"l", "m_hat", "m_norm"}, "configs": [{"theta", "d"}], "noise",
/// "seed"}; units radians/meters.
void write_dataset_jsonl(const std::string& path, const std::vector<LabeledSequence>& sequences);
std::vector<LabeledSequence> read_dataset_jsonl(const std::string& path);

nlohmann::json fit_report_to_json(const FitReport& report, const std::string& dataset_hash);
FitReport fit_report_from_json(const nlohmann::json& j);
std::string fit_report_dataset_hash(const nlohmann::json& j);

/// CSV with fixed columns: id, maad_l, maad_mhat, maad_mnorm, maad_theta,
/// maad_d, screw_ang, screw_dist, screw_theta_err, screw_d_err; one row per
/// sequence plus a final "mean" row.
std::string metric_report_to_csv(const MetricReport& report);
nlohmann::json metric_report_to_json(const MetricReport& report);

struct RunManifest {
    std::string command;
    nlohmann::json flags;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> inputs;   // path, hash
    std::vector<std::pair<std::string, std::string>> outputs;  // path, hash
    double wall_time_s = 0.0;

    nlohmann::json to_json() const;
    void write(const std::string& path) const;
};

}  // namespace screwdist
