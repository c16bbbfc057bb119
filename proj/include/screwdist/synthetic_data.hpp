#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "screwdist/distributions.hpp"

namespace screwdist {

enum class Category { rigid, revolute, prismatic, helical };

std::string to_string(Category category);
Category category_from_string(const std::string& name);

/// Label corruption: a matrix-vMF draw around the clean axis frame and/or
/// truncated-normal draws around the clean scalars.
struct NoiseSpec {
    struct ScalarNoise {
        double beta_m_norm = 50.0;
        double beta_theta = 50.0;
        double beta_d = 50.0;
    };
    std::optional<std::pair<double, double>> axis_lambda;
    std::optional<ScalarNoise> scalar;

    bool none() const { return !axis_lambda && !scalar; }
};

struct ArticulationSpec {
    Category category = Category::revolute;
    ScrewAxis local_axis{Vec3::UnitZ(), Vec3::UnitX(), 0.0};
    double pitch = 0.0;  // meters per radian, helical only
    std::vector<Configuration> schedule;
    RigidTransform camera_pose;  // object-local frame -> camera frame

    /// Category-consistent schedule: revolute d = 0, prismatic theta = 0,
    /// helical d = pitch * theta, rigid all zero.
    void validate() const;
};

struct LabeledSequence {
    int id = 0;
    ScrewAxis axis;  // ground truth, camera frame
    std::vector<Configuration> configs;
    Category category = Category::revolute;
    NoiseSpec noise;
    std::uint64_t seed = 0;
    ArticulationSpec provenance;

    ScrewObservation observation() const { return {axis, configs}; }
};

/// Camera-frame poses of the moving part: pose 1 at zero configuration, then
/// one pose per schedule entry.
std::vector<RigidTransform> scene_poses(const ArticulationSpec& spec);

LabeledSequence generate_sequence(const ArticulationSpec& spec, Rng& rng);

LabeledSequence inject_noise(const LabeledSequence& seq, const NoiseSpec& noise, Rng& rng);

struct FrustumBounds {
    double x_half = 0.5;
    double y_half = 0.5;
    double z_near = 1.0;
    double z_far = 2.5;
};

struct DatasetTemplate {
    std::vector<Category> categories = {Category::revolute};
    int n_configs = 15;
    FrustumBounds frustum;
    double theta_sweep_min = 0.5;  // total revolute/helical sweep, radians
    double theta_sweep_max = 1.5;
    double d_sweep_min = 0.05;  // total prismatic travel, meters
    double d_sweep_max = 0.30;
    double pitch_min = 0.01;
    double pitch_max = 0.10;
    bool shared_axis = false;   // one axis placement for the whole dataset
    double frame_skip_prob = 0.0;  // chance a step advances by two increments
};

/// Deterministic dataset: per-sequence RNG streams derived from (seed, index),
/// categories balanced round-robin, axis anchors uniform in the frustum box
/// and directions uniform on the sphere.
std::vector<LabeledSequence> generate_dataset(const DatasetTemplate& tmpl, int count,
                                              const NoiseSpec& noise, std::uint64_t seed);

}  // namespace screwdist
