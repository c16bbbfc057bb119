#include "screwdist/synthetic_data.hpp"

#include <cmath>
#include <numbers>

namespace screwdist {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng stream_rng(std::uint64_t seed, std::uint64_t index) {
    return Rng(splitmix64(seed ^ splitmix64(index + 1)));
}

double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vec3 uniform_sphere(Rng& rng) {
    const double z = uniform(rng, -1.0, 1.0);
    const double phi = uniform(rng, 0.0, kTwoPi);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {r * std::cos(phi), r * std::sin(phi), z};
}

}  // namespace

std::string to_string(Category category) {
    switch (category) {
        case Category::rigid: return "rigid";
        case Category::revolute: return "revolute";
        case Category::prismatic: return "prismatic";
        case Category::helical: return "helical";
    }
    return "unknown";
}

Category category_from_string(const std::string& name) {
    if (name == "rigid") return Category::rigid;
    if (name == "revolute") return Category::revolute;
    if (name == "prismatic") return Category::prismatic;
    if (name == "helical") return Category::helical;
    throw std::invalid_argument("unknown articulation category: " + name);
}

void ArticulationSpec::validate() const {
    if (!local_axis.valid(1e-9)) throw std::invalid_argument("articulation axis invalid");
    if (!camera_pose.valid(1e-9)) throw std::invalid_argument("camera pose invalid");
    for (const Configuration& q : schedule) {
        if (q.theta < 0.0 || q.theta >= kTwoPi || q.d < 0.0) {
            throw std::invalid_argument("schedule outside canonical ranges");
        }
        switch (category) {
            case Category::rigid:
                if (q.theta != 0.0 || q.d != 0.0)
                    throw std::invalid_argument("rigid schedule must be all zero");
                break;
            case Category::revolute:
                if (q.d != 0.0) throw std::invalid_argument("revolute schedule must have d = 0");
                break;
            case Category::prismatic:
                if (q.theta != 0.0)
                    throw std::invalid_argument("prismatic schedule must have theta = 0");
                break;
            case Category::helical:
                if (std::abs(q.d - pitch * q.theta) > 1e-9)
                    throw std::invalid_argument("helical schedule must satisfy d = pitch * theta");
                break;
        }
    }
}

std::vector<RigidTransform> scene_poses(const ArticulationSpec& spec) {
    spec.validate();
    std::vector<RigidTransform> poses;
    poses.reserve(spec.schedule.size() + 1);
    poses.push_back(spec.camera_pose);
    for (const Configuration& q : spec.schedule) {
        poses.push_back(spec.camera_pose * screw_to_transform(spec.local_axis, q));
    }
    return poses;
}

LabeledSequence generate_sequence(const ArticulationSpec& spec, Rng& rng) {
    (void)rng;
    spec.validate();
    LabeledSequence seq;
    seq.category = spec.category;
    seq.provenance = spec;
    seq.configs = spec.schedule;

    ScrewAxis axis = transform_axis(spec.camera_pose, spec.local_axis);
    if (spec.category == Category::prismatic) {
        // The line position is unidentifiable for pure translation; the label
        // uses the canonical zero-moment member.
        axis = {axis.l_hat, orthogonal_unit(axis.l_hat), 0.0};
    }
    seq.axis = axis;
    return seq;
}

LabeledSequence inject_noise(const LabeledSequence& seq, const NoiseSpec& noise, Rng& rng) {
    LabeledSequence out = seq;
    out.noise = noise;
    if (noise.none()) return out;

    if (noise.axis_lambda) {
        const auto [l1, l2] = *noise.axis_lambda;
        if (l1 <= 0.0 || l2 <= 0.0) throw std::invalid_argument("axis noise must be positive");
        const MatrixVMFParams params =
            MatrixVMFParams::from_mode(seq.axis.stiefel_point(), l1, l2);
        const Mat32 draw = mvmf_sample(params, rng, 1).front();
        out.axis.l_hat = draw.col(0);
        out.axis.m_hat = draw.col(1);
    }
    if (noise.scalar) {
        if (noise.scalar->beta_m_norm <= 0.0 || noise.scalar->beta_theta <= 0.0 ||
            noise.scalar->beta_d <= 0.0) {
            throw std::invalid_argument("scalar noise precisions must be positive");
        }
        out.axis.m_norm =
            truncnorm_sample({seq.axis.m_norm, noise.scalar->beta_m_norm}, rng);
        for (std::size_t i = 0; i < out.configs.size(); ++i) {
            double theta =
                truncnorm_sample({seq.configs[i].theta, noise.scalar->beta_theta}, rng);
            theta = std::fmod(theta, kTwoPi);  // canonical range
            const double d = truncnorm_sample({seq.configs[i].d, noise.scalar->beta_d}, rng);
            out.configs[i] = {theta, d};
        }
    }
    return out;
}

namespace {

ArticulationSpec sample_spec(const DatasetTemplate& tmpl, Category category, Rng& axis_rng,
                             Rng& rng) {
    ArticulationSpec spec;
    spec.category = category;

    // Axis placement: anchor uniform in the frustum box, direction uniform on
    // the sphere; the object pose carries the local z axis onto that line.
    const Vec3 anchor{uniform(axis_rng, -tmpl.frustum.x_half, tmpl.frustum.x_half),
                      uniform(axis_rng, -tmpl.frustum.y_half, tmpl.frustum.y_half),
                      uniform(axis_rng, tmpl.frustum.z_near, tmpl.frustum.z_far)};
    const Vec3 direction = uniform_sphere(axis_rng);
    const double roll = uniform(axis_rng, 0.0, kTwoPi);

    const Vec3 x0 = orthogonal_unit(direction);
    Mat3 basis;
    basis.col(0) = x0;
    basis.col(1) = direction.cross(x0);
    basis.col(2) = direction;
    spec.camera_pose.rotation = basis * axis_angle_rotation(Vec3::UnitZ(), roll);
    spec.camera_pose.translation = anchor;
    spec.local_axis = {Vec3::UnitZ(), orthogonal_unit(Vec3::UnitZ()), 0.0};

    const int n = tmpl.n_configs;
    double theta_total = 0.0, d_total = 0.0;
    switch (category) {
        case Category::rigid: break;
        case Category::revolute:
            theta_total = uniform(rng, tmpl.theta_sweep_min, tmpl.theta_sweep_max);
            break;
        case Category::prismatic:
            d_total = uniform(rng, tmpl.d_sweep_min, tmpl.d_sweep_max);
            break;
        case Category::helical:
            theta_total = uniform(rng, tmpl.theta_sweep_min, tmpl.theta_sweep_max);
            spec.pitch = uniform(rng, tmpl.pitch_min, tmpl.pitch_max);
            break;
    }

    // Monotone schedule; frame skipping doubles an increment now and then.
    std::vector<double> fractions(n);
    double units = 0.0;
    for (int i = 0; i < n; ++i) {
        units += (tmpl.frame_skip_prob > 0.0 && uniform(rng, 0.0, 1.0) < tmpl.frame_skip_prob)
                     ? 2.0
                     : 1.0;
        fractions[i] = units;
    }
    for (int i = 0; i < n; ++i) fractions[i] /= units;

    spec.schedule.resize(n);
    for (int i = 0; i < n; ++i) {
        switch (category) {
            case Category::rigid: spec.schedule[i] = {0.0, 0.0}; break;
            case Category::revolute: spec.schedule[i] = {theta_total * fractions[i], 0.0}; break;
            case Category::prismatic: spec.schedule[i] = {0.0, d_total * fractions[i]}; break;
            case Category::helical: {
                const double theta = theta_total * fractions[i];
                spec.schedule[i] = {theta, spec.pitch * theta};
                break;
            }
        }
    }
    return spec;
}

}  // namespace

std::vector<LabeledSequence> generate_dataset(const DatasetTemplate& tmpl, int count,
                                              const NoiseSpec& noise, std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("generate_dataset: count must be >= 1");
    if (tmpl.categories.empty()) throw std::invalid_argument("generate_dataset: no categories");
    if (tmpl.n_configs < 1) throw std::invalid_argument("generate_dataset: n_configs must be >= 1");

    std::vector<LabeledSequence> out;
    out.reserve(count);
    constexpr std::uint64_t kSharedAxisStream = 0x5c4e3d2b1a090807ULL;
    for (int k = 0; k < count; ++k) {
        Rng rng = stream_rng(seed, static_cast<std::uint64_t>(k));
        Rng axis_rng = tmpl.shared_axis ? stream_rng(seed, kSharedAxisStream)
                                        : stream_rng(seed, splitmix64(k) ^ 0xa11ce5ULL);
        const Category category = tmpl.categories[k % tmpl.categories.size()];
        const ArticulationSpec spec = sample_spec(tmpl, category, axis_rng, rng);
        LabeledSequence seq = generate_sequence(spec, rng);
        seq = inject_noise(seq, noise, rng);
        seq.id = k;
        seq.seed = seed;
        out.push_back(std::move(seq));
    }
    return out;
}

}  // namespace screwdist
