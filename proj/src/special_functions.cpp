#include "screwdist/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace screwdist {

namespace {

void enumerate_partitions(int remaining, int max_part, int max_len, std::vector<int>& stack,
                          std::vector<Partition>& out) {
    if (remaining == 0) {
        out.push_back({stack});
        return;
    }
    if (max_len == 0) return;
    for (int p = std::min(remaining, max_part); p >= 1; --p) {
        stack.push_back(p);
        enumerate_partitions(remaining - p, p, max_len - 1, stack, out);
        stack.pop_back();
    }
}

// Eigenvalue of the alpha = 2 Laplace-Beltrami operator on m_lambda, for the
// exponent vector padded to nvars entries (sorted descending).
double lb_eigenvalue(const Partition& lambda, int nvars) {
    double e = 0.0;
    for (std::size_t i = 0; i < lambda.parts.size(); ++i) {
        const double a = lambda.parts[i];
        e += a * (a - 1.0);
        e += a * (nvars - 1.0 - static_cast<double>(i));  // max over pairs, sorted desc
    }
    return e;
}

// 2^n n! / prod_{cells of kappa} (2 (arm + 1) + leg): converts the monic Jack
// polynomial P_kappa to the trace-normalized zonal C_kappa.
double c_normalization(const Partition& kappa) {
    const int n = kappa.weight();
    std::vector<int> conj;  // conjugate partition
    for (int j = 0;; ++j) {
        int cnt = 0;
        for (int p : kappa.parts)
            if (p > j) ++cnt;
        if (cnt == 0) break;
        conj.push_back(cnt);
    }
    double denom = 1.0;
    for (std::size_t i = 0; i < kappa.parts.size(); ++i) {
        for (int j = 0; j < kappa.parts[i]; ++j) {
            const int arm = kappa.parts[i] - j - 1;
            const int leg = conj[j] - static_cast<int>(i) - 1;
            denom *= 2.0 * (arm + 1) + leg;
        }
    }
    double num = 1.0;
    for (int i = 1; i <= n; ++i) num *= 2.0 * i;
    return num / denom;
}

std::vector<int> padded(const Partition& p, int nvars) {
    std::vector<int> v(p.parts.begin(), p.parts.end());
    v.resize(nvars, 0);
    return v;
}

}  // namespace

std::vector<Partition> partitions(int n, int max_len) {
    if (n < 0) throw std::invalid_argument("partitions: n must be >= 0");
    std::vector<Partition> out;
    std::vector<int> stack;
    enumerate_partitions(n, n, max_len, stack, out);
    if (n == 0) return {Partition{}};
    return out;
}

double rising_factorial(double a, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= a + i;
    return r;
}

double gen_pochhammer(double a, const Partition& nu) {
    double r = 1.0;
    for (std::size_t i = 0; i < nu.parts.size(); ++i) {
        r *= rising_factorial(a - 0.5 * static_cast<double>(i), nu.parts[i]);
    }
    return r;
}

ZonalTable::ZonalTable(int max_weight, int nvars) : max_weight_(max_weight), nvars_(nvars) {
    if (max_weight < 0 || nvars < 1) throw std::invalid_argument("ZonalTable: bad arguments");
    build();
}

void ZonalTable::build() {
    basis_.resize(max_weight_ + 1);
    expansions_.resize(max_weight_ + 1);
    for (int n = 0; n <= max_weight_; ++n) {
        basis_[n] = partitions(n, nvars_);
        const auto& basis = basis_[n];
        const int count = static_cast<int>(basis.size());

        auto find_index = [&](const std::vector<int>& sorted_desc) {
            Partition key;
            for (int v : sorted_desc)
                if (v > 0) key.parts.push_back(v);
            for (int i = 0; i < count; ++i)
                if (basis[i] == key) return i;
            return -1;
        };

        std::vector<double> eigen(count);
        for (int i = 0; i < count; ++i) eigen[i] = lb_eigenvalue(basis[i], nvars_);

        expansions_[n].resize(count);
        for (int k = 0; k < count; ++k) {
            // Monic triangular expansion of P_kappa over dominance-lower partitions.
            std::vector<double> u(count, 0.0);
            u[k] = 1.0;
            for (int t = k + 1; t < count; ++t) {
                const std::vector<int> target = padded(basis[t], nvars_);
                double num = 0.0;
                for (int i = 0; i < nvars_; ++i) {
                    for (int j = i + 1; j < nvars_; ++j) {
                        const int sum = target[i] + target[j];
                        const int lo = std::max(target[i], target[j]);
                        for (int p = lo + 1; p <= sum; ++p) {
                            const int q = sum - p;
                            std::vector<int> source = target;
                            source[i] = p;
                            source[j] = q;
                            std::sort(source.begin(), source.end(), std::greater<>());
                            const int src = find_index(source);
                            if (src >= 0 && u[src] != 0.0) num += (p - q) * u[src];
                        }
                    }
                }
                if (num != 0.0) u[t] = num / (eigen[k] - eigen[t]);
            }
            const double scale = c_normalization(basis[k]);
            auto& expansion = expansions_[n][k];
            for (int t = 0; t < count; ++t) {
                if (u[t] != 0.0) expansion.push_back({t, scale * u[t]});
            }
        }
    }
}

int ZonalTable::index_of(const Partition& kappa) const {
    const int n = kappa.weight();
    if (n > max_weight_) throw std::out_of_range("ZonalTable: weight exceeds table");
    const auto& basis = basis_[n];
    for (int i = 0; i < static_cast<int>(basis.size()); ++i)
        if (basis[i] == kappa) return i;
    return -1;
}

double monomial_symmetric(const Partition& lambda, const std::vector<double>& values) {
    const int k = static_cast<int>(values.size());
    if (lambda.length() > k) return 0.0;
    std::vector<int> expo = padded(lambda, k);
    std::sort(expo.begin(), expo.end());
    double total = 0.0;
    do {
        double term = 1.0;
        for (int i = 0; i < k; ++i) {
            for (int e = 0; e < expo[i]; ++e) term *= values[i];
        }
        total += term;
    } while (std::next_permutation(expo.begin(), expo.end()));
    return total;
}

double ZonalTable::zonal(const Partition& nu, const std::vector<double>& eigenvalues) const {
    if (nu.length() > nvars_) return 0.0;
    if (nu.parts.empty()) return 1.0;
    const int n = nu.weight();
    const int idx = index_of(nu);
    if (idx < 0) throw std::invalid_argument("ZonalTable::zonal: not a valid partition");
    double total = 0.0;
    for (const Term& term : expansions_[n][idx]) {
        total += term.coeff * monomial_symmetric(basis_[n][term.lambda_index], eigenvalues);
    }
    return total;
}

std::pair<double, double> ZonalTable::zonal_grad2(const Partition& nu, double y1,
                                                  double y2) const {
    if (nvars_ != 2) throw std::logic_error("zonal_grad2 requires a two-variable table");
    if (nu.length() > 2) return {0.0, 0.0};
    if (nu.parts.empty()) return {0.0, 0.0};
    const int n = nu.weight();
    const int idx = index_of(nu);
    if (idx < 0) throw std::invalid_argument("ZonalTable::zonal_grad2: not a valid partition");
    auto ipow = [](double y, int e) {
        double r = 1.0;
        for (int i = 0; i < e; ++i) r *= y;
        return r;
    };
    double g1 = 0.0, g2 = 0.0;
    for (const Term& term : expansions_[n][idx]) {
        const auto& lambda = basis_[n][term.lambda_index];
        const int a = lambda.parts.empty() ? 0 : lambda.parts[0];
        const int b = lambda.length() > 1 ? lambda.parts[1] : 0;
        double d1, d2;
        if (a == b) {  // (y1 y2)^a
            d1 = a * ipow(y1, a - 1) * ipow(y2, a);
            d2 = a * ipow(y1, a) * ipow(y2, a - 1);
        } else {  // y1^a y2^b + y1^b y2^a
            d1 = a * ipow(y1, a - 1) * ipow(y2, b) + (b > 0 ? b * ipow(y1, b - 1) * ipow(y2, a) : 0.0);
            d2 = (b > 0 ? b * ipow(y1, a) * ipow(y2, b - 1) : 0.0) + a * ipow(y1, b) * ipow(y2, a - 1);
        }
        g1 += term.coeff * d1;
        g2 += term.coeff * d2;
    }
    return {g1, g2};
}

std::string ZonalTable::to_json() const {
    nlohmann::json j;
    j["version"] = 1;
    j["family"] = "jack_alpha2_trace_normalized";
    j["max_weight"] = max_weight_;
    j["nvars"] = nvars_;
    nlohmann::json weights = nlohmann::json::array();
    for (int n = 0; n <= max_weight_; ++n) {
        nlohmann::json entries = nlohmann::json::array();
        for (std::size_t k = 0; k < basis_[n].size(); ++k) {
            nlohmann::json terms = nlohmann::json::array();
            for (const Term& t : expansions_[n][k]) {
                terms.push_back({{"lambda", basis_[n][t.lambda_index].parts}, {"coeff", t.coeff}});
            }
            entries.push_back({{"kappa", basis_[n][k].parts}, {"terms", terms}});
        }
        weights.push_back({{"n", n}, {"entries", entries}});
    }
    j["weights"] = weights;
    return j.dump();
}

ZonalTable ZonalTable::from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("version").get<int>() != 1 ||
        j.at("family").get<std::string>() != "jack_alpha2_trace_normalized") {
        throw std::runtime_error("ZonalTable::from_json: unsupported cache format");
    }
    ZonalTable table;
    table.max_weight_ = j.at("max_weight").get<int>();
    table.nvars_ = j.at("nvars").get<int>();
    table.basis_.resize(table.max_weight_ + 1);
    table.expansions_.resize(table.max_weight_ + 1);
    for (const auto& w : j.at("weights")) {
        const int n = w.at("n").get<int>();
        auto& basis = table.basis_[n];
        auto& exps = table.expansions_[n];
        for (const auto& entry : w.at("entries")) {
            basis.push_back({entry.at("kappa").get<std::vector<int>>()});
        }
        exps.resize(basis.size());
        std::size_t k = 0;
        for (const auto& entry : w.at("entries")) {
            for (const auto& t : entry.at("terms")) {
                Partition lambda{t.at("lambda").get<std::vector<int>>()};
                int idx = -1;
                for (std::size_t i = 0; i < basis.size(); ++i)
                    if (basis[i] == lambda) idx = static_cast<int>(i);
                if (idx < 0) throw std::runtime_error("ZonalTable::from_json: bad lambda");
                exps[k].push_back({idx, t.at("coeff").get<double>()});
            }
            ++k;
        }
    }
    return table;
}

ZonalTable ZonalTable::load_or_build(const std::string& path, int max_weight, int nvars) {
    if (!path.empty()) {
        std::ifstream in(path);
        if (in) {
            std::stringstream buf;
            buf << in.rdbuf();
            try {
                ZonalTable cached = from_json(buf.str());
                if (cached.max_weight_ >= max_weight && cached.nvars_ == nvars) return cached;
            } catch (const std::exception&) {
                // fall through and rebuild
            }
        }
    }
    ZonalTable fresh(max_weight, nvars);
    if (!path.empty()) {
        std::ofstream out(path);
        if (out) out << fresh.to_json();
    }
    return fresh;
}

const ZonalTable& default_zonal_table() {
    static const ZonalTable table = [] {
        const char* cache = std::getenv("SCREWDIST_ZONAL_CACHE");
        return ZonalTable::load_or_build(cache ? cache : "", kDefaultTruncation, 2);
    }();
    return table;
}

Hyp0F1Result hyp0f1_matrix(double half_m, double lambda1, double lambda2, int truncation) {
    if (lambda1 < 0.0 || lambda2 < 0.0) {
        throw std::invalid_argument("hyp0f1_matrix: singular values must be >= 0");
    }
    if (truncation < 0) throw std::invalid_argument("hyp0f1_matrix: truncation must be >= 0");
    if (lambda1 < lambda2) std::swap(lambda1, lambda2);

    const ZonalTable& table = default_zonal_table();
    if (truncation > table.max_weight()) {
        throw std::invalid_argument("hyp0f1_matrix: truncation exceeds zonal table weight");
    }
    const std::vector<double> y = {0.25 * lambda1 * lambda1, 0.25 * lambda2 * lambda2};

    Hyp0F1Result res;
    double sum = 0.0, comp = 0.0;  // Kahan accumulation, ascending weight
    double prev_layer = 0.0;
    double factorial = 1.0;
    for (int n = 0; n <= truncation; ++n) {
        if (n > 0) factorial *= n;
        double layer = 0.0;
        for (const Partition& nu : table.basis(n)) {
            layer += table.zonal(nu, y) / (gen_pochhammer(half_m, nu) * factorial);
        }
        const double t = sum + layer;
        if (std::abs(sum) >= std::abs(layer)) {
            comp += (sum - t) + layer;
        } else {
            comp += (layer - t) + sum;
        }
        sum = t;
        if (n == truncation) {
            res.tail_estimate = std::abs(layer);
            res.diverging = truncation >= 1 && std::abs(layer) > std::abs(prev_layer);
        }
        prev_layer = layer;
    }
    res.value = sum + comp;
    res.log_value = std::log(res.value);
    return res;
}

std::pair<double, double> log_hyp0f1_grad(double lambda1, double lambda2, int truncation) {
    if (lambda1 < 0.0 || lambda2 < 0.0) {
        throw std::invalid_argument("log_hyp0f1_grad: singular values must be >= 0");
    }
    const bool swapped = lambda1 < lambda2;
    if (swapped) std::swap(lambda1, lambda2);

    const ZonalTable& table = default_zonal_table();
    if (truncation > table.max_weight()) {
        throw std::invalid_argument("log_hyp0f1_grad: truncation exceeds zonal table weight");
    }
    const double y1 = 0.25 * lambda1 * lambda1;
    const double y2 = 0.25 * lambda2 * lambda2;
    const std::vector<double> y = {y1, y2};

    double value = 0.0, g1 = 0.0, g2 = 0.0;
    double factorial = 1.0;
    for (int n = 0; n <= truncation; ++n) {
        if (n > 0) factorial *= n;
        for (const Partition& nu : table.basis(n)) {
            const double w = 1.0 / (gen_pochhammer(1.5, nu) * factorial);
            value += w * table.zonal(nu, y);
            const auto [dy1, dy2] = table.zonal_grad2(nu, y1, y2);
            g1 += w * dy1;
            g2 += w * dy2;
        }
    }
    // d/d lambda_i = (lambda_i / 2) d/d y_i
    double d1 = g1 * (0.5 * lambda1) / value;
    double d2 = g2 * (0.5 * lambda2) / value;
    if (swapped) std::swap(d1, d2);
    return {d1, d2};
}

double vmf_norm_c3(double kappa) {
    if (kappa < 0.0) throw std::invalid_argument("vmf_norm_c3: kappa must be >= 0");
    if (kappa == 0.0) return 1.0 / (4.0 * std::numbers::pi);
    // kappa e^{-kappa} / (2 pi (1 - e^{-2 kappa})), written via expm1 so the
    // kappa -> 0 limit stays accurate.
    const double ratio = kappa / -std::expm1(-2.0 * kappa);
    return ratio * std::exp(-kappa) / (2.0 * std::numbers::pi);
}

}  // namespace screwdist
