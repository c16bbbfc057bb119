#pragma once

#include <string>
#include <utility>
#include <vector>

namespace screwdist {

/// Integer partition with non-increasing positive parts.
struct Partition {
    std::vector<int> parts;

    int weight() const {
        int n = 0;
        for (int p : parts) n += p;
        return n;
    }
    int length() const { return static_cast<int>(parts.size()); }
    bool operator==(const Partition& other) const = default;
};

/// All partitions of n with at most max_len parts, in descending
/// lexicographic order (e.g. n=3, max_len=2 -> (3), (2,1)).
std::vector<Partition> partitions(int n, int max_len);

/// Rising factorial (a)_k = a (a+1) ... (a+k-1), (a)_0 = 1.
double rising_factorial(double a, int k);

/// Generalized Pochhammer symbol (a)_nu = prod_i (a - (i-1)/2)_{nu_i}.
double gen_pochhammer(double a, const Partition& nu);

/// Zonal polynomials C_nu (Jack polynomials at alpha = 2, C-normalization) in
/// nvars variables, as expansions over monomial symmetric polynomials. The
/// normalization satisfies sum_{nu of weight n} C_nu(Y) = (tr Y)^n.
///
/// Coefficients come from the eigenfunction recurrence of the alpha = 2
/// Laplace-Beltrami operator, triangular in dominance order; the scale factor
/// is 2^n n! / prod_{cells} (2(arm+1) + leg). Immutable after construction.
class ZonalTable {
  public:
    struct Term {
        int lambda_index;  // index into basis(n)
        double coeff;
    };

    ZonalTable(int max_weight, int nvars);

    int max_weight() const { return max_weight_; }
    int nvars() const { return nvars_; }

    /// Partitions of weight n with length <= nvars, descending lex.
    const std::vector<Partition>& basis(int n) const { return basis_[n]; }
    /// Monomial expansion of C_kappa for kappa = basis(n)[kappa_index].
    const std::vector<Term>& expansion(int n, int kappa_index) const {
        return expansions_[n][kappa_index];
    }
    int index_of(const Partition& kappa) const;

    /// C_nu evaluated at diag(eigenvalues); zero when nu has more parts than
    /// nvars, one for the empty partition.
    double zonal(const Partition& nu, const std::vector<double>& eigenvalues) const;

    /// Partial derivatives of C_nu w.r.t. the two eigenvalues (nvars == 2).
    std::pair<double, double> zonal_grad2(const Partition& nu, double y1, double y2) const;

    std::string to_json() const;
    static ZonalTable from_json(const std::string& text);
    /// Load a cached table from path if it matches (max_weight, nvars), else
    /// build and (best effort) write the cache.
    static ZonalTable load_or_build(const std::string& path, int max_weight, int nvars);

  private:
    ZonalTable() = default;
    void build();

    int max_weight_ = 0;
    int nvars_ = 0;
    std::vector<std::vector<Partition>> basis_;
    std::vector<std::vector<std::vector<Term>>> expansions_;
};

/// Value of the monomial symmetric polynomial m_lambda at the given values
/// (sum over distinct permutations of the padded exponent vector).
double monomial_symmetric(const Partition& lambda, const std::vector<double>& values);

inline constexpr int kDefaultTruncation = 25;
inline constexpr double kLambdaMax = 50.0;

struct Hyp0F1Result {
    double value = 1.0;
    double log_value = 0.0;
    double tail_estimate = 0.0;  // magnitude of the last included weight layer
    bool diverging = false;      // layer magnitudes not decreasing at truncation
};

/// Truncated zonal-polynomial series for 0F1(half_m; Lambda^2 / 4) with
/// Lambda = diag(lambda1, lambda2):
///   sum_{n<=truncation} sum_{nu in P_n, len<=2} C_nu(Lambda^2/4) / ((half_m)_nu n!).
/// Symmetric in (lambda1, lambda2); inputs are sorted internally.
Hyp0F1Result hyp0f1_matrix(double half_m, double lambda1, double lambda2,
                           int truncation = kDefaultTruncation);

/// Gradient of log 0F1(3/2; Lambda^2 / 4) w.r.t. (lambda1, lambda2),
/// term-by-term derivative of the truncated series divided by its value.
std::pair<double, double> log_hyp0f1_grad(double lambda1, double lambda2,
                                          int truncation = kDefaultTruncation);

/// Shared zonal table for the production series (weight 25, two variables);
/// built once, honoring the SCREWDIST_ZONAL_CACHE environment variable.
const ZonalTable& default_zonal_table();

/// Normalization constant of the vector von Mises-Fisher distribution on S^2,
/// C_3(kappa) = kappa e^{-kappa} / (2 pi (1 - e^{-2 kappa})); 1/(4 pi) at 0.
/// Stable for large kappa.
double vmf_norm_c3(double kappa);

}  // namespace screwdist
