#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sfl/bases.hpp"
#include "sfl/dense.hpp"
#include "sfl/graph.hpp"

namespace sfl {

// Eigen-pairs of a normalized-Laplacian-like operator: values ascending in
// [0, 2], columns of u orthonormal. Construction enforces the reconstruction
// and orthonormality contracts and the deterministic sign convention.
struct Spectrum {
    Vector values;  // ascending
    Matrix u;       // column i pairs with values[i]

    std::size_t size() const { return values.size(); }
};

// Dense symmetric eigendecomposition with contract checks:
//   ||L u - u diag(values)||_F <= 1e-8 * max(1, ||L||_F)
//   ||u^T u - I||_F <= 1e-8
//   values nondecreasing in [-1e-9, 2 + 1e-9]
// Throws NumericError on convergence failure or contract violation. n <= 5000.
Spectrum eigendecompose(const SymmetricOperator& op);

// X~ = U^T X and its inverse
Matrix gft(const Spectrum& s, const Matrix& x);
Matrix igft(const Spectrum& s, const Matrix& xt);
Vector gft(const Spectrum& s, const Vector& x);
Vector igft(const Spectrum& s, const Vector& xt);

// per-eigenvalue signal energy: row square norms of U^T X
Vector spectral_energy(const Spectrum& s, const Matrix& x);
Vector spectral_energy(const Spectrum& s, const Vector& x);

struct EigenvalueGroup {
    std::size_t begin;  // first index
    std::size_t end;    // one past last
    double value;       // representative eigenvalue (first of cluster)
    std::size_t size() const { return end - begin; }
};

// Universality-condition diagnostics. multi_ratio is the percentage of
// distinct eigenvalues (gap clusters) with multiplicity > 1; n_missing counts
// frequency components whose signal energy norm is <= tol_missing (absent
// when no features were supplied).
struct Diagnostics {
    std::optional<std::size_t> n_missing;
    double multi_ratio = 0.0;
    std::vector<EigenvalueGroup> groups;
};

Diagnostics diagnose(const Spectrum& s, const Matrix* x, double tol_missing = 1e-8,
                     double tol_eig = 1e-8);

// cluster eigenvalues by absolute gap tolerance
std::vector<EigenvalueGroup> eigenvalue_groups(const Vector& values, double tol_eig = 1e-8);

// Cumulative spectral signal mass F and per-bin density f over uniform bins
// on [0, 2]. F is reported at bin edges as sum of energies with lambda <=
// edge; the density assigns the atom at lambda = 0 to bin 0 and interior
// edge atoms to the left bin.
struct DensityEstimate {
    Vector bin_edges;   // bins + 1 edges
    Vector cumulative;  // F at each edge
    Vector density;     // f per bin
};

DensityEstimate signal_density(const Spectrum& s, const Matrix& x, std::size_t bins = 40);
void save_density_csv(const DensityEstimate& d, const std::string& path);

// H_{k1 k2} = sum_i g_{k1}(lambda_i) g_{k2}(lambda_i) w_i with K = spec.degree
Matrix hessian(const Spectrum& s, const Vector& weights, const BasisSpec& spec);

// |lambda_max| / |lambda_min| of a symmetric matrix; +inf when
// |lambda_min| <= 1e-14 |lambda_max|
double condition_number(const Matrix& h);

// Polynomials orthonormal under the discrete measure sum_i w_i delta(lambda -
// lambda_i), built by the Stieltjes three-term recurrence with
// reorthogonalization. Requires at least K+1 distinct (gap > 1e-8) support
// points of positive weight; throws InputError naming the max feasible K
// otherwise.
OrthoBasisCoeffs fit_orthonormal_basis(const Spectrum& s, const Vector& weights, int degree);
// convenience wrapper producing a ready-to-use spec
BasisSpec fit_orthonormal_spec(const Spectrum& s, const Vector& weights, int degree);

// The scalar filters used across the project. Low/High/Band/Reject/Comb are
// the synthetic benchmark filters; Identity and Cosine serve the theory
// checks.
enum class FilterId { Low, High, Band, Reject, Comb, Identity, Cosine };

std::string filter_name(FilterId f);
FilterId filter_from_name(const std::string& name);
double filter_eval(FilterId f, double lambda);

// U h(Lambda) U^T x
Vector apply_exact_filter(const Spectrum& s, FilterId h, const Vector& x);
Vector apply_exact_filter(const Spectrum& s, const std::function<double(double)>& h, const Vector& x);

}  // namespace sfl
