#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sfl/graph.hpp"

namespace sfl {

enum class BasisFamily { Monomial, Chebyshev, Bernstein, Jacobi, FixedAPPNP, FixedSGC, OrthoFitted };

std::string family_name(BasisFamily f);
BasisFamily family_from_name(const std::string& name);

// Recurrence coefficients of P_k^{a,b}(z) = (theta_k z + theta_k') P_{k-1} - theta_k'' P_{k-2}.
struct RecurrenceCoeffs {
    double theta;
    double theta_prime;
    double theta_dprime;
};

RecurrenceCoeffs jacobi_recurrence(double a, double b, int k);

// Three-term recurrence table of polynomials orthonormal under a discrete
// measure on the Laplacian spectrum (produced by fit_orthonormal_basis):
//   p_{-1} = 0,  p_0 = 1/sqrt(b0),
//   p_{k+1}(x) = ((x - a_k) p_k(x) - sqrt_b[k] p_{k-1}(x)) / sqrt_b[k+1].
// The recurrence variable is lambda itself (not 1-lambda).
struct OrthoBasisCoeffs {
    std::vector<double> a;       // a_0 .. a_K
    std::vector<double> sqrt_b;  // sqrt(b_0) .. sqrt(b_{K+1}); sqrt_b[0] = sqrt(total weight)
    int max_degree() const { return static_cast<int>(a.size()) - 1; }
};

// Identifies a polynomial filter family plus its parameters. Learnable
// families (Monomial, Chebyshev, Jacobi) are polynomials in z = 1 - lambda,
// i.e. in A_hat; Bernstein is evaluated directly in lambda per its standard
// form; OrthoFitted in lambda.
struct BasisSpec {
    BasisFamily family = BasisFamily::Jacobi;
    int degree = 10;  // K
    double a = 1.0;   // Jacobi exponent, > -1
    double b = 1.0;   // Jacobi exponent, > -1
    double alpha = 0.1;  // teleport scalar for the fixed families, in (0,1)
    std::optional<OrthoBasisCoeffs> ortho_coeffs;

    void validate() const;
};

// g_k(lambda) for the family; 0 <= k <= degree. Bernstein needs k <= K since
// K enters its formula.
double basis_scalar(const BasisSpec& spec, int k, double lambda);

// Frozen coefficient vector over the Monomial basis (1-lambda)^k for the
// fixed baselines: APPNP -> alpha^k/(1-alpha), SGC -> one-hot at K.
Vector fixed_coeffs(const BasisSpec& spec);

// B_k = g_k(A_hat) h for k = 0..K. Recurrence families use exactly K sparse
// mat-vecs; Bernstein uses its expanded (I+A)/2, (I-A)/2 form with O(K^2)
// mat-vecs. When gammas (length K) is given - Jacobi only - the scaled
// recursion is used and B~_k = (prod_{i<=k} gamma_i) B_k is returned.
std::vector<Vector> apply_basis(const BasisSpec& spec, const SymmetricOperator& a_hat,
                                const Vector& h, const Vector* gammas = nullptr);

// (lambda, k, value) curve samples over a uniform grid on [0,2]; 201 points
// per k by default.
struct BasisCurvePoint {
    double lambda;
    int k;
    double value;
};
std::vector<BasisCurvePoint> basis_curve(const BasisSpec& spec, std::size_t grid_points = 201);
void save_basis_curve_csv(const std::vector<BasisCurvePoint>& curve, const std::string& path);

// log-binomial helper used by the Bernstein forms; exact enough for K <= 64
double binomial(int n, int k);

}  // namespace sfl
