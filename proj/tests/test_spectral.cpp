#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "sfl/spectral.hpp"

using namespace sfl;
using sfl::test::gaussian_matrix;
using sfl::test::gaussian_vector;

TEST_CASE("eigendecompose P2 and K3") {
    Spectrum p2 = eigendecompose(normalized_laplacian(path_graph(2)));
    CHECK(p2.values[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(p2.values[1] == doctest::Approx(2.0));
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(std::fabs(p2.u(0, 0)) == doctest::Approx(r));
    CHECK(std::fabs(p2.u(1, 1)) == doctest::Approx(r));

    Spectrum k3 = eigendecompose(normalized_laplacian(complete_graph(3)));
    CHECK(k3.values[0] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(k3.values[1] == doctest::Approx(1.5));
    CHECK(k3.values[2] == doctest::Approx(1.5));
}

TEST_CASE("eigendecompose identity operator") {
    SymmetricOperator eye = SymmetricOperator::from_triplets(4, {{0, 0, 1.0}, {1, 1, 1.0},
                                                                 {2, 2, 1.0}, {3, 3, 1.0}});
    Spectrum s = eigendecompose(eye);
    for (double v : s.values) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("gft of the eigenvectors is the identity") {
    Graph g = grid_graph(3, 3);
    Spectrum s = eigendecompose(normalized_laplacian(g));
    Matrix id = gft(s, s.u);
    for (std::size_t i = 0; i < 9; ++i)
        for (std::size_t j = 0; j < 9; ++j)
            CHECK(id(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-10));
}

TEST_CASE("gft on P2 constant vector") {
    Spectrum s = eigendecompose(normalized_laplacian(path_graph(2)));
    Vector xt = gft(s, Vector{1.0, 1.0});
    CHECK(std::fabs(xt[0]) == doctest::Approx(std::sqrt(2.0)));
    CHECK(xt[1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("Parseval and gft/igft round-trip") {
    Graph g = random_connected_graph(30, 0.2, 17);
    Spectrum s = eigendecompose(normalized_laplacian(g));
    for (std::uint64_t t = 0; t < 5; ++t) {
        Matrix x = gaussian_matrix(30, 4, 100 + t);
        Matrix xt = gft(s, x);
        CHECK(std::fabs(frobenius(xt) - frobenius(x)) <= 1e-10 * std::max(1.0, frobenius(x)));
        CHECK(sfl::test::max_abs_diff(igft(s, xt), x) <= 1e-10);
    }
}

TEST_CASE("diagnose P2 with constant signal") {
    Spectrum s = eigendecompose(normalized_laplacian(path_graph(2)));
    Matrix x(2, 1, 1.0);
    Diagnostics d = diagnose(s, &x);
    REQUIRE(d.n_missing.has_value());
    CHECK(*d.n_missing == 1);  // the lambda=2 component
    CHECK(d.multi_ratio == 0.0);
}

TEST_CASE("diagnose K3 multiplicity ratio") {
    Spectrum s = eigendecompose(normalized_laplacian(complete_graph(3)));
    Diagnostics d = diagnose(s, nullptr);
    CHECK(d.multi_ratio == doctest::Approx(50.0));
    CHECK(d.groups.size() == 2);
    CHECK(d.groups[1].size() == 2);
    CHECK(!d.n_missing.has_value());
}

TEST_CASE("full-rank Gaussian features have no missing components") {
    Spectrum s = eigendecompose(normalized_laplacian(path_graph(2)));
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Matrix x = gaussian_matrix(2, 2, 500 + seed);
        Diagnostics d = diagnose(s, &x);
        CHECK(*d.n_missing == 0);
    }
}

TEST_CASE("signal_density piles P2 constant mass into the first bin") {
    Spectrum s = eigendecompose(normalized_laplacian(path_graph(2)));
    Matrix x(2, 1, 1.0);
    DensityEstimate d = signal_density(s, x, 10);
    CHECK(d.density[0] == doctest::Approx(2.0 / 0.2));  // all mass (2.0) in bin 0
    for (std::size_t j = 1; j < 10; ++j) CHECK(d.density[j] == 0.0);
    CHECK(d.cumulative.back() == doctest::Approx(2.0));
}

TEST_CASE("signal_density conserves total mass (Parseval)") {
    Graph g = random_connected_graph(25, 0.2, 3);
    Spectrum s = eigendecompose(normalized_laplacian(g));
    Matrix x = gaussian_matrix(25, 3, 9);
    DensityEstimate d = signal_density(s, x, 40);
    const double total = frobenius(x) * frobenius(x);
    CHECK(d.cumulative.back() == doctest::Approx(total).epsilon(1e-10));
    double mass = 0.0;
    for (double f : d.density) mass += f * (2.0 / 40.0);
    CHECK(mass == doctest::Approx(total).epsilon(1e-10));
    // F nondecreasing
    for (std::size_t j = 0; j + 1 < d.cumulative.size(); ++j)
        CHECK(d.cumulative[j] <= d.cumulative[j + 1] + 1e-15);
}

TEST_CASE("uniform spectral energy gives a near-flat density") {
    Graph g = grid_graph(5, 5);
    Spectrum s = eigendecompose(normalized_laplacian(g));
    // construct x with exactly unit energy at every eigenvalue
    Vector ones(25, 1.0);
    Vector x = igft(s, ones);
    Matrix xm(25, 1);
    for (std::size_t i = 0; i < 25; ++i) xm(i, 0) = x[i];
    DensityEstimate d = signal_density(s, xm, 5);  // coarse bins smooth the spectrum
    for (double f : d.density) CHECK(f > 0.0);
}

TEST_CASE("hessian on P2 with split energy is the identity (Monomial, K=1)") {
    Spectrum s = eigendecompose(normalized_laplacian(path_graph(2)));
    Vector w = spectral_energy(s, Vector{1.0, 0.0});
    CHECK(w[0] == doctest::Approx(0.5));
    CHECK(w[1] == doctest::Approx(0.5));
    BasisSpec mono;
    mono.family = BasisFamily::Monomial;
    mono.degree = 1;
    Matrix h = hessian(s, w, mono);
    CHECK(h(0, 0) == doctest::Approx(1.0));
    CHECK(h(0, 1) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(h(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("hessian with zero weights is the zero matrix") {
    Spectrum s = eigendecompose(normalized_laplacian(complete_graph(3)));
    BasisSpec cheb;
    cheb.family = BasisFamily::Chebyshev;
    cheb.degree = 3;
    Matrix h = hessian(s, Vector(3, 0.0), cheb);
    for (double v : h.data()) CHECK(v == 0.0);
}

TEST_CASE("hessian equals an independently assembled Gram matrix") {
    Graph g = random_connected_graph(18, 0.25, 21);
    Spectrum s = eigendecompose(normalized_laplacian(g));
    Vector w = spectral_energy(s, gaussian_vector(18, 5));
    BasisSpec jac;
    jac.family = BasisFamily::Jacobi;
    jac.degree = 5;
    jac.a = 0.5;
    jac.b = 1.0;
    Matrix h = hessian(s, w, jac);
    // oracle route: scaled value matrix S(i,k) = sqrt(w_i) g_k(lambda_i), Gram = S^T S
    Matrix sv(18, 6);
    for (std::size_t i = 0; i < 18; ++i)
        for (int k = 0; k <= 5; ++k)
            sv(i, static_cast<std::size_t>(k)) =
                std::sqrt(w[i]) * basis_scalar(jac, k, s.values[i]);
    Matrix gram = gram_style(sv, sv);
    CHECK(sfl::test::max_abs_diff(h, gram) <= 1e-12 * std::max(1.0, frobenius(h)));
}

TEST_CASE("condition_number basics") {
    CHECK(condition_number(Matrix::identity(4)) == doctest::Approx(1.0));
    Matrix d(2, 2, 0.0);
    d(0, 0) = 4.0;
    d(1, 1) = 1.0;
    CHECK(condition_number(d) == doctest::Approx(4.0));
    Matrix rank1(2, 2);
    rank1(0, 0) = 1.0;
    rank1(0, 1) = 1.0;
    rank1(1, 0) = 1.0;
    rank1(1, 1) = 1.0;
    CHECK(std::isinf(condition_number(rank1)));
}

TEST_CASE("fit_orthonormal_basis: K=0 is pure normalization") {
    Spectrum s = eigendecompose(normalized_laplacian(path_graph(2)));
    Vector w{4.0, 0.0};  // all weight at one eigenvalue
    OrthoBasisCoeffs oc = fit_orthonormal_basis(s, w, 0);
    BasisSpec spec;
    spec.family = BasisFamily::OrthoFitted;
    spec.degree = 0;
    spec.ortho_coeffs = oc;
    CHECK(basis_scalar(spec, 0, 1.3) == doctest::Approx(0.5));  // 1/sqrt(4)
}

TEST_CASE("fit_orthonormal_basis yields identity Hessian") {
    Spectrum p2 = eigendecompose(normalized_laplacian(path_graph(2)));
    Vector w2 = spectral_energy(p2, Vector{1.0, 0.0});
    BasisSpec fit2 = fit_orthonormal_spec(p2, w2, 1);
    Matrix h2 = hessian(p2, w2, fit2);
    CHECK(sfl::test::max_abs_diff(h2, Matrix::identity(2)) <= 1e-10);

    // uniform weights on 5 distinct points, K=4
    Graph p5 = path_graph(5);
    Spectrum s5 = eigendecompose(normalized_laplacian(p5));
    Vector w5(5, 1.0);
    BasisSpec fit5 = fit_orthonormal_spec(s5, w5, 4);
    Matrix h5 = hessian(s5, w5, fit5);
    CHECK(sfl::test::max_abs_diff(h5, Matrix::identity(5)) <= 1e-8);
    CHECK(condition_number(h5) <= 1.0 + 1e-6);
}

TEST_CASE("fit_orthonormal_basis names the max feasible degree on failure") {
    Spectrum s = eigendecompose(normalized_laplacian(path_graph(2)));
    Vector w{1.0, 1.0};
    CHECK_THROWS_WITH_AS(fit_orthonormal_basis(s, w, 2), doctest::Contains("max feasible degree is 1"),
                         InputError);
    Vector spike{1.0, 0.0};
    CHECK_THROWS_AS(fit_orthonormal_basis(s, spike, 1), InputError);
}

TEST_CASE("apply_exact_filter identities") {
    Graph g = grid_graph(3, 3);
    Spectrum s = eigendecompose(normalized_laplacian(g));
    Vector x = gaussian_vector(9, 2);
    Vector same = apply_exact_filter(s, FilterId::Identity, x);
    CHECK(sfl::test::max_abs_diff(same, x) <= 1e-10);

    // h(lambda) = 1 - lambda is exactly A_hat
    Spectrum p2 = eigendecompose(normalized_laplacian(path_graph(2)));
    Vector y = apply_exact_filter(p2, [](double lam) { return 1.0 - lam; }, Vector{1.0, 0.0});
    CHECK(y[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(y[1] == doctest::Approx(1.0));
}

TEST_CASE("band filter passes an exact eigenvalue-1 component") {
    // P3 path has eigenvalue exactly 1
    Graph g = path_graph(3);
    Spectrum s = eigendecompose(normalized_laplacian(g));
    std::size_t idx = 2;
    for (std::size_t i = 0; i < 3; ++i)
        if (std::fabs(s.values[i] - 1.0) < 1e-9) idx = i;
    REQUIRE(std::fabs(s.values[idx] - 1.0) < 1e-9);
    Vector comp = s.u.col(idx);
    Vector filtered = apply_exact_filter(s, FilterId::Band, comp);
    CHECK(sfl::test::max_abs_diff(filtered, comp) <= 1e-10);  // band(1) = 1
}

TEST_CASE("eigendecompose rejects oversized problems") {
    // guard is n > 5000; just probe the error type cheaply via a tiny fake
    CHECK_THROWS_AS(eigendecompose(SymmetricOperator::from_triplets(
                        5001, {{0, 0, 1.0}})),
                    NumericError);
}
