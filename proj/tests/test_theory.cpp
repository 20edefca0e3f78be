#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "sfl/theory.hpp"

using namespace sfl;
using sfl::test::gaussian_matrix;
using sfl::test::gaussian_vector;

TEST_CASE("wl_refine: K3 stays monochrome") {
    WlColoring c = wl_refine(complete_graph(3), {0, 0, 0}, 3);
    for (const auto& level : c.labels)
        for (int l : level) CHECK(l == level[0]);
}

TEST_CASE("wl_refine: P3 separates endpoints from the center in one round") {
    WlColoring c = wl_refine(path_graph(3), {0, 0, 0}, 1);
    CHECK(c.labels[1][0] == c.labels[1][2]);
    CHECK(c.labels[1][0] != c.labels[1][1]);
}

TEST_CASE("wl_refine: stable partitions stay stable") {
    Graph g = random_connected_graph(12, 0.3, 5);
    WlColoring c = wl_refine(g, std::vector<long long>(12, 0), 12);
    auto partition_of = [](const std::vector<int>& labels) {
        std::map<int, std::vector<std::size_t>> p;
        for (std::size_t i = 0; i < labels.size(); ++i) p[labels[i]].push_back(i);
        std::vector<std::vector<std::size_t>> out;
        for (auto& [k, v] : p) out.push_back(v);
        std::sort(out.begin(), out.end());
        return out;
    };
    bool stabilized = false;
    for (std::size_t t = 0; t + 1 < c.labels.size(); ++t) {
        if (partition_of(c.labels[t]) == partition_of(c.labels[t + 1])) stabilized = true;
        if (stabilized)
            CHECK(partition_of(c.labels[t]) == partition_of(c.labels[t + 1]));
    }
    CHECK(stabilized);
}

TEST_CASE("wl_refine is monotone: partitions only refine") {
    Rng rng(3);
    for (int t = 0; t < 5; ++t) {
        Graph g = random_connected_graph(10, 0.3, rng.next_u64());
        Matrix x = gaussian_matrix(10, 2, rng.next_u64());
        WlColoring c = wl_refine(g, quantize_feature_labels(x), 6);
        for (std::size_t lvl = 0; lvl + 1 < c.labels.size(); ++lvl)
            for (std::size_t i = 0; i < 10; ++i)
                for (std::size_t j = 0; j < 10; ++j)
                    if (c.labels[lvl + 1][i] == c.labels[lvl + 1][j])
                        CHECK(c.labels[lvl][i] == c.labels[lvl][j]);
    }
}

TEST_CASE("wl_bound_check: symmetric graphs produce equal outputs") {
    Graph k3 = complete_graph(3);
    Matrix ones(3, 1, 1.0);
    WlBoundReport r = wl_bound_check(k3, ones, 3, 10, 7);
    CHECK(r.pass);
    CHECK(r.max_group_gap <= 1e-12);

    // two disjoint P2s with identical features: cross-component pairs equal
    Graph two_p2(4, {{0, 1}, {2, 3}});
    Matrix f(4, 1, 0.5);
    WlBoundReport r2 = wl_bound_check(two_p2, f, 2, 10, 8);
    CHECK(r2.pass);
}

TEST_CASE("wl_bound_check: no violations over random graphs") {
    Rng rng(11);
    int violations = 0;
    for (int t = 0; t < 8; ++t) {
        const std::size_t n = 6 + rng.below(10);
        Graph g = random_connected_graph(n, 0.3, rng.next_u64());
        Matrix x = gaussian_matrix(n, 2, rng.next_u64());
        violations += wl_bound_check(g, x, 1 + static_cast<int>(rng.below(4)), 10,
                                     rng.next_u64())
                          .violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("universality on P2: low-pass to high-pass is exactly solvable") {
    Spectrum s = eigendecompose(normalized_laplacian(path_graph(2)));
    Matrix x(2, 1, 0.0);
    x(0, 0) = 1.0;
    Vector z{0.0, 1.0};
    UniversalitySolution sol = universality_solve(s, x, z, 5);
    CHECK(sol.residual <= 1e-10);
    // the solved filter evaluated at the two eigenvalues reproduces the ratios
    CHECK(sol.poly_coeffs.size() == 2);
}

TEST_CASE("universality: target equal to the features is admissible") {
    Graph g = random_connected_graph(8, 0.4, 19);
    Spectrum s = eigendecompose(normalized_laplacian(g));
    Matrix x = gaussian_matrix(8, 2, 20);
    Vector z = x.col(0);
    UniversalitySolution sol = universality_solve(s, x, z, 6);
    CHECK(sol.residual <= 1e-8);
}

TEST_CASE("universality on random graphs within the representable range") {
    Rng rng(31);
    int done = 0;
    for (int t = 0; done < 10 && t < 100; ++t) {
        const std::size_t n = 6 + rng.below(7);  // [6, 12]
        Graph g = random_connected_graph(n, 0.3, rng.next_u64());
        Spectrum s = eigendecompose(normalized_laplacian(g));
        bool distinct = true;
        for (std::size_t i = 0; i + 1 < n; ++i)
            if (s.values[i + 1] - s.values[i] <= 1e-8) distinct = false;
        if (!distinct) continue;
        Matrix x = gaussian_matrix(n, 3, rng.next_u64());
        Vector z = gaussian_vector(n, rng.next_u64());
        UniversalitySolution sol = universality_solve(s, x, z, rng.next_u64());
        CHECK(sol.residual <= 1e-6);
        ++done;
    }
    CHECK(done == 10);
}

TEST_CASE("universality names the failing precondition") {
    // K3 has a multiple eigenvalue
    Spectrum k3 = eigendecompose(normalized_laplacian(complete_graph(3)));
    Matrix x = gaussian_matrix(3, 2, 40);
    CHECK_THROWS_WITH_AS(universality_solve(k3, x, Vector{1.0, 0.0, 0.0}, 1),
                         doctest::Contains("multiple eigenvalues"), InputError);
    // P2 with constant features misses the lambda=2 component
    Spectrum p2 = eigendecompose(normalized_laplacian(path_graph(2)));
    Matrix ones(2, 1, 1.0);
    CHECK_THROWS_WITH_AS(universality_solve(p2, ones, Vector{1.0, 0.0}, 1),
                         doctest::Contains("missing frequency"), InputError);
}

TEST_CASE("automorphism orders of small graphs") {
    CHECK(automorphism_orders(complete_graph(3)) == std::set<int>{1, 2, 3});
    CHECK(automorphism_orders(path_graph(2)) == std::set<int>{1, 2});
    // distinct features break the swap
    Matrix x(2, 1);
    x(0, 0) = 1.0;
    x(1, 0) = 2.0;
    CHECK(automorphism_orders(path_graph(2), &x) == std::set<int>{1});
    CHECK_THROWS_AS(automorphism_orders(path_graph(9)), InputError);
}

TEST_CASE("automorphism scan is clean through n = 5") {
    ScanReport r = automorphism_scan(5, 3);
    CHECK(r.graphs_scanned == 2 + 8 + 64 + 1024);
    CHECK(r.pass());
    CHECK(r.counterexamples.empty());
}

TEST_CASE("K3 is vacuously consistent (multiple eigenvalues exclude it)") {
    Spectrum s = eigendecompose(normalized_laplacian(complete_graph(3)));
    bool distinct = true;
    for (std::size_t i = 0; i + 1 < 3; ++i)
        if (s.values[i + 1] - s.values[i] <= 1e-8) distinct = false;
    CHECK(!distinct);  // so the order bound is never exercised on it
}

TEST_CASE("random feature spectrum statistics") {
    Graph g = grid_graph(2, 5);
    Spectrum s = eigendecompose(normalized_laplacian(g));
    SpectrumStatsReport r = random_feature_spectrum_test(s, 1.0, 10000, 13);
    CHECK(r.pass);
    CHECK(r.max_cov_err <= r.cov_bound);
    CHECK(r.max_parseval_err <= 1e-10);

    SpectrumStatsReport zero = random_feature_spectrum_test(s, 0.0, 1000, 13);
    CHECK(zero.max_abs_mean == 0.0);
    CHECK(zero.max_cov_err == 0.0);
}

TEST_CASE("random_feature_universality reduces to the plain solver on distinct spectra") {
    Graph g = random_connected_graph(9, 0.35, 23);
    Spectrum s = eigendecompose(normalized_laplacian(g));
    bool distinct = true;
    for (std::size_t i = 0; i + 1 < 9; ++i)
        if (s.values[i + 1] - s.values[i] <= 1e-8) distinct = false;
    REQUIRE(distinct);
    Matrix x = gaussian_matrix(9, 2, 24);
    Vector z = gaussian_vector(9, 25);
    RandomFeatureSolution sol = random_feature_universality(s, x, z, 3);
    CHECK(sol.augmented_cols == 0);
    CHECK(sol.residual <= 1e-6);
}

TEST_CASE("random_feature_universality resolves the K3 multiplicity for 20 seeds") {
    Spectrum s = eigendecompose(normalized_laplacian(complete_graph(3)));
    Matrix ones(3, 1, 1.0);
    for (std::uint64_t t = 0; t < 20; ++t) {
        Vector z = gaussian_vector(3, 600 + t);
        RandomFeatureSolution sol = random_feature_universality(s, ones, z, t);
        CHECK(sol.augmented_cols == 2);
        CHECK(sol.residual <= 1e-6);
    }
}

TEST_CASE("bias counterexample witness is exactly orthogonal") {
    BiasCounterexample c = bias_counterexample(4);
    // u^T X = 0 and u^T 1 = 0 exactly
    double ux = 0.0, u1 = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        ux += c.witness[i] * c.x(i, 0);
        u1 += c.witness[i];
    }
    CHECK(ux == 0.0);
    CHECK(u1 == 0.0);
    CHECK(bias_witness_deviation(c, 100, 3, 7) <= 1e-12);
    // isolated pair + path shape
    CHECK(c.graph.degree(0) == 0);
    CHECK(c.graph.degree(1) == 0);
    CHECK(c.graph.degree(2) == 1);
}

TEST_CASE("bias witness survives feature scaling but not a perturbation") {
    BiasCounterexample c = bias_counterexample(6);
    for (double& v : c.x.data()) v *= 3.7;  // scaling keeps rows 0,1 equal
    CHECK(bias_witness_deviation(c, 20, 2, 9) <= 1e-12);
    c.x(0, 0) += 0.5;  // rows now differ: witness breaks
    CHECK(bias_witness_deviation(c, 20, 2, 9) > 1e-3);
}

TEST_CASE("the witness is a genuine frequency component of the construction") {
    BiasCounterexample c = bias_counterexample(6);
    SymmetricOperator l_hat = normalized_laplacian(c.graph);
    Vector lu = l_hat.apply(c.witness);
    CHECK(sfl::test::max_abs_diff(lu, c.witness) <= 1e-12);  // eigenvector, lambda = 1
}

TEST_CASE("interpolation bound: polynomials of degree <= n are exact") {
    InterpBoundResult r = interpolation_bound_check(FilterId::Identity, 4);
    CHECK(r.sup_error <= 1e-10);
    CHECK(r.pass);
}

TEST_CASE("interpolation bound for cos at n = 4 and n = 8") {
    InterpBoundResult r4 = interpolation_bound_check(FilterId::Cosine, 4);
    CHECK(r4.bound == doctest::Approx(1.0 / 1920.0));
    CHECK(r4.sup_error <= r4.bound);
    InterpBoundResult r8 = interpolation_bound_check(FilterId::Cosine, 8);
    CHECK(r8.bound == doctest::Approx(1.0 / (362880.0 * 256.0)));
    CHECK(r8.sup_error <= r8.bound);
}

TEST_CASE("interpolation bound holds for the smooth benchmark filters") {
    for (FilterId f : {FilterId::Low, FilterId::High, FilterId::Band, FilterId::Reject}) {
        InterpBoundResult r = interpolation_bound_check(f, 6);
        CHECK(r.pass);
    }
}

TEST_CASE("degree demand of random features stays above a quarter of the spectrum") {
    Graph g = random_connected_graph(64, 0.1, 41);
    Spectrum s = eigendecompose(normalized_laplacian(g));
    DegreeDemandReport r = random_feature_degree_demand(s, 6);
    CHECK(r.n_distinct >= 60);
    CHECK(r.required_degree >= static_cast<int>(0.25 * static_cast<double>(r.n_distinct)));
}

TEST_CASE("interpolate_monomial reproduces exact polynomial data") {
    Vector pts{0.1, 0.5, 0.9, 1.4, 1.9};
    Vector vals(5);
    for (std::size_t i = 0; i < 5; ++i) vals[i] = 2.0 - pts[i] + 3.0 * pts[i] * pts[i];
    Vector c = interpolate_monomial(pts, vals);
    CHECK(c[0] == doctest::Approx(2.0));
    CHECK(c[1] == doctest::Approx(-1.0));
    CHECK(c[2] == doctest::Approx(3.0));
    for (std::size_t i = 3; i < 5; ++i) CHECK(c[i] == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(horner(c, 0.77) == doctest::Approx(2.0 - 0.77 + 3.0 * 0.77 * 0.77));
}
