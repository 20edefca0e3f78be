#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "sfl/model.hpp"
#include "sfl/spectral.hpp"

namespace sfl {

// ---------------------------------------------------------------------------
// Weisfeiler-Lehman refinement
// ---------------------------------------------------------------------------

// Classic 1-WL colorings: labels[t] is the coloring after t rounds
// (labels[0] is the recoded initial labeling), always iters + 1 entries.
struct WlColoring {
    std::vector<std::vector<int>> labels;
    int iterations = 0;
};

WlColoring wl_refine(const Graph& g, const std::vector<long long>& init_labels, int iters);

// initial WL labels from features, quantized to a 1e-9 grid before hashing
std::vector<long long> quantize_feature_labels(const Matrix& x, double grid = 1e-9);

// Checks the WL upper bound: whenever two nodes share a WL_{K+1} label, every
// degree-K polynomial filter output must coincide on them (within
// 1e-8 * scale). Violations are findings.
struct WlBoundReport {
    int trials = 0;
    int violations = 0;
    double max_group_gap = 0.0;  // worst within-group output spread seen
    bool pass = true;
};

WlBoundReport wl_bound_check(const Graph& g, const Matrix& x, int degree, int trials,
                             std::uint64_t seed);

// ---------------------------------------------------------------------------
// Constructive universality
// ---------------------------------------------------------------------------

struct UniversalitySolution {
    Vector w_star;       // input mixing vector, all |X~ w*| entries > 1e-10
    Vector poly_coeffs;  // filter polynomial over the monomial-in-lambda basis
    double residual = 0.0;  // relative reconstruction residual
};

// Builds (W*, g) with g(L) X W* = z for a distinct spectrum and full-spectrum
// features. Throws InputError naming the failing precondition (multiple
// eigenvalues vs missing frequency component).
UniversalitySolution universality_solve(const Spectrum& s, const Matrix& x, const Vector& z,
                                        std::uint64_t seed);

// ---------------------------------------------------------------------------
// Automorphisms
// ---------------------------------------------------------------------------

// Orders of all automorphisms (feature-preserving when x != nullptr, exact
// feature equality). Brute force, n <= 8.
std::set<int> automorphism_orders(const Graph& g, const Matrix* x = nullptr);

struct ScanCounterexample {
    std::size_t n;
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::string which;  // "order>=3" or "nontrivial-automorphism"
};

// Over all graphs with n <= n_max (exhaustive through n = 6, seeded sample of
// >= 10^4 at n = 7): a distinct L-spectrum must rule out automorphisms of
// order >= 3; with features free of missing components it must leave only the
// identity. Expected: zero counterexamples.
struct ScanReport {
    std::size_t graphs_scanned = 0;
    std::size_t distinct_spectrum = 0;
    std::size_t order_checked = 0;
    std::size_t feature_checked = 0;  // graphs where a feature set met both conditions
    std::vector<ScanCounterexample> counterexamples;
    std::uint64_t seed = 0;
    bool pass() const { return counterexamples.empty(); }
};

ScanReport automorphism_scan(int n_max, std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Random features
// ---------------------------------------------------------------------------

struct SpectrumStatsReport {
    int samples = 0;
    double sigma = 0.0;
    double max_abs_mean = 0.0;
    double max_cov_err = 0.0;   // max |cov - sigma^2 I| entry
    double cov_bound = 0.0;     // 5 sigma^2 / sqrt(samples)
    double mean_bound = 0.0;    // 5 sigma / sqrt(samples)
    double max_parseval_err = 0.0;
    bool pass = false;
};

// Monte Carlo check that the GFT of N(0, sigma^2 I) noise is N(0, sigma^2 I).
SpectrumStatsReport random_feature_spectrum_test(const Spectrum& s, double sigma, int samples,
                                                 std::uint64_t seed);

struct RandomFeatureSolution {
    std::size_t augmented_cols = 0;  // sum of multiplicities
    Vector w_star;                   // over [X | G] columns
    Vector filter_values;            // g at each distinct eigenvalue
    Vector poly_coeffs;              // monomial-in-lambda interpolant
    double residual = 0.0;
    std::uint64_t seed_used = 0;
};

// Resolves eigenvalue multiplicities by augmenting X with Gaussian columns
// (one per multiplicity) and solving the block system: exact match on the
// multiple-eigenvalue rows, pointwise filter elsewhere. Resamples with an
// incremented seed if a sampled block is singular.
RandomFeatureSolution random_feature_universality(const Spectrum& s, const Matrix& x,
                                                  const Vector& z, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Bias counterexample (two isolated nodes + path)
// ---------------------------------------------------------------------------

struct BiasCounterexample {
    Graph graph;
    Matrix x;        // equal rows on the isolated pair
    Vector witness;  // (1,-1,0,...)/sqrt(2)
};

BiasCounterexample bias_counterexample(std::size_t n);

// max |witness^T (XW + 1b)| over `draws` random (W, b) with d_out columns
double bias_witness_deviation(const BiasCounterexample& c, int draws, std::size_t d_out,
                              std::uint64_t seed);

// ---------------------------------------------------------------------------
// Degree-limited interpolation bound
// ---------------------------------------------------------------------------

struct InterpBoundResult {
    double sup_error = 0.0;
    double bound = 0.0;
    double deriv_sup = 0.0;  // sup |h^(n+1)| used in the bound
    bool pass = false;
};

// Interpolates the filter at the n+1 Chebyshev points 1 + cos((2i+1)pi/(2n+2))
// and asserts the sup error on a 2001-point grid against
// deriv_sup / ((n+1)! 2^n). The derivative sup is 1 exactly for cos, analytic
// (Hermite-form) on a dense grid for the Gaussian filters, and a smooth-piece
// estimate pi^(n+1) for comb - whose kinks break the C^{n+1} assumption
// behind the bound, so its outcome is reported rather than guaranteed.
InterpBoundResult interpolation_bound_check(FilterId filter, int degree);

// ---------------------------------------------------------------------------
// Degree demand of random features (reported demonstration)
// ---------------------------------------------------------------------------

struct DegreeDemandReport {
    std::size_t n_distinct = 0;
    int required_degree = -1;  // -1: threshold never reached
    double rel_tol = 1e-3;
    double ratio = 0.0;  // required_degree / n_distinct
};

// Fits a degree-1-expressible target from Gaussian random features with
// least squares of growing degree; reports the degree needed to reach the
// relative residual threshold.
DegreeDemandReport random_feature_degree_demand(const Spectrum& s, std::uint64_t seed,
                                                double rel_tol = 1e-3);

// report serialization (counts, counterexamples, seeds)
void to_json(nlohmann::json& j, const ScanReport& r);
void to_json(nlohmann::json& j, const WlBoundReport& r);
void to_json(nlohmann::json& j, const SpectrumStatsReport& r);
void to_json(nlohmann::json& j, const InterpBoundResult& r);
void to_json(nlohmann::json& j, const DegreeDemandReport& r);

// shared polynomial helpers (exposed for tests)
std::vector<std::size_t> leja_order(const Vector& points);
// Newton interpolation through (points, values) expanded to monomial
// coefficients, using Leja ordering internally.
Vector interpolate_monomial(const Vector& points, const Vector& values);
double horner(const Vector& coeffs, double x);

}  // namespace sfl
