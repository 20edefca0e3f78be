#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "sfl/model.hpp"
#include "sfl/spectral.hpp"

namespace sfl {

// One synthetic filter-learning task: a smooth random field on a grid graph
// and its exactly-filtered target. Regenerates bit-identically from
// (seed, side, filter, index).
struct FilterTask {
    FilterId filter;
    int index = 0;
    std::uint64_t signal_seed = 0;
    Vector x;
    Vector y;
};

// Shared grid context: one eigendecomposition reused by every task.
struct FilterBench {
    std::size_t side = 0;
    std::uint64_t seed = 0;
    Graph grid;
    SymmetricOperator a_hat;
    Spectrum spectrum;
    std::vector<FilterTask> tasks;  // 5 filters x count, filter-major order
};

// `count` input signals per filter: Gaussian noise smoothed by exp(-2 lambda)
// and min-max scaled to [0,1]; targets from the exact spectral oracle.
FilterBench make_filter_tasks(std::size_t side, int count, std::uint64_t seed);

// regenerate a single task (bit-identical)
FilterTask make_filter_task(const FilterBench& ctx, FilterId filter, int index);

struct FilterRunResult {
    std::string basis;
    double jacobi_a = 0.0;
    double jacobi_b = 0.0;
    FilterId filter = FilterId::Low;
    int task_index = 0;
    std::uint64_t run_seed = 0;
    double final_sse = 0.0;  // recomputed from the restored best model
    int epochs_run = 0;
    bool diverged = false;
    std::vector<double> loss_curve;
};

struct JacobiChoice {
    FilterId filter;
    double a;
    double b;
    double holdout_sse;
};

struct BenchReport {
    std::size_t side = 0;
    int count = 0;
    std::uint64_t seed = 0;
    std::vector<JacobiChoice> jacobi_choices;  // per filter when tuned
    std::vector<FilterRunResult> runs;

    // median final SSE over tasks for one (basis, filter) pair
    double median_sse(const std::string& basis, FilterId filter) const;
};

// Trains a fresh single-channel linear GNN per (task, basis); Jacobi (a,b)
// tuned per filter on held-out tasks over `jacobi_grid` when tuning is
// enabled. Runs fan out over `jobs` threads with isolated seeds; the report
// is identical regardless of jobs.
BenchReport run_filter_bench(const FilterBench& bench, const std::vector<std::string>& bases,
                             int degree, const TrainConfig& cfg, bool tune_jacobi,
                             const std::vector<double>& jacobi_grid, int jobs);

// single run, exposing the trained model for self-consistency checks
FilterRunResult run_single_filter_task(const FilterBench& bench, const FilterTask& task,
                                       const BasisSpec& spec, const TrainConfig& cfg,
                                       std::uint64_t run_seed, LinearGnnModel* model_out = nullptr);

void save_bench_csv(const BenchReport& r, const std::string& path);
void save_curves_csv(const BenchReport& r, const std::string& path);
void to_json(nlohmann::json& j, const BenchReport& r);

// ---------------------------------------------------------------------------
// node classification
// ---------------------------------------------------------------------------

struct SplitMasks {
    std::vector<std::size_t> train, val, test;
    std::string hash;  // FNV over the index sequence
};

// seeded 60/20/20-style split; resampled (and logged) until every class
// appears in the training part
SplitMasks make_split(const Graph& g, const std::vector<double>& fractions, std::uint64_t seed,
                      std::vector<std::string>* warnings = nullptr);

struct ClassificationResult {
    std::vector<double> accuracies;
    std::vector<std::string> split_hashes;
    double mean = 0.0;
    double ci95 = 0.0;
    LinearGnnModel first_model;  // trained model of the first repeat
    SplitMasks first_split;
};

struct ModelOptions {
    BasisSpec spec;
    bool pcd = false;
    bool unifilter = false;
    bool bias = true;
    double gamma_prime = 1.0;
};

ClassificationResult run_node_classification(const Graph& g, const ModelOptions& opts,
                                             const TrainConfig& cfg,
                                             const std::vector<double>& fractions, int repeats,
                                             std::uint64_t seed,
                                             std::vector<std::string>* warnings = nullptr);

// ---------------------------------------------------------------------------
// ablation suite
// ---------------------------------------------------------------------------

struct AblationRow {
    std::string variant;
    double mean_acc = 0.0;
    double ci95 = 0.0;
    std::vector<double> accuracies;
};

struct AblationReport {
    std::vector<AblationRow> rows;  // JacobiConv, UniFilter, No-PCD, Monomial, Chebyshev, Bernstein
    std::vector<std::string> split_hashes;  // shared by every variant
};

AblationReport ablation_suite(const Graph& g, const TrainConfig& cfg, int degree, double jacobi_a,
                              double jacobi_b, double gamma_prime,
                              const std::vector<double>& fractions, int repeats,
                              std::uint64_t seed);

void to_json(nlohmann::json& j, const AblationReport& r);
void to_json(nlohmann::json& j, const ClassificationResult& r);

}  // namespace sfl
