#include "sfl/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>

#include "sfl/random.hpp"

namespace sfl {

namespace {

Vector smooth_signal(const FilterBench& ctx, std::uint64_t signal_seed) {
    const std::size_t n = ctx.grid.num_nodes();
    Rng rng(signal_seed);
    Vector noise(n);
    for (double& v : noise) v = rng.normal();
    Vector x = apply_exact_filter(
        ctx.spectrum, [](double lam) { return std::exp(-2.0 * lam); }, noise);
    double lo = x[0], hi = x[0];
    for (double v : x) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi > lo ? hi - lo : 1.0;
    for (double& v : x) v = (v - lo) / span;
    return x;
}

constexpr FilterId kBenchFilters[5] = {FilterId::Low, FilterId::High, FilterId::Band,
                                       FilterId::Reject, FilterId::Comb};

}  // namespace

FilterTask make_filter_task(const FilterBench& ctx, FilterId filter, int index) {
    FilterTask t;
    t.filter = filter;
    t.index = index;
    t.signal_seed = derive_seed(ctx.seed, static_cast<std::uint64_t>(filter),
                                static_cast<std::uint64_t>(index), ctx.side);
    t.x = smooth_signal(ctx, t.signal_seed);
    t.y = apply_exact_filter(ctx.spectrum, filter, t.x);
    return t;
}

FilterBench make_filter_tasks(std::size_t side, int count, std::uint64_t seed) {
    if (side < 4) throw InputError("make_filter_tasks: side must be >= 4");
    if (count < 1) throw InputError("make_filter_tasks: count must be >= 1");
    FilterBench ctx;
    ctx.side = side;
    ctx.seed = seed;
    ctx.grid = grid_graph(side, side);
    ctx.a_hat = normalized_adjacency(ctx.grid);
    ctx.spectrum = eigendecompose(normalized_laplacian(ctx.grid));
    for (FilterId f : kBenchFilters)
        for (int i = 0; i < count; ++i) ctx.tasks.push_back(make_filter_task(ctx, f, i));
    return ctx;
}

FilterRunResult run_single_filter_task(const FilterBench& bench, const FilterTask& task,
                                       const BasisSpec& spec, const TrainConfig& cfg,
                                       std::uint64_t run_seed, LinearGnnModel* model_out) {
    const std::size_t n = bench.grid.num_nodes();
    FilterRunResult res;
    res.basis = family_name(spec.family);
    res.jacobi_a = spec.a;
    res.jacobi_b = spec.b;
    res.filter = task.filter;
    res.task_index = task.index;
    res.run_seed = run_seed;

    LinearGnnModel m = init_model(1, 1, spec, /*pcd=*/false, /*unifilter=*/false,
                                  /*with_bias=*/true, run_seed);
    Matrix x(n, 1), y(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        x(i, 0) = task.x[i];
        y(i, 0) = task.y[i];
    }
    TrainTask tt;
    tt.a_hat = &bench.a_hat;
    tt.x = &x;
    tt.y = &y;
    tt.train_mask.resize(n);
    for (std::size_t i = 0; i < n; ++i) tt.train_mask[i] = i;

    TrainConfig run_cfg = cfg;
    run_cfg.seed = run_seed;
    run_cfg.loss = LossKind::Squared;
    try {
        TrainResult tr = train(m, tt, run_cfg);
        res.epochs_run = static_cast<int>(tr.history.size());
        res.loss_curve.reserve(tr.history.size());
        for (const auto& h : tr.history) res.loss_curve.push_back(h.train_loss);
        // SSE (no 1/2) recomputed from the restored best model
        Matrix z = forward(m, bench.a_hat, x);
        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = z(i, 0) - y(i, 0);
            sse += d * d;
        }
        res.final_sse = sse;
    } catch (const NumericError&) {
        res.diverged = true;
        res.final_sse = std::numeric_limits<double>::infinity();
    }
    if (model_out) *model_out = std::move(m);
    return res;
}

double BenchReport::median_sse(const std::string& basis, FilterId filter) const {
    Vector v;
    for (const auto& r : runs)
        if (r.basis == basis && r.filter == filter) v.push_back(r.final_sse);
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

namespace {

// fixed-size parallel for with deterministic slot assignment
void parallel_runs(std::size_t total, int jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || total <= 1) {
        for (std::size_t i = 0; i < total; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= total) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    const int nthreads = std::min<int>(jobs, static_cast<int>(total));
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

}  // namespace

BenchReport run_filter_bench(const FilterBench& bench, const std::vector<std::string>& bases,
                             int degree, const TrainConfig& cfg, bool tune_jacobi,
                             const std::vector<double>& jacobi_grid, int jobs) {
    if (bench.tasks.empty()) throw InputError("run_filter_bench: no tasks");
    BenchReport rep;
    rep.side = bench.side;
    rep.seed = cfg.seed;
    rep.count = 0;
    for (const auto& t : bench.tasks)
        if (t.filter == FilterId::Low) ++rep.count;

    // per-filter Jacobi (a, b) selection on held-out tasks
    std::vector<std::pair<double, double>> selected(5, {1.0, 1.0});
    const bool wants_jacobi = std::find(bases.begin(), bases.end(), "jacobi") != bases.end();
    if (wants_jacobi && tune_jacobi && !jacobi_grid.empty()) {
        // one unlucky init swings a run's final SSE by orders of magnitude
        // (the W * alpha product has a saddle at W = 0), so score each (a, b)
        // by the median over tasks x init seeds
        const int holdout_count = 3;
        const int init_seeds = 2;
        std::vector<FilterTask> holdout;
        for (FilterId f : kBenchFilters)
            for (int i = 0; i < holdout_count; ++i)
                holdout.push_back(make_filter_task(bench, f, 100000 + i));

        struct Combo {
            double a, b;
            std::size_t filter_idx;
            int task_idx;
            int seed_idx;
        };
        std::vector<Combo> combos;
        for (double a : jacobi_grid)
            for (double b : jacobi_grid)
                for (std::size_t fi = 0; fi < 5; ++fi)
                    for (int ti = 0; ti < holdout_count; ++ti)
                        for (int si = 0; si < init_seeds; ++si) combos.push_back({a, b, fi, ti, si});
        std::vector<double> sse(combos.size(), 0.0);
        parallel_runs(combos.size(), jobs, [&](std::size_t ci) {
            const Combo& c = combos[ci];
            BasisSpec spec;
            spec.family = BasisFamily::Jacobi;
            spec.degree = degree;
            spec.a = c.a;
            spec.b = c.b;
            const FilterTask& task = holdout[c.filter_idx * holdout_count +
                                             static_cast<std::size_t>(c.task_idx)];
            const std::uint64_t rs = derive_seed(cfg.seed, 0x7E57, ci);
            sse[ci] = run_single_filter_task(bench, task, spec, cfg, rs).final_sse;
        });
        for (std::size_t fi = 0; fi < 5; ++fi) {
            double best = std::numeric_limits<double>::infinity();
            std::pair<double, double> best_ab{1.0, 1.0};
            for (double a : jacobi_grid)
                for (double b : jacobi_grid) {
                    Vector scores;
                    for (std::size_t ci = 0; ci < combos.size(); ++ci)
                        if (combos[ci].a == a && combos[ci].b == b && combos[ci].filter_idx == fi)
                            scores.push_back(sse[ci]);
                    std::sort(scores.begin(), scores.end());
                    const std::size_t mid = scores.size() / 2;
                    const double med =
                        scores.size() % 2 ? scores[mid] : 0.5 * (scores[mid - 1] + scores[mid]);
                    if (med < best) {
                        best = med;
                        best_ab = {a, b};
                    }
                }
            selected[fi] = best_ab;
            rep.jacobi_choices.push_back({kBenchFilters[fi], best_ab.first, best_ab.second, best});
        }
    } else if (wants_jacobi) {
        for (std::size_t fi = 0; fi < 5; ++fi)
            rep.jacobi_choices.push_back({kBenchFilters[fi], 1.0, 1.0, 0.0});
    }

    struct Slot {
        std::size_t basis_idx;
        std::size_t task_idx;
    };
    std::vector<Slot> slots;
    for (std::size_t bi = 0; bi < bases.size(); ++bi)
        for (std::size_t ti = 0; ti < bench.tasks.size(); ++ti) slots.push_back({bi, ti});
    rep.runs.resize(slots.size());

    parallel_runs(slots.size(), jobs, [&](std::size_t si) {
        const Slot& sl = slots[si];
        const FilterTask& task = bench.tasks[sl.task_idx];
        BasisSpec spec;
        spec.family = family_from_name(bases[sl.basis_idx]);
        spec.degree = degree;
        if (spec.family == BasisFamily::Jacobi) {
            std::size_t fi = 0;
            while (kBenchFilters[fi] != task.filter) ++fi;
            spec.a = selected[fi].first;
            spec.b = selected[fi].second;
        }
        // init seed shared across bases for the same task: paired comparisons
        const std::uint64_t rs = derive_seed(cfg.seed, 0x52EED, sl.task_idx);
        rep.runs[si] = run_single_filter_task(bench, task, spec, cfg, rs);
    });
    return rep;
}

void save_bench_csv(const BenchReport& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write bench csv: " + path);
    out << "basis,filter,task,seed,final_sse\n";
    out.precision(17);
    for (const auto& run : r.runs)
        out << run.basis << "," << filter_name(run.filter) << "," << run.task_index << ","
            << run.run_seed << "," << run.final_sse << "\n";
}

void save_curves_csv(const BenchReport& r, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write curves csv: " + path);
    out << "basis,filter,task,epoch,train_loss\n";
    out.precision(17);
    for (const auto& run : r.runs)
        for (std::size_t e = 0; e < run.loss_curve.size(); ++e)
            out << run.basis << "," << filter_name(run.filter) << "," << run.task_index << "," << e
                << "," << run.loss_curve[e] << "\n";
}

void to_json(nlohmann::json& j, const BenchReport& r) {
    j = nlohmann::json{{"side", r.side}, {"count", r.count}, {"seed", r.seed}};
    j["jacobi_choices"] = nlohmann::json::array();
    for (const auto& c : r.jacobi_choices)
        j["jacobi_choices"].push_back({{"filter", filter_name(c.filter)},
                                       {"a", c.a},
                                       {"b", c.b},
                                       {"holdout_sse", c.holdout_sse}});
    j["runs"] = nlohmann::json::array();
    for (const auto& run : r.runs)
        j["runs"].push_back({{"basis", run.basis},
                             {"a", run.jacobi_a},
                             {"b", run.jacobi_b},
                             {"filter", filter_name(run.filter)},
                             {"task", run.task_index},
                             {"seed", run.run_seed},
                             {"final_sse", run.final_sse},
                             {"epochs", run.epochs_run},
                             {"diverged", run.diverged}});
}

// ---------------------------------------------------------------------------
// node classification
// ---------------------------------------------------------------------------

namespace {

std::string indices_hash(const SplitMasks& m) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::size_t v) {
        for (int byte = 0; byte < 8; ++byte) {
            h ^= (static_cast<std::uint64_t>(v) >> (8 * byte)) & 0xFF;
            h *= 0x100000001b3ULL;
        }
    };
    for (std::size_t v : m.train) mix(v);
    mix(~0ULL);
    for (std::size_t v : m.val) mix(v);
    mix(~0ULL);
    for (std::size_t v : m.test) mix(v);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace

SplitMasks make_split(const Graph& g, const std::vector<double>& fractions, std::uint64_t seed,
                      std::vector<std::string>* warnings) {
    if (fractions.size() != 3) throw InputError("make_split: need three fractions");
    if (!g.has_labels()) throw InputError("make_split: graph has no labels");
    const std::size_t n = g.num_nodes();
    const int classes = g.num_classes();

    for (std::uint64_t attempt = 0;; ++attempt) {
        if (attempt > 100) throw NumericError("make_split: cannot cover every class in train");
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        Rng rng(derive_seed(seed, 0x5197, attempt));
        rng.shuffle(perm);
        const std::size_t n_train = static_cast<std::size_t>(fractions[0] * static_cast<double>(n));
        const std::size_t n_val = static_cast<std::size_t>(fractions[1] * static_cast<double>(n));
        SplitMasks m;
        m.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
        m.val.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
                     perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
        m.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), perm.end());

        std::vector<char> seen(static_cast<std::size_t>(classes), 0);
        for (std::size_t i : m.train) seen[static_cast<std::size_t>(g.labels()[i])] = 1;
        bool all = std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
        if (!all) {
            if (warnings)
                warnings->push_back("make_split: class missing from train split, resampling");
            continue;
        }
        m.hash = indices_hash(m);
        return m;
    }
}

ClassificationResult run_node_classification(const Graph& g, const ModelOptions& opts,
                                             const TrainConfig& cfg,
                                             const std::vector<double>& fractions, int repeats,
                                             std::uint64_t seed,
                                             std::vector<std::string>* warnings) {
    if (!g.has_labels() || !g.has_features())
        throw InputError("run_node_classification: graph needs features and labels");
    if (repeats < 1) throw InputError("run_node_classification: repeats must be >= 1");

    ClassificationResult res;
    SymmetricOperator a_hat = normalized_adjacency(g);
    const std::size_t d = g.features().cols();
    const std::size_t classes = static_cast<std::size_t>(g.num_classes());

    for (int rep = 0; rep < repeats; ++rep) {
        SplitMasks split = make_split(g, fractions, derive_seed(seed, 0x0DD, rep), warnings);
        LinearGnnModel m = init_model(d, classes, opts.spec, opts.pcd, opts.unifilter, opts.bias,
                                      derive_seed(seed, 0x111, rep), opts.gamma_prime);
        TrainTask task;
        task.a_hat = &a_hat;
        task.x = &g.features();
        task.labels = &g.labels();
        task.train_mask = split.train;
        task.val_mask = split.val;
        task.test_mask = split.test;
        TrainConfig run_cfg = cfg;
        run_cfg.loss = LossKind::SoftmaxCE;
        run_cfg.seed = derive_seed(seed, 0x7A1, rep);
        train(m, task, run_cfg);
        const double acc = evaluate_accuracy(m, a_hat, g.features(), g.labels(), split.test);
        res.accuracies.push_back(acc);
        res.split_hashes.push_back(split.hash);
        if (rep == 0) {
            res.first_model = m;
            res.first_split = split;
        }
    }
    double mean = 0.0;
    for (double a : res.accuracies) mean += a;
    mean /= static_cast<double>(res.accuracies.size());
    double var = 0.0;
    for (double a : res.accuracies) var += (a - mean) * (a - mean);
    var = res.accuracies.size() > 1 ? var / static_cast<double>(res.accuracies.size() - 1) : 0.0;
    res.mean = mean;
    res.ci95 = 1.96 * std::sqrt(var / static_cast<double>(res.accuracies.size()));
    return res;
}

AblationReport ablation_suite(const Graph& g, const TrainConfig& cfg, int degree, double jacobi_a,
                              double jacobi_b, double gamma_prime,
                              const std::vector<double>& fractions, int repeats,
                              std::uint64_t seed) {
    BasisSpec jacobi;
    jacobi.family = BasisFamily::Jacobi;
    jacobi.degree = degree;
    jacobi.a = jacobi_a;
    jacobi.b = jacobi_b;
    auto with_family = [degree](BasisFamily f) {
        BasisSpec s;
        s.family = f;
        s.degree = degree;
        return s;
    };

    struct Variant {
        std::string name;
        ModelOptions opts;
    };
    std::vector<Variant> variants;
    variants.push_back({"JacobiConv", {jacobi, true, false, true, gamma_prime}});
    variants.push_back({"UniFilter", {jacobi, true, true, true, gamma_prime}});
    variants.push_back({"No-PCD", {jacobi, false, false, true, gamma_prime}});
    variants.push_back({"Monomial", {with_family(BasisFamily::Monomial), false, false, true, 1.0}});
    variants.push_back({"Chebyshev", {with_family(BasisFamily::Chebyshev), false, false, true, 1.0}});
    variants.push_back({"Bernstein", {with_family(BasisFamily::Bernstein), false, false, true, 1.0}});

    AblationReport rep;
    for (const auto& v : variants) {
        // identical `seed` means identical splits and init streams across variants
        ClassificationResult r =
            run_node_classification(g, v.opts, cfg, fractions, repeats, seed);
        if (rep.split_hashes.empty())
            rep.split_hashes = r.split_hashes;
        else if (rep.split_hashes != r.split_hashes)
            throw NumericError("ablation_suite: split hashes diverged across variants");
        rep.rows.push_back({v.name, r.mean, r.ci95, r.accuracies});
    }
    return rep;
}

void to_json(nlohmann::json& j, const AblationReport& r) {
    j = nlohmann::json::object();
    j["split_hashes"] = r.split_hashes;
    j["rows"] = nlohmann::json::array();
    for (const auto& row : r.rows)
        j["rows"].push_back({{"variant", row.variant},
                             {"mean_acc", row.mean_acc},
                             {"ci95", row.ci95},
                             {"accuracies", row.accuracies}});
}

void to_json(nlohmann::json& j, const ClassificationResult& r) {
    j = nlohmann::json{{"mean_acc", r.mean},
                       {"ci95", r.ci95},
                       {"accuracies", r.accuracies},
                       {"split_hashes", r.split_hashes}};
}

}  // namespace sfl
