#include "sfl/theory.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "sfl/random.hpp"

#include "dd.hpp"

namespace sfl {

// ---------------------------------------------------------------------------
// WL refinement
// ---------------------------------------------------------------------------

WlColoring wl_refine(const Graph& g, const std::vector<long long>& init_labels, int iters) {
    if (init_labels.size() != g.num_nodes())
        throw std::invalid_argument("wl_refine: label count mismatch");
    if (iters < 0) throw InputError("wl_refine: iters must be >= 0");
    const std::size_t n = g.num_nodes();

    WlColoring col;
    col.iterations = iters;
    // dense recode of the initial labels, ids in order of first appearance
    std::vector<int> cur(n);
    {
        std::map<long long, int> recode;
        for (std::size_t i = 0; i < n; ++i) {
            auto [it, fresh] = recode.try_emplace(init_labels[i], static_cast<int>(recode.size()));
            (void)fresh;
            cur[i] = it->second;
        }
    }
    col.labels.push_back(cur);

    for (int t = 0; t < iters; ++t) {
        std::map<std::pair<int, std::vector<int>>, int> recode;
        std::vector<int> next(n);
        for (std::size_t i = 0; i < n; ++i) {
            auto [lo, hi] = g.neighbors(i);
            std::vector<int> multiset;
            multiset.reserve(static_cast<std::size_t>(hi - lo));
            for (const std::size_t* p = lo; p != hi; ++p) multiset.push_back(cur[*p]);
            std::sort(multiset.begin(), multiset.end());
            auto [it, fresh] = recode.try_emplace({cur[i], std::move(multiset)},
                                                  static_cast<int>(recode.size()));
            (void)fresh;
            next[i] = it->second;
        }
        cur = std::move(next);
        col.labels.push_back(cur);
    }
    return col;
}

std::vector<long long> quantize_feature_labels(const Matrix& x, double grid) {
    // hash quantized feature rows into 64-bit initial labels
    std::vector<long long> out(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (std::size_t j = 0; j < x.cols(); ++j) {
            const long long q = static_cast<long long>(std::llround(x(i, j) / grid));
            std::uint64_t u = static_cast<std::uint64_t>(q);
            for (int byte = 0; byte < 8; ++byte) {
                h ^= (u >> (8 * byte)) & 0xFF;
                h *= 0x100000001b3ULL;
            }
        }
        out[i] = static_cast<long long>(h);
    }
    return out;
}

WlBoundReport wl_bound_check(const Graph& g, const Matrix& x, int degree, int trials,
                             std::uint64_t seed) {
    WlBoundReport rep;
    rep.trials = trials;
    const std::size_t n = g.num_nodes();
    WlColoring col = wl_refine(g, quantize_feature_labels(x), degree + 1);
    const std::vector<int>& wl = col.labels.back();

    // group nodes by final WL label
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) groups[wl[i]].push_back(i);

    SymmetricOperator a_hat = normalized_adjacency(g);
    BasisSpec mono;
    mono.family = BasisFamily::Monomial;
    mono.degree = degree;

    for (int t = 0; t < trials; ++t) {
        Rng rng(derive_seed(seed, 0x31B0, static_cast<std::uint64_t>(t)));
        Vector w(x.cols());
        for (double& v : w) v = rng.normal();
        Vector xw = matvec(x, w);
        std::vector<Vector> basis = apply_basis(mono, a_hat, xw);
        Vector out(n, 0.0);
        for (const Vector& bk : basis) {
            const double theta = rng.normal();
            axpy(theta, bk, out);
        }
        double scale = 1.0;
        for (double v : out) scale = std::max(scale, std::fabs(v));
        for (const auto& [label, members] : groups) {
            if (members.size() < 2) continue;
            double lo = out[members[0]], hi = out[members[0]];
            for (std::size_t i : members) {
                lo = std::min(lo, out[i]);
                hi = std::max(hi, out[i]);
            }
            const double gap = (hi - lo) / scale;
            rep.max_group_gap = std::max(rep.max_group_gap, gap);
            if (gap > 1e-8) ++rep.violations;
        }
    }
    rep.pass = rep.violations == 0;
    return rep;
}

// ---------------------------------------------------------------------------
// polynomial helpers
// ---------------------------------------------------------------------------

std::vector<std::size_t> leja_order(const Vector& points) {
    const std::size_t n = points.size();
    std::vector<std::size_t> order;
    order.reserve(n);
    std::vector<char> used(n, 0);
    // start from the largest magnitude point
    std::size_t first = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (std::fabs(points[i]) > std::fabs(points[first])) first = i;
    order.push_back(first);
    used[first] = 1;
    // log-product greedy to avoid underflow
    std::vector<double> logprod(n, 0.0);
    for (std::size_t step = 1; step < n; ++step) {
        const double last = points[order.back()];
        std::size_t best = n;
        double best_lp = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            if (used[i]) continue;
            const double d = std::fabs(points[i] - last);
            logprod[i] += std::log(std::max(d, 1e-300));
            if (logprod[i] > best_lp) {
                best_lp = logprod[i];
                best = i;
            }
        }
        order.push_back(best);
        used[best] = 1;
    }
    return order;
}

Vector interpolate_monomial(const Vector& points, const Vector& values) {
    using detail::dd;
    const std::size_t n = points.size();
    if (values.size() != n || n == 0)
        throw std::invalid_argument("interpolate_monomial: bad inputs");
    std::vector<std::size_t> ord = leja_order(points);
    std::vector<dd> x(n), f(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = dd(points[ord[i]]);
        f[i] = dd(values[ord[i]]);
    }
    // divided differences in place: f[j] becomes f[x_0..x_j]. Clustered
    // nodes make these (and the expansion below) blow up far past double
    // precision, hence the double-double carry.
    for (std::size_t j = 1; j < n; ++j)
        for (std::size_t i = n - 1; i >= j; --i) {
            f[i] = detail::div(detail::sub(f[i], f[i - 1]), detail::sub(x[i], x[i - j]));
            if (i == j) break;
        }
    // expand the Newton form into monomial coefficients
    std::vector<dd> coeffs(n), omega(n + 1);
    omega[0] = dd(1.0);
    std::size_t omega_len = 1;
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t m = 0; m < omega_len; ++m)
            coeffs[m] = detail::add(coeffs[m], detail::mul(f[j], omega[m]));
        // omega *= (t - x_j)
        for (std::size_t m = omega_len; m-- > 0;) {
            omega[m + 1] = detail::add(omega[m + 1], omega[m]);
            omega[m] = detail::mul(omega[m], dd(-points[ord[j]]));
        }
        ++omega_len;
    }
    Vector out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = coeffs[i].value();
    return out;
}

double horner(const Vector& coeffs, double x) {
    // compensated evaluation: the coefficients are plain doubles, the
    // accumulation is double-double so cancellation does not add error
    detail::dd r(0.0);
    for (std::size_t i = coeffs.size(); i-- > 0;)
        r = detail::add(detail::mul(r, detail::dd(x)), detail::dd(coeffs[i]));
    return r.value();
}

// ---------------------------------------------------------------------------
// constructive universality
// ---------------------------------------------------------------------------

UniversalitySolution universality_solve(const Spectrum& s, const Matrix& x, const Vector& z,
                                        std::uint64_t seed) {
    const std::size_t n = s.size();
    if (x.rows() != n || z.size() != n)
        throw std::invalid_argument("universality_solve: dimension mismatch");
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (s.values[i + 1] - s.values[i] <= 1e-8)
            throw InputError("universality_solve: multiple eigenvalues (gap <= 1e-8 at index " +
                             std::to_string(i) + ")");
    Matrix xt = gft(s, x);
    for (std::size_t i = 0; i < n; ++i) {
        double rn = 0.0;
        for (std::size_t j = 0; j < xt.cols(); ++j) rn += xt(i, j) * xt(i, j);
        if (std::sqrt(rn) <= 1e-8)
            throw InputError("universality_solve: missing frequency component at index " +
                             std::to_string(i));
    }

    // randomized W*: keep the candidate maximizing min |(X~ W*)_i| over a
    // seeded batch - near-zero rows turn into ratio spikes that the
    // interpolation then has to chase
    Vector w(x.cols()), v(n);
    double best_minabs = -1.0;
    Vector cand(x.cols());
    for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
        Rng rng(derive_seed(seed, 0x0571, attempt));
        for (double& wi : cand) wi = rng.normal();
        const double nc = norm2(cand);
        for (double& wi : cand) wi /= nc;
        Vector vc = matvec(xt, cand);
        double minabs = std::numeric_limits<double>::infinity();
        for (double vi : vc) minabs = std::min(minabs, std::fabs(vi));
        if (minabs > best_minabs) {
            best_minabs = minabs;
            w = cand;
            v = std::move(vc);
        }
    }
    if (best_minabs <= 1e-10)
        throw NumericError("universality_solve: could not find W* clearing 1e-10");

    Vector zt = gft(s, z);
    Vector ratio(n);
    for (std::size_t i = 0; i < n; ++i) ratio[i] = zt[i] / v[i];

    UniversalitySolution sol;
    sol.w_star = w;
    sol.poly_coeffs = interpolate_monomial(s.values, ratio);

    // verify from the returned representation
    Vector zhat_t(n);
    for (std::size_t i = 0; i < n; ++i) zhat_t[i] = horner(sol.poly_coeffs, s.values[i]) * v[i];
    Vector zhat = igft(s, zhat_t);
    double err = 0.0, nz = norm2(z);
    for (std::size_t i = 0; i < n; ++i) err += (zhat[i] - z[i]) * (zhat[i] - z[i]);
    sol.residual = nz > 0.0 ? std::sqrt(err) / nz : std::sqrt(err);
    return sol;
}

// ---------------------------------------------------------------------------
// automorphisms
// ---------------------------------------------------------------------------

namespace {

int permutation_order(const std::vector<std::size_t>& perm) {
    const std::size_t n = perm.size();
    std::vector<char> seen(n, 0);
    long long order = 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (seen[i]) continue;
        std::size_t len = 0, j = i;
        while (!seen[j]) {
            seen[j] = 1;
            j = perm[j];
            ++len;
        }
        order = std::lcm(order, static_cast<long long>(len));
    }
    return static_cast<int>(order);
}

bool is_automorphism(const Graph& g, const std::vector<std::size_t>& perm, const Matrix* x) {
    const std::size_t n = g.num_nodes();
    for (std::size_t u = 0; u < n; ++u) {
        if (g.degree(u) != g.degree(perm[u])) return false;
        auto [lo, hi] = g.neighbors(u);
        for (const std::size_t* p = lo; p != hi; ++p)
            if (!g.has_edge(perm[u], perm[*p])) return false;
    }
    if (x) {
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t j = 0; j < x->cols(); ++j)
                if ((*x)(u, j) != (*x)(perm[u], j)) return false;
    }
    return true;
}

}  // namespace

std::set<int> automorphism_orders(const Graph& g, const Matrix* x) {
    const std::size_t n = g.num_nodes();
    if (n > 8) throw InputError("automorphism_orders: brute force capped at n <= 8");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::set<int> orders;
    do {
        if (is_automorphism(g, perm, x)) orders.insert(permutation_order(perm));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return orders;
}

namespace {

Graph graph_from_mask(std::size_t n, std::uint64_t mask) {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::size_t bit = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j, ++bit)
            if (mask & (1ULL << bit)) edges.emplace_back(i, j);
    return Graph(n, std::move(edges));
}

void scan_one_graph(std::size_t n, std::uint64_t mask, std::uint64_t seed, ScanReport& rep) {
    Graph g = graph_from_mask(n, mask);
    ++rep.graphs_scanned;
    Spectrum s = eigendecompose(normalized_laplacian(g));
    bool distinct = true;
    for (std::size_t i = 0; i + 1 < s.size(); ++i)
        if (s.values[i + 1] - s.values[i] <= 1e-8) {
            distinct = false;
            break;
        }
    if (!distinct) return;
    ++rep.distinct_spectrum;

    std::set<int> orders = automorphism_orders(g, nullptr);
    ++rep.order_checked;
    if (!orders.empty() && *orders.rbegin() >= 3)
        rep.counterexamples.push_back({n, g.edge_list(), "order>=3"});

    // feature variant: constant column (adversarial) and a Gaussian column
    Matrix ones(n, 1, 1.0);
    Matrix gauss(n, 1);
    Rng rng(derive_seed(seed, mask, n));
    for (double& v : gauss.data()) v = rng.normal();
    for (const Matrix* x : {&ones, &gauss}) {
        Vector energy = spectral_energy(s, *x);
        bool full = true;
        for (double e : energy)
            if (std::sqrt(e) <= 1e-8) {
                full = false;
                break;
            }
        if (!full) continue;  // missing component: the identity-only claim needs full spectrum
        ++rep.feature_checked;
        std::set<int> forders = automorphism_orders(g, x);
        if (forders != std::set<int>{1})
            rep.counterexamples.push_back({n, g.edge_list(), "nontrivial-automorphism"});
    }
}

}  // namespace

ScanReport automorphism_scan(int n_max, std::uint64_t seed) {
    if (n_max < 1 || n_max > 7) throw InputError("automorphism_scan: n_max must be in [1, 7]");
    ScanReport rep;
    rep.seed = seed;
    for (std::size_t n = 2; n <= static_cast<std::size_t>(n_max); ++n) {
        const std::size_t pairs = n * (n - 1) / 2;
        if (n <= 6) {
            const std::uint64_t total = 1ULL << pairs;
            for (std::uint64_t mask = 0; mask < total; ++mask) scan_one_graph(n, mask, seed, rep);
        } else {
            // seeded sample when exhaustive enumeration is infeasible
            Rng rng(derive_seed(seed, 0x5CA7, n));
            for (int t = 0; t < 10000; ++t)
                scan_one_graph(n, rng.next_u64() & ((1ULL << pairs) - 1), seed, rep);
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// random features
// ---------------------------------------------------------------------------

SpectrumStatsReport random_feature_spectrum_test(const Spectrum& s, double sigma, int samples,
                                                 std::uint64_t seed) {
    if (samples < 1000) throw InputError("random_feature_spectrum_test: samples must be >= 1000");
    const std::size_t n = s.size();
    SpectrumStatsReport rep;
    rep.samples = samples;
    rep.sigma = sigma;
    rep.cov_bound = 5.0 * sigma * sigma / std::sqrt(static_cast<double>(samples));
    rep.mean_bound = 5.0 * sigma / std::sqrt(static_cast<double>(samples));

    Rng rng(derive_seed(seed, 0xFA57));
    Vector mean(n, 0.0);
    Matrix cov(n, n, 0.0);
    Vector x(n);
    for (int t = 0; t < samples; ++t) {
        for (double& v : x) v = rng.normal(0.0, sigma);
        Vector xt = gft(s, x);
        rep.max_parseval_err =
            std::max(rep.max_parseval_err, std::fabs(norm2(xt) - norm2(x)));
        for (std::size_t i = 0; i < n; ++i) {
            mean[i] += xt[i];
            for (std::size_t j = i; j < n; ++j) cov(i, j) += xt[i] * xt[j];
        }
    }
    const double inv = 1.0 / static_cast<double>(samples);
    for (std::size_t i = 0; i < n; ++i) {
        rep.max_abs_mean = std::max(rep.max_abs_mean, std::fabs(mean[i] * inv));
        for (std::size_t j = i; j < n; ++j) {
            const double c = cov(i, j) * inv - (i == j ? sigma * sigma : 0.0);
            rep.max_cov_err = std::max(rep.max_cov_err, std::fabs(c));
        }
    }
    rep.pass = rep.max_cov_err <= rep.cov_bound && rep.max_abs_mean <= rep.mean_bound;
    return rep;
}

RandomFeatureSolution random_feature_universality(const Spectrum& s, const Matrix& x,
                                                  const Vector& z, std::uint64_t seed) {
    const std::size_t n = s.size();
    if (x.rows() != n || z.size() != n)
        throw std::invalid_argument("random_feature_universality: dimension mismatch");

    Vector zt = gft(s, z);
    const double nz = norm2(z);
    for (std::size_t i = 0; i < n; ++i)
        if (std::fabs(zt[i]) <= 1e-12 * std::max(1.0, nz))
            throw InputError("random_feature_universality: target misses frequency component " +
                             std::to_string(i));

    std::vector<EigenvalueGroup> groups = eigenvalue_groups(s.values);
    std::vector<std::size_t> multi_rows;
    for (const auto& g : groups)
        if (g.size() > 1)
            for (std::size_t i = g.begin; i < g.end; ++i) multi_rows.push_back(i);
    const std::size_t aug = multi_rows.size();

    if (aug == 0) {
        UniversalitySolution u = universality_solve(s, x, z, seed);
        RandomFeatureSolution out;
        out.augmented_cols = 0;
        out.w_star = u.w_star;
        out.poly_coeffs = u.poly_coeffs;
        out.filter_values.resize(groups.size());
        for (std::size_t gi = 0; gi < groups.size(); ++gi)
            out.filter_values[gi] = horner(u.poly_coeffs, groups[gi].value);
        out.residual = u.residual;
        out.seed_used = seed;
        return out;
    }

    const std::size_t d = x.cols() + aug;
    for (std::uint64_t attempt = 0;; ++attempt) {
        if (attempt >= 50)
            throw NumericError("random_feature_universality: no usable sample after 50 attempts");
        const std::uint64_t cur = seed + attempt;
        Rng rng(derive_seed(cur, 0xA06));
        Matrix xa(n, d);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < x.cols(); ++j) xa(i, j) = x(i, j);
            for (std::size_t j = x.cols(); j < d; ++j) xa(i, j) = rng.normal();
        }
        Matrix xat = gft(s, xa);

        // block solve: rows with multiple eigenvalues get filter value 1, so
        // X~ W must reproduce z~ there; min-norm solution via the Gram system
        Matrix m(aug, d);
        Vector rhs(aug);
        for (std::size_t r = 0; r < aug; ++r) {
            for (std::size_t j = 0; j < d; ++j) m(r, j) = xat(multi_rows[r], j);
            rhs[r] = zt[multi_rows[r]];
        }
        Vector w;
        try {
            Matrix mmt(aug, aug, 0.0);
            for (std::size_t r1 = 0; r1 < aug; ++r1)
                for (std::size_t r2 = 0; r2 < aug; ++r2) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < d; ++j) acc += m(r1, j) * m(r2, j);
                    mmt(r1, r2) = acc;
                }
            Vector y = solve_linear(std::move(mmt), rhs);
            w.assign(d, 0.0);
            for (std::size_t r = 0; r < aug; ++r)
                for (std::size_t j = 0; j < d; ++j) w[j] += m(r, j) * y[r];
        } catch (const std::runtime_error&) {
            continue;  // singular sampled block: resample
        }

        Vector v = matvec(xat, w);
        // filter values per distinct eigenvalue
        Vector fvals(groups.size());
        Vector lambdas(groups.size());
        bool usable = true;
        for (std::size_t gi = 0; gi < groups.size(); ++gi) {
            lambdas[gi] = groups[gi].value;
            if (groups[gi].size() > 1) {
                fvals[gi] = 1.0;
            } else {
                const std::size_t i = groups[gi].begin;
                if (std::fabs(v[i]) <= 1e-10) {
                    usable = false;
                    break;
                }
                fvals[gi] = zt[i] / v[i];
            }
        }
        if (!usable) continue;

        RandomFeatureSolution out;
        out.augmented_cols = aug;
        out.w_star = w;
        out.filter_values = fvals;
        out.poly_coeffs = interpolate_monomial(lambdas, fvals);
        out.seed_used = cur;

        Vector zhat_t(n);
        for (std::size_t gi = 0; gi < groups.size(); ++gi)
            for (std::size_t i = groups[gi].begin; i < groups[gi].end; ++i)
                zhat_t[i] = horner(out.poly_coeffs, s.values[i]) * v[i];
        Vector zhat = igft(s, zhat_t);
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) err += (zhat[i] - z[i]) * (zhat[i] - z[i]);
        out.residual = nz > 0.0 ? std::sqrt(err) / nz : std::sqrt(err);
        if (out.residual > 1e-6) continue;  // pathological sample: resample
        return out;
    }
}

// ---------------------------------------------------------------------------
// bias counterexample
// ---------------------------------------------------------------------------

BiasCounterexample bias_counterexample(std::size_t n) {
    if (n < 4) throw InputError("bias_counterexample: n must be >= 4");
    // nodes 0, 1 isolated; 2..n-1 a path
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 2; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    BiasCounterexample c;
    c.graph = Graph(n, std::move(edges));
    c.x = Matrix(n, 1);
    c.x(0, 0) = 1.0;
    c.x(1, 0) = 1.0;
    for (std::size_t i = 2; i < n; ++i) c.x(i, 0) = static_cast<double>(i);
    c.witness.assign(n, 0.0);
    c.witness[0] = 1.0 / std::sqrt(2.0);
    c.witness[1] = -1.0 / std::sqrt(2.0);
    return c;
}

double bias_witness_deviation(const BiasCounterexample& c, int draws, std::size_t d_out,
                              std::uint64_t seed) {
    const std::size_t n = c.graph.num_nodes();
    const std::size_t d = c.x.cols();
    double worst = 0.0;
    for (int t = 0; t < draws; ++t) {
        Rng rng(derive_seed(seed, 0xB1A5, static_cast<std::uint64_t>(t)));
        Matrix w(d, d_out);
        for (double& v : w.data()) v = rng.normal();
        Vector b(d_out);
        for (double& v : b) v = rng.normal();
        Matrix y = matmul(c.x, w);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t l = 0; l < d_out; ++l) y(i, l) += b[l];
        for (std::size_t l = 0; l < d_out; ++l) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += c.witness[i] * y(i, l);
            worst = std::max(worst, std::fabs(acc));
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// interpolation bound
// ---------------------------------------------------------------------------

namespace {

// polynomial factor P_m with d^m/du^m e^{-a u^2} = P_m(u) e^{-a u^2},
// via P_{m+1} = P_m' - 2 a u P_m
Vector gaussian_deriv_factor(double a, int m) {
    Vector p{1.0};
    for (int i = 0; i < m; ++i) {
        Vector next(p.size() + 1, 0.0);
        for (std::size_t j = 1; j < p.size(); ++j) next[j - 1] += static_cast<double>(j) * p[j];
        for (std::size_t j = 0; j < p.size(); ++j) next[j + 1] -= 2.0 * a * p[j];
        p = std::move(next);
    }
    return p;
}

double filter_deriv_sup(FilterId f, int order) {
    switch (f) {
        case FilterId::Cosine:
            return 1.0;
        case FilterId::Identity:
            return order == 0 ? 1.0 : 0.0;
        case FilterId::Low:
        case FilterId::High:
        case FilterId::Band:
        case FilterId::Reject: {
            // |d^m (1 - gauss)| = |d^m gauss| for m >= 1
            const double center = (f == FilterId::Band || f == FilterId::Reject) ? 1.0 : 0.0;
            Vector p = gaussian_deriv_factor(10.0, order);
            double sup = 0.0;
            for (int i = 0; i <= 2000; ++i) {
                const double lam = 2.0 * i / 2000.0;
                const double u = lam - center;
                const double val = horner(p, u) * std::exp(-10.0 * u * u);
                sup = std::max(sup, std::fabs(val));
            }
            return sup;
        }
        case FilterId::Comb:
            // smooth-piece estimate; the kinks violate the C^{n+1} hypothesis
            return std::pow(M_PI, order);
    }
    return 0.0;
}

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

}  // namespace

InterpBoundResult interpolation_bound_check(FilterId filter, int degree) {
    if (degree < 1) throw InputError("interpolation_bound_check: degree must be >= 1");
    const int n = degree;
    Vector pts(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i)
        pts[static_cast<std::size_t>(i)] =
            1.0 + std::cos((2.0 * i + 1.0) * M_PI / (2.0 * n + 2.0));
    Vector vals(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = filter_eval(filter, pts[i]);
    Vector coeffs = interpolate_monomial(pts, vals);

    InterpBoundResult res;
    for (int i = 0; i <= 2000; ++i) {
        const double lam = 2.0 * i / 2000.0;
        res.sup_error = std::max(res.sup_error, std::fabs(filter_eval(filter, lam) - horner(coeffs, lam)));
    }
    res.deriv_sup = filter_deriv_sup(filter, n + 1);
    res.bound = res.deriv_sup / (factorial(n + 1) * std::pow(2.0, n));
    res.pass = res.sup_error <= res.bound;
    return res;
}

// ---------------------------------------------------------------------------
// degree demand demonstration
// ---------------------------------------------------------------------------

DegreeDemandReport random_feature_degree_demand(const Spectrum& s, std::uint64_t seed,
                                                double rel_tol) {
    const std::size_t n = s.size();
    DegreeDemandReport rep;
    rep.rel_tol = rel_tol;

    std::vector<EigenvalueGroup> groups = eigenvalue_groups(s.values);
    rep.n_distinct = groups.size();

    Rng rng(derive_seed(seed, 0xDE62));
    Vector xr(n);
    for (double& v : xr) v = rng.normal();
    Vector xrt = gft(s, xr);

    // degree-1-expressible target relative to a flat-spectrum reference
    Vector zt(n);
    for (std::size_t i = 0; i < n; ++i) zt[i] = 1.0 - 0.5 * s.values[i];
    double zt_norm2 = dot(zt, zt);

    // weighted LS of growing degree in the basis orthonormal under x~^2
    Vector weights(n);
    for (std::size_t i = 0; i < n; ++i) weights[i] = xrt[i] * xrt[i];
    const int max_deg = static_cast<int>(rep.n_distinct) - 1;
    OrthoBasisCoeffs oc = fit_orthonormal_basis(s, weights, max_deg);
    BasisSpec spec;
    spec.family = BasisFamily::OrthoFitted;
    spec.degree = max_deg;
    spec.ortho_coeffs = oc;

    // projections c_k = sum_i w_i t_i p_k(lambda_i) with t_i = z~_i / x~_i
    double captured = 0.0;
    for (int k = 0; k <= max_deg; ++k) {
        double c = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            c += xrt[i] * zt[i] * basis_scalar(spec, k, s.values[i]);
        captured += c * c;
        const double resid2 = std::max(0.0, zt_norm2 - captured);
        if (std::sqrt(resid2 / zt_norm2) <= rel_tol) {
            rep.required_degree = k;
            break;
        }
    }
    if (rep.required_degree >= 0)
        rep.ratio = static_cast<double>(rep.required_degree) / static_cast<double>(rep.n_distinct);
    return rep;
}

// ---------------------------------------------------------------------------
// JSON reports
// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const ScanReport& r) {
    j = nlohmann::json{{"graphs_scanned", r.graphs_scanned},
                       {"distinct_spectrum", r.distinct_spectrum},
                       {"order_checked", r.order_checked},
                       {"feature_checked", r.feature_checked},
                       {"seed", r.seed},
                       {"pass", r.pass()}};
    nlohmann::json cxs = nlohmann::json::array();
    for (const auto& c : r.counterexamples) {
        nlohmann::json e;
        e["n"] = c.n;
        e["which"] = c.which;
        e["edges"] = nlohmann::json::array();
        for (auto [u, v] : c.edges) e["edges"].push_back({u, v});
        cxs.push_back(e);
    }
    j["counterexamples"] = cxs;
}

void to_json(nlohmann::json& j, const WlBoundReport& r) {
    j = nlohmann::json{{"trials", r.trials},
                       {"violations", r.violations},
                       {"max_group_gap", r.max_group_gap},
                       {"pass", r.pass}};
}

void to_json(nlohmann::json& j, const SpectrumStatsReport& r) {
    j = nlohmann::json{{"samples", r.samples},
                       {"sigma", r.sigma},
                       {"max_abs_mean", r.max_abs_mean},
                       {"max_cov_err", r.max_cov_err},
                       {"cov_bound", r.cov_bound},
                       {"mean_bound", r.mean_bound},
                       {"max_parseval_err", r.max_parseval_err},
                       {"pass", r.pass}};
}

void to_json(nlohmann::json& j, const InterpBoundResult& r) {
    j = nlohmann::json{{"sup_error", r.sup_error},
                       {"bound", r.bound},
                       {"deriv_sup", r.deriv_sup},
                       {"pass", r.pass}};
}

void to_json(nlohmann::json& j, const DegreeDemandReport& r) {
    j = nlohmann::json{{"n_distinct", r.n_distinct},
                       {"required_degree", r.required_degree},
                       {"rel_tol", r.rel_tol},
                       {"ratio", r.ratio}};
}

}  // namespace sfl
