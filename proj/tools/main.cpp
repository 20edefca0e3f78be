// sfl - spectral filter lab: linear spectral GNNs with pluggable polynomial
// bases, plus an executable theory suite. All workflows are seeded and write
// file-based reports (JSON for configs/results, CSV for tabular data).

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "sfl/bench.hpp"
#include "sfl/config.hpp"
#include "sfl/random.hpp"
#include "sfl/theory.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitCheckFailed = 4;

json base_report(const sfl::RunConfig& cfg) {
    json j;
    j["config"] = cfg;
    j["config_hash"] = sfl::config_hash(cfg);
    j["seed"] = cfg.seed;
    return j;
}

sfl::Graph load_graph_with_attachments(const sfl::RunConfig& cfg) {
    std::vector<std::string> warnings;
    sfl::Graph g = sfl::load_edge_list(cfg.graph_path, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    if (!cfg.features_path.empty()) g.set_features(sfl::load_features_csv(cfg.features_path));
    if (!cfg.labels_path.empty()) g.set_labels(sfl::load_labels_csv(cfg.labels_path));
    return g;
}

int cmd_diagnose(const sfl::RunConfig& cfg) {
    sfl::Graph g = load_graph_with_attachments(cfg);
    sfl::Spectrum s = sfl::eigendecompose(sfl::normalized_laplacian(g));
    const sfl::Matrix* x = g.has_features() ? &g.features() : nullptr;
    sfl::Diagnostics d = sfl::diagnose(s, x, cfg.tol_miss, cfg.tol_eig);

    json j = base_report(cfg);
    j["n"] = g.num_nodes();
    j["edges"] = g.num_edges();
    j["lambda_min"] = s.values.empty() ? 0.0 : s.values.front();
    j["lambda_max"] = s.values.empty() ? 0.0 : s.values.back();
    j["n_distinct"] = d.groups.size();
    j["multi_ratio"] = d.multi_ratio;
    if (d.n_missing) j["n_missing"] = *d.n_missing;
    j["groups"] = json::array();
    for (const auto& grp : d.groups)
        j["groups"].push_back({{"begin", grp.begin}, {"end", grp.end}, {"lambda", grp.value}});

    if (x) {
        sfl::DensityEstimate de = sfl::signal_density(s, *x, static_cast<std::size_t>(cfg.bins));
        j["density"] = {{"bin_edges", de.bin_edges},
                        {"cumulative", de.cumulative},
                        {"density", de.density}};
        sfl::save_density_csv(de, cfg.out_path + ".density.csv");
    }
    sfl::write_text_file(cfg.out_path, j.dump(2) + "\n");
    return kExitOk;
}

int cmd_filterbench(const sfl::RunConfig& cfg) {
    fs::create_directories(cfg.out_path);
    sfl::FilterBench bench =
        sfl::make_filter_tasks(static_cast<std::size_t>(cfg.side), cfg.count, cfg.seed);
    const std::vector<double> grid = {-0.5, 0.0, 0.5, 1.0, 1.5, 2.0};
    sfl::BenchReport rep = sfl::run_filter_bench(bench, cfg.bases, cfg.degree, cfg.train_config(),
                                                 cfg.tune_jacobi, grid, cfg.jobs);
    json j = base_report(cfg);
    json jr = rep;
    j.update(jr);
    sfl::write_text_file((fs::path(cfg.out_path) / "report.json").string(), j.dump(2) + "\n");
    sfl::save_bench_csv(rep, (fs::path(cfg.out_path) / "bench.csv").string());
    sfl::save_curves_csv(rep, (fs::path(cfg.out_path) / "curves.csv").string());
    return kExitOk;
}

int cmd_train(const sfl::RunConfig& cfg) {
    fs::create_directories(cfg.out_path);
    sfl::Graph g = load_graph_with_attachments(cfg);
    sfl::ModelOptions opts;
    opts.spec = cfg.basis_spec();
    opts.pcd = cfg.pcd;
    opts.unifilter = cfg.unifilter;
    opts.bias = cfg.bias;
    opts.gamma_prime = cfg.gamma_prime;

    std::vector<std::string> warnings;
    sfl::ClassificationResult res = sfl::run_node_classification(
        g, opts, cfg.train_config(), cfg.split, cfg.repeats, cfg.seed, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

    json j = base_report(cfg);
    json jr = res;
    j.update(jr);
    j["first_split"] = {{"train", res.first_split.train},
                        {"val", res.first_split.val},
                        {"test", res.first_split.test},
                        {"hash", res.first_split.hash}};
    sfl::write_text_file((fs::path(cfg.out_path) / "report.json").string(), j.dump(2) + "\n");
    sfl::save_checkpoint(res.first_model, cfg.seed, sfl::config_hash(cfg),
                         (fs::path(cfg.out_path) / "checkpoint.json").string());
    std::cout << "test accuracy " << res.mean << " +- " << res.ci95 << "\n";
    return kExitOk;
}

int cmd_ablation(const sfl::RunConfig& cfg) {
    fs::create_directories(cfg.out_path);
    sfl::Graph g = load_graph_with_attachments(cfg);
    sfl::AblationReport rep =
        sfl::ablation_suite(g, cfg.train_config(), cfg.degree, cfg.jacobi_a, cfg.jacobi_b,
                            cfg.gamma_prime, cfg.split, cfg.repeats, cfg.seed);
    json j = base_report(cfg);
    json jr = rep;
    j.update(jr);
    sfl::write_text_file((fs::path(cfg.out_path) / "ablation.json").string(), j.dump(2) + "\n");
    for (const auto& row : rep.rows)
        std::cout << row.variant << " " << row.mean_acc << " +- " << row.ci95 << "\n";
    return kExitOk;
}

int cmd_theory(const sfl::RunConfig& cfg) {
    json j = base_report(cfg);
    bool pass = false;

    if (cfg.check == "universality") {
        const int trials = cfg.trials;
        double worst = 0.0;
        int done = 0;
        for (int t = 0; done < trials; ++t) {
            if (t > trials * 20) throw sfl::NumericError("universality: too many resamples");
            sfl::Rng rng(sfl::derive_seed(cfg.seed, 0x0417, static_cast<std::uint64_t>(t)));
            const std::size_t n = 6 + rng.below(5);  // n in [6, 10]
            sfl::Graph g = sfl::random_connected_graph(n, 0.3, rng.next_u64());
            sfl::Spectrum s = sfl::eigendecompose(sfl::normalized_laplacian(g));
            bool distinct = true;
            for (std::size_t i = 0; i + 1 < n; ++i)
                if (s.values[i + 1] - s.values[i] <= 1e-8) distinct = false;
            if (!distinct) continue;
            sfl::Matrix x(n, 3);
            for (double& v : x.data()) v = rng.normal();
            sfl::Vector z(n);
            for (double& v : z) v = rng.normal();
            sfl::UniversalitySolution sol = sfl::universality_solve(s, x, z, rng.next_u64());
            worst = std::max(worst, sol.residual);
            ++done;
        }
        j["trials"] = trials;
        j["max_residual"] = worst;
        pass = worst <= 1e-6;
    } else if (cfg.check == "wl") {
        int violations = 0;
        double worst = 0.0;
        for (int t = 0; t < cfg.trials; ++t) {
            sfl::Rng rng(sfl::derive_seed(cfg.seed, 0x317, static_cast<std::uint64_t>(t)));
            const std::size_t n = 5 + rng.below(26);  // n in [5, 30]
            sfl::Graph g = sfl::random_connected_graph(n, 0.2, rng.next_u64());
            sfl::Matrix x(n, 2);
            for (double& v : x.data()) v = rng.normal();
            const int degree = 1 + static_cast<int>(rng.below(4));  // K in [1, 4]
            sfl::WlBoundReport r = sfl::wl_bound_check(g, x, degree, 10, rng.next_u64());
            violations += r.violations;
            worst = std::max(worst, r.max_group_gap);
        }
        j["graphs"] = cfg.trials;
        j["violations"] = violations;
        j["max_group_gap"] = worst;
        pass = violations == 0;
    } else if (cfg.check == "automorphism") {
        sfl::ScanReport r = sfl::automorphism_scan(cfg.nmax, cfg.seed);
        j["scan"] = r;
        pass = r.pass();
    } else if (cfg.check == "randfeat") {
        sfl::Graph g = sfl::grid_graph(2, 5);
        sfl::Spectrum s = sfl::eigendecompose(sfl::normalized_laplacian(g));
        sfl::SpectrumStatsReport stats =
            sfl::random_feature_spectrum_test(s, cfg.sigma, cfg.samples, cfg.seed);
        j["spectrum_test"] = stats;

        // multiplicity solver on K3 (eigenvalue 1.5 repeats) with a constant
        // feature column, 20 seeds
        sfl::Graph k3 = sfl::complete_graph(3);
        sfl::Spectrum ks = sfl::eigendecompose(sfl::normalized_laplacian(k3));
        sfl::Matrix ones(3, 1, 1.0);
        double worst = 0.0;
        for (int t = 0; t < 20; ++t) {
            sfl::Rng rng(sfl::derive_seed(cfg.seed, 0x7705, static_cast<std::uint64_t>(t)));
            sfl::Vector z(3);
            for (double& v : z) v = rng.normal();
            sfl::RandomFeatureSolution sol =
                sfl::random_feature_universality(ks, ones, z, rng.next_u64());
            worst = std::max(worst, sol.residual);
        }
        j["multiplicity_solver_max_residual"] = worst;
        pass = stats.pass && worst <= 1e-6;
    } else if (cfg.check == "bias") {
        sfl::BiasCounterexample c = sfl::bias_counterexample(6);
        const double dev = sfl::bias_witness_deviation(c, 100, 3, cfg.seed);
        j["witness_deviation"] = dev;
        j["n"] = c.graph.num_nodes();
        pass = dev <= 1e-12;
    } else if (cfg.check == "interp") {
        sfl::InterpBoundResult r =
            sfl::interpolation_bound_check(sfl::filter_from_name(cfg.filter), cfg.interp_degree);
        j["interp"] = r;
        pass = r.pass;
    } else {
        throw sfl::InputError("unknown theory check: " + cfg.check +
                              " (expected universality|wl|automorphism|randfeat|bias|interp)");
    }

    j["pass"] = pass;
    if (!cfg.out_path.empty()) sfl::write_text_file(cfg.out_path, j.dump(2) + "\n");
    std::cout << cfg.check << (pass ? " pass" : " FAIL") << "\n";
    return pass ? kExitOk : kExitCheckFailed;
}

int cmd_basisplot(const sfl::RunConfig& cfg) {
    sfl::BasisSpec spec = cfg.basis_spec();
    if (spec.family == sfl::BasisFamily::OrthoFitted)
        throw sfl::InputError("basisplot: ortho basis needs a fitted spectrum, not supported here");
    sfl::save_basis_curve_csv(sfl::basis_curve(spec), cfg.out_path);
    return kExitOk;
}

int cmd_sbm(const sfl::RunConfig& cfg) {
    std::vector<std::string> warnings;
    sfl::Graph g = sfl::sbm_generate(static_cast<std::size_t>(cfg.blocks), cfg.block_sizes,
                                     cfg.p_in, cfg.p_out, static_cast<std::size_t>(cfg.feature_dim),
                                     cfg.noise, cfg.seed, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    sfl::save_edge_list(g, cfg.out_path + ".edges");
    sfl::save_features_csv(g.features(), cfg.out_path + ".features.csv");
    sfl::save_labels_csv(g.labels(), cfg.out_path + ".labels.csv");
    return kExitOk;
}

std::string g_config_path;  // consumed by the prepass in main()

void add_common(CLI::App* sub, sfl::RunConfig& cfg) {
    sub->add_option("--config", g_config_path, "JSON config file (flags take precedence)");
    sub->add_option("--seed", cfg.seed, "RNG seed (env SFL_SEED overrides)");
    sub->add_option("--jobs", cfg.jobs, "worker threads");
    sub->add_option("--out", cfg.out_path, "output path");
}

}  // namespace

int main(int argc, char** argv) {
    sfl::RunConfig cfg;

    // --config is applied before flag parsing so explicit flags win
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--config") {
            try {
                cfg = sfl::load_config(argv[i + 1]);
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kExitInput;
            }
        }

    CLI::App app{"spectral filter lab"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file (flags take precedence)");

    CLI::App* diag = app.add_subcommand("diagnose", "spectrum + universality-condition diagnostics");
    diag->add_option("--graph", cfg.graph_path, "edge list file")->required();
    diag->add_option("--features", cfg.features_path, "features CSV");
    diag->add_option("--tol-eig", cfg.tol_eig, "eigenvalue gap tolerance");
    diag->add_option("--tol-miss", cfg.tol_miss, "missing-component tolerance");
    diag->add_option("--bins", cfg.bins, "density bins");
    add_common(diag, cfg);

    CLI::App* fb = app.add_subcommand("filterbench", "synthetic filter-learning benchmark");
    fb->add_option("--side", cfg.side, "grid side length");
    fb->add_option("--count", cfg.count, "signals per filter");
    fb->add_option("--bases", cfg.bases, "basis families to compare")->delimiter(',');
    fb->add_option("--degree", cfg.degree, "polynomial degree K");
    fb->add_option("--epochs", cfg.epochs, "max epochs");
    fb->add_option("--patience", cfg.patience, "early-stop patience");
    fb->add_option("--lr-w", cfg.lr_w, "lr for W/bias");
    fb->add_option("--lr-alpha", cfg.lr_alpha, "lr for coefficients");
    fb->add_flag("--tune-jacobi,!--no-tune-jacobi", cfg.tune_jacobi, "grid-search Jacobi a,b");
    add_common(fb, cfg);

    CLI::App* tr = app.add_subcommand("train", "node-classification training harness");
    tr->add_option("--graph", cfg.graph_path)->required();
    tr->add_option("--features", cfg.features_path)->required();
    tr->add_option("--labels", cfg.labels_path)->required();
    tr->add_option("--basis", cfg.basis, "monomial|chebyshev|bernstein|jacobi|appnp|sgc");
    tr->add_option("--degree", cfg.degree);
    tr->add_option("--a", cfg.jacobi_a);
    tr->add_option("--b", cfg.jacobi_b);
    tr->add_option("--alpha", cfg.teleport_alpha, "teleport for fixed families");
    tr->add_flag("--pcd,!--no-pcd", cfg.pcd);
    tr->add_flag("--unifilter", cfg.unifilter);
    tr->add_flag("--bias,!--no-bias", cfg.bias);
    tr->add_option("--gamma-prime", cfg.gamma_prime);
    tr->add_option("--lr-w", cfg.lr_w);
    tr->add_option("--lr-alpha", cfg.lr_alpha);
    tr->add_option("--lr-pcd", cfg.lr_pcd);
    tr->add_option("--wd-w", cfg.wd_w);
    tr->add_option("--wd-alpha", cfg.wd_alpha);
    tr->add_option("--wd-pcd", cfg.wd_pcd);
    tr->add_option("--dropout-x", cfg.dropout_x);
    tr->add_option("--dropout-h", cfg.dropout_h);
    tr->add_option("--epochs", cfg.epochs);
    tr->add_option("--patience", cfg.patience);
    tr->add_option("--split", cfg.split, "train,val,test fractions")->delimiter(',')->expected(3);
    tr->add_option("--repeats", cfg.repeats);
    add_common(tr, cfg);

    CLI::App* th = app.add_subcommand("theory", "executable theorem checks");
    th->add_option("--check", cfg.check, "universality|wl|automorphism|randfeat|bias|interp")
        ->required();
    th->add_option("--nmax", cfg.nmax, "max n for automorphism scan");
    th->add_option("--trials", cfg.trials, "trial count");
    th->add_option("--filter", cfg.filter, "filter for interp check");
    th->add_option("--degree", cfg.interp_degree, "interpolation degree");
    th->add_option("--sigma", cfg.sigma);
    th->add_option("--samples", cfg.samples);
    add_common(th, cfg);

    CLI::App* bp = app.add_subcommand("basisplot", "basis curves CSV for plotting");
    bp->add_option("--basis", cfg.basis);
    bp->add_option("--degree", cfg.degree);
    bp->add_option("--a", cfg.jacobi_a);
    bp->add_option("--b", cfg.jacobi_b);
    bp->add_option("--alpha", cfg.teleport_alpha);
    add_common(bp, cfg);

    CLI::App* sb = app.add_subcommand("sbm", "generate a stochastic block model dataset");
    sb->add_option("--blocks", cfg.blocks);
    sb->add_option("--sizes", cfg.block_sizes, "per-block node counts")->delimiter(',');
    sb->add_option("--p-in", cfg.p_in);
    sb->add_option("--p-out", cfg.p_out);
    sb->add_option("--feature-dim", cfg.feature_dim);
    sb->add_option("--noise", cfg.noise);
    add_common(sb, cfg);

    CLI::App* ab = app.add_subcommand("ablation", "six-variant ablation table on one dataset");
    ab->add_option("--graph", cfg.graph_path)->required();
    ab->add_option("--features", cfg.features_path)->required();
    ab->add_option("--labels", cfg.labels_path)->required();
    ab->add_option("--degree", cfg.degree);
    ab->add_option("--a", cfg.jacobi_a);
    ab->add_option("--b", cfg.jacobi_b);
    ab->add_option("--gamma-prime", cfg.gamma_prime);
    ab->add_option("--epochs", cfg.epochs);
    ab->add_option("--patience", cfg.patience);
    ab->add_option("--lr-w", cfg.lr_w);
    ab->add_option("--lr-alpha", cfg.lr_alpha);
    ab->add_option("--lr-pcd", cfg.lr_pcd);
    ab->add_option("--split", cfg.split)->delimiter(',')->expected(3);
    ab->add_option("--repeats", cfg.repeats);
    add_common(ab, cfg);

    CLI11_PARSE(app, argc, argv);

    if (const char* env_seed = std::getenv("SFL_SEED")) {
        try {
            cfg.seed = std::stoull(env_seed);
        } catch (const std::exception&) {
            std::cerr << "error: bad SFL_SEED value\n";
            return kExitInput;
        }
    }

    try {
        if (diag->parsed()) {
            cfg.subcommand = "diagnose";
            if (cfg.out_path.empty()) throw sfl::InputError("--out is required");
            return cmd_diagnose(cfg);
        }
        if (fb->parsed()) {
            cfg.subcommand = "filterbench";
            if (cfg.out_path.empty()) throw sfl::InputError("--out is required");
            return cmd_filterbench(cfg);
        }
        if (tr->parsed()) {
            cfg.subcommand = "train";
            if (cfg.out_path.empty()) throw sfl::InputError("--out is required");
            return cmd_train(cfg);
        }
        if (th->parsed()) {
            cfg.subcommand = "theory";
            return cmd_theory(cfg);
        }
        if (bp->parsed()) {
            cfg.subcommand = "basisplot";
            if (cfg.out_path.empty()) throw sfl::InputError("--out is required");
            return cmd_basisplot(cfg);
        }
        if (sb->parsed()) {
            cfg.subcommand = "sbm";
            if (cfg.out_path.empty()) throw sfl::InputError("--out (prefix) is required");
            return cmd_sbm(cfg);
        }
        if (ab->parsed()) {
            cfg.subcommand = "ablation";
            if (cfg.out_path.empty()) throw sfl::InputError("--out is required");
            return cmd_ablation(cfg);
        }
    } catch (const sfl::InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const sfl::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitOk;
}
