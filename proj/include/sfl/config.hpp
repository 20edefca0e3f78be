#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "sfl/model.hpp"

namespace sfl {

// Every CLI workflow's knobs in one serializable bag. Reports embed the full
// config plus its hash so any output can be traced back to an exact
// invocation. Round-trips losslessly through JSON.
struct RunConfig {
    std::string subcommand;

    // paths
    std::string graph_path;
    std::string features_path;
    std::string labels_path;
    std::string out_path;

    // basis
    std::string basis = "jacobi";
    int degree = 10;
    double jacobi_a = 1.0;
    double jacobi_b = 1.0;
    double teleport_alpha = 0.1;

    // model / training
    bool pcd = false;
    bool unifilter = false;
    bool bias = true;
    double gamma_prime = 1.0;
    double lr_w = 0.01;
    double lr_alpha = 0.05;
    double lr_pcd = 0.01;
    double wd_w = 0.0;
    double wd_alpha = 0.0;
    double wd_pcd = 0.0;
    double dropout_x = 0.0;
    double dropout_h = 0.0;
    int epochs = 1000;
    int patience = 200;
    std::string loss = "squared";
    std::vector<double> split = {0.6, 0.2, 0.2};
    int repeats = 10;

    // diagnose
    double tol_eig = 1e-8;
    double tol_miss = 1e-8;
    int bins = 40;

    // filterbench
    int side = 32;
    int count = 10;
    std::vector<std::string> bases = {"jacobi", "chebyshev", "monomial", "bernstein"};
    bool tune_jacobi = true;

    // theory
    std::string check;
    int nmax = 6;
    std::string filter = "cos";
    int interp_degree = 4;
    double sigma = 1.0;
    int samples = 10000;
    int trials = 10;

    // sbm
    int blocks = 3;
    std::vector<std::size_t> block_sizes = {50, 50, 50};
    double p_in = 0.5;
    double p_out = 0.05;
    int feature_dim = 3;
    double noise = 0.5;

    std::uint64_t seed = 0;
    int jobs = 1;

    TrainConfig train_config() const;
    BasisSpec basis_spec() const;
};

void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

// FNV-1a 64 over the canonical JSON dump, hex string
std::string config_hash(const RunConfig& c);

RunConfig load_config(const std::string& path);
void save_config(const RunConfig& c, const std::string& path);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace sfl
