#include "sfl/config.hpp"

#include <fstream>

namespace sfl {

TrainConfig RunConfig::train_config() const {
    TrainConfig t;
    t.lr_w = lr_w;
    t.lr_coeffs = lr_alpha;
    t.lr_pcd = lr_pcd;
    t.wd_w = wd_w;
    t.wd_coeffs = wd_alpha;
    t.wd_pcd = wd_pcd;
    t.dropout_x = dropout_x;
    t.dropout_hidden = dropout_h;
    t.max_epochs = epochs;
    t.patience = patience;
    t.seed = seed;
    t.loss = loss_from_name(loss);
    return t;
}

BasisSpec RunConfig::basis_spec() const {
    BasisSpec s;
    s.family = family_from_name(basis);
    s.degree = degree;
    s.a = jacobi_a;
    s.b = jacobi_b;
    s.alpha = teleport_alpha;
    return s;
}

void to_json(nlohmann::json& j, const RunConfig& c) {
    j = nlohmann::json{{"subcommand", c.subcommand},
                       {"graph", c.graph_path},
                       {"features", c.features_path},
                       {"labels", c.labels_path},
                       {"out", c.out_path},
                       {"basis", c.basis},
                       {"degree", c.degree},
                       {"jacobi_a", c.jacobi_a},
                       {"jacobi_b", c.jacobi_b},
                       {"teleport_alpha", c.teleport_alpha},
                       {"pcd", c.pcd},
                       {"unifilter", c.unifilter},
                       {"bias", c.bias},
                       {"gamma_prime", c.gamma_prime},
                       {"lr_w", c.lr_w},
                       {"lr_alpha", c.lr_alpha},
                       {"lr_pcd", c.lr_pcd},
                       {"wd_w", c.wd_w},
                       {"wd_alpha", c.wd_alpha},
                       {"wd_pcd", c.wd_pcd},
                       {"dropout_x", c.dropout_x},
                       {"dropout_h", c.dropout_h},
                       {"epochs", c.epochs},
                       {"patience", c.patience},
                       {"loss", c.loss},
                       {"split", c.split},
                       {"repeats", c.repeats},
                       {"tol_eig", c.tol_eig},
                       {"tol_miss", c.tol_miss},
                       {"bins", c.bins},
                       {"side", c.side},
                       {"count", c.count},
                       {"bases", c.bases},
                       {"tune_jacobi", c.tune_jacobi},
                       {"check", c.check},
                       {"nmax", c.nmax},
                       {"filter", c.filter},
                       {"interp_degree", c.interp_degree},
                       {"sigma", c.sigma},
                       {"samples", c.samples},
                       {"trials", c.trials},
                       {"blocks", c.blocks},
                       {"block_sizes", c.block_sizes},
                       {"p_in", c.p_in},
                       {"p_out", c.p_out},
                       {"feature_dim", c.feature_dim},
                       {"noise", c.noise},
                       {"seed", c.seed},
                       {"jobs", c.jobs}};
}

void from_json(const nlohmann::json& j, RunConfig& c) {
    auto get = [&j](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("subcommand", c.subcommand);
    get("graph", c.graph_path);
    get("features", c.features_path);
    get("labels", c.labels_path);
    get("out", c.out_path);
    get("basis", c.basis);
    get("degree", c.degree);
    get("jacobi_a", c.jacobi_a);
    get("jacobi_b", c.jacobi_b);
    get("teleport_alpha", c.teleport_alpha);
    get("pcd", c.pcd);
    get("unifilter", c.unifilter);
    get("bias", c.bias);
    get("gamma_prime", c.gamma_prime);
    get("lr_w", c.lr_w);
    get("lr_alpha", c.lr_alpha);
    get("lr_pcd", c.lr_pcd);
    get("wd_w", c.wd_w);
    get("wd_alpha", c.wd_alpha);
    get("wd_pcd", c.wd_pcd);
    get("dropout_x", c.dropout_x);
    get("dropout_h", c.dropout_h);
    get("epochs", c.epochs);
    get("patience", c.patience);
    get("loss", c.loss);
    get("split", c.split);
    get("repeats", c.repeats);
    get("tol_eig", c.tol_eig);
    get("tol_miss", c.tol_miss);
    get("bins", c.bins);
    get("side", c.side);
    get("count", c.count);
    get("bases", c.bases);
    get("tune_jacobi", c.tune_jacobi);
    get("check", c.check);
    get("nmax", c.nmax);
    get("filter", c.filter);
    get("interp_degree", c.interp_degree);
    get("sigma", c.sigma);
    get("samples", c.samples);
    get("trials", c.trials);
    get("blocks", c.blocks);
    get("block_sizes", c.block_sizes);
    get("p_in", c.p_in);
    get("p_out", c.p_out);
    get("feature_dim", c.feature_dim);
    get("noise", c.noise);
    get("seed", c.seed);
    get("jobs", c.jobs);
}

std::string config_hash(const RunConfig& c) {
    nlohmann::json j = c;
    const std::string dump = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("bad config json: ") + e.what());
    }
    return j.get<RunConfig>();
}

void save_config(const RunConfig& c, const std::string& path) {
    nlohmann::json j = c;
    write_text_file(path, j.dump(2) + "\n");
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write file: " + path);
    out << content;
}

}  // namespace sfl
