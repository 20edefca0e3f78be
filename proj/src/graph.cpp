#include "sfl/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>

#include "sfl/random.hpp"

namespace sfl {

SymmetricOperator SymmetricOperator::from_triplets(
    std::size_t n, std::vector<std::tuple<std::size_t, std::size_t, double>> entries) {
    // mirror off-diagonal entries, then canonicalize
    std::vector<std::tuple<std::size_t, std::size_t, double>> full;
    full.reserve(entries.size() * 2);
    for (const auto& [i, j, v] : entries) {
        if (i >= n || j >= n) throw InputError("operator entry out of bounds");
        full.emplace_back(i, j, v);
        if (i != j) full.emplace_back(j, i, v);
    }
    std::sort(full.begin(), full.end(), [](const auto& a, const auto& b) {
        return std::get<0>(a) != std::get<0>(b) ? std::get<0>(a) < std::get<0>(b)
                                                : std::get<1>(a) < std::get<1>(b);
    });
    // merge duplicates (keep last value; duplicates only arise if the caller
    // passed both directions, in which case values agree)
    SymmetricOperator op;
    op.n_ = n;
    op.row_ptr_.assign(n + 1, 0);
    for (std::size_t k = 0; k < full.size(); ++k) {
        if (k > 0 && std::get<0>(full[k]) == std::get<0>(full[k - 1]) &&
            std::get<1>(full[k]) == std::get<1>(full[k - 1])) {
            op.values_.back() = std::get<2>(full[k]);
            continue;
        }
        op.col_idx_.push_back(std::get<1>(full[k]));
        op.values_.push_back(std::get<2>(full[k]));
        ++op.row_ptr_[std::get<0>(full[k]) + 1];
    }
    for (std::size_t i = 0; i < n; ++i) op.row_ptr_[i + 1] += op.row_ptr_[i];
    return op;
}

Vector SymmetricOperator::apply(const Vector& x) const {
    Vector y(n_, 0.0);
    apply_into(x, y);
    return y;
}

void SymmetricOperator::apply_into(const Vector& x, Vector& y) const {
    if (x.size() != n_) throw std::invalid_argument("SymmetricOperator::apply: dimension mismatch");
    y.assign(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        double s = 0.0;
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k] * x[col_idx_[k]];
        y[i] = s;
    }
}

Matrix SymmetricOperator::to_dense() const {
    Matrix m(n_, n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) m(i, col_idx_[k]) = values_[k];
    return m;
}

Graph::Graph(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> edges,
             std::vector<std::string>* warnings) {
    n_ = n;
    std::vector<std::pair<std::size_t, std::size_t>> canon;
    canon.reserve(edges.size());
    for (auto [u, v] : edges) {
        if (u >= n || v >= n) throw InputError("edge index out of bounds");
        if (u == v) {
            if (warnings) warnings->push_back("dropped self-loop at node " + std::to_string(u));
            continue;
        }
        canon.emplace_back(std::min(u, v), std::max(u, v));
    }
    std::sort(canon.begin(), canon.end());
    std::size_t before = canon.size();
    canon.erase(std::unique(canon.begin(), canon.end()), canon.end());
    if (warnings && canon.size() < before)
        warnings->push_back("dropped " + std::to_string(before - canon.size()) + " duplicate edge(s)");
    undirected_edges_ = canon.size();

    std::vector<std::size_t> deg(n, 0);
    for (auto [u, v] : canon) {
        ++deg[u];
        ++deg[v];
    }
    row_ptr_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) row_ptr_[i + 1] = row_ptr_[i] + deg[i];
    col_idx_.assign(row_ptr_[n], 0);
    std::vector<std::size_t> fill(row_ptr_.begin(), row_ptr_.end() - 1);
    for (auto [u, v] : canon) {
        col_idx_[fill[u]++] = v;
        col_idx_[fill[v]++] = u;
    }
    for (std::size_t i = 0; i < n; ++i)
        std::sort(col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]),
                  col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]));
}

bool Graph::has_edge(std::size_t u, std::size_t v) const {
    auto [lo, hi] = neighbors(u);
    return std::binary_search(lo, hi, v);
}

std::vector<std::pair<std::size_t, std::size_t>> Graph::edge_list() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(undirected_edges_);
    for (std::size_t u = 0; u < n_; ++u) {
        auto [lo, hi] = neighbors(u);
        for (const std::size_t* p = lo; p != hi; ++p)
            if (*p > u) out.emplace_back(u, *p);
    }
    return out;
}

void Graph::set_features(Matrix x) {
    if (x.rows() != n_) throw InputError("feature row count does not match node count");
    features_ = std::move(x);
}

void Graph::set_labels(std::vector<int> labels) {
    if (labels.size() != n_) throw InputError("label count does not match node count");
    for (int l : labels)
        if (l < 0) throw InputError("labels must be non-negative");
    labels_ = std::move(labels);
}

int Graph::num_classes() const {
    int c = 0;
    for (int l : labels_) c = std::max(c, l + 1);
    return c;
}

SymmetricOperator normalized_adjacency(const Graph& g) {
    const std::size_t n = g.num_nodes();
    Vector dinv_sqrt(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t d = g.degree(i);
        dinv_sqrt[i] = d > 0 ? 1.0 / std::sqrt(static_cast<double>(d)) : 0.0;
    }
    std::vector<std::tuple<std::size_t, std::size_t, double>> trips;
    trips.reserve(g.num_edges());
    for (auto [u, v] : g.edge_list()) trips.emplace_back(u, v, dinv_sqrt[u] * dinv_sqrt[v]);
    return SymmetricOperator::from_triplets(n, std::move(trips));
}

SymmetricOperator normalized_laplacian(const Graph& g) {
    const std::size_t n = g.num_nodes();
    Vector dinv_sqrt(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t d = g.degree(i);
        dinv_sqrt[i] = d > 0 ? 1.0 / std::sqrt(static_cast<double>(d)) : 0.0;
    }
    std::vector<std::tuple<std::size_t, std::size_t, double>> trips;
    trips.reserve(g.num_edges() + n);
    for (std::size_t i = 0; i < n; ++i) trips.emplace_back(i, i, 1.0);
    for (auto [u, v] : g.edge_list()) trips.emplace_back(u, v, -dinv_sqrt[u] * dinv_sqrt[v]);
    return SymmetricOperator::from_triplets(n, std::move(trips));
}

Graph load_edge_list(const std::string& path, std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open edge list: " + path);
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    std::optional<std::size_t> declared_n;
    std::size_t max_idx = 0;
    bool any_node = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        if (line[first] == '#') {
            // recognize the "# n=<count>" header anywhere among comments
            std::size_t pos = line.find("n=");
            if (pos != std::string::npos) {
                try {
                    declared_n = std::stoull(line.substr(pos + 2));
                } catch (const std::exception&) {
                    throw InputError(path + ":" + std::to_string(lineno) + ": malformed n= header");
                }
            }
            continue;
        }
        std::istringstream ss(line);
        long long u, v;
        if (!(ss >> u >> v) || u < 0 || v < 0)
            throw InputError(path + ":" + std::to_string(lineno) + ": malformed edge line '" + line +
                             "'");
        std::string trailing;
        if (ss >> trailing)
            throw InputError(path + ":" + std::to_string(lineno) + ": trailing data '" + trailing + "'");
        edges.emplace_back(static_cast<std::size_t>(u), static_cast<std::size_t>(v));
        max_idx = std::max({max_idx, static_cast<std::size_t>(u), static_cast<std::size_t>(v)});
        any_node = true;
    }
    std::size_t n = declared_n ? *declared_n : (any_node ? max_idx + 1 : 0);
    if (declared_n && any_node && max_idx >= *declared_n)
        throw InputError(path + ": edge index " + std::to_string(max_idx) +
                         " exceeds declared n=" + std::to_string(*declared_n));
    return Graph(n, std::move(edges), warnings);
}

void save_edge_list(const Graph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write edge list: " + path);
    out << "# n=" << g.num_nodes() << "\n";
    for (auto [u, v] : g.edge_list()) out << u << " " << v << "\n";
}

Matrix load_features_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open features: " + path);
    std::string line;
    if (!std::getline(in, line)) throw InputError(path + ": empty features file");
    std::size_t cols = std::count(line.begin(), line.end(), ',') + 1;
    std::vector<double> vals;
    std::size_t rows = 0, lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::size_t c = 0;
        while (std::getline(ss, cell, ',')) {
            try {
                double v = std::stod(cell);
                if (!std::isfinite(v)) throw std::invalid_argument("not finite");
                vals.push_back(v);
            } catch (const std::exception&) {
                throw InputError(path + ":" + std::to_string(lineno) + ": bad feature value '" + cell +
                                 "'");
            }
            ++c;
        }
        if (c != cols)
            throw InputError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(cols) +
                             " columns, got " + std::to_string(c));
        ++rows;
    }
    Matrix x(rows, cols);
    std::copy(vals.begin(), vals.end(), x.data().begin());
    return x;
}

void save_features_csv(const Matrix& x, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write features: " + path);
    for (std::size_t j = 0; j < x.cols(); ++j) out << (j ? "," : "") << "f" << j;
    out << "\n";
    out.precision(17);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) out << (j ? "," : "") << x(i, j);
        out << "\n";
    }
}

std::vector<int> load_labels_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open labels: " + path);
    std::string line;
    if (!std::getline(in, line)) throw InputError(path + ": empty labels file");
    std::vector<int> labels;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            int v = std::stoi(line);
            if (v < 0) throw std::invalid_argument("negative");
            labels.push_back(v);
        } catch (const std::exception&) {
            throw InputError(path + ":" + std::to_string(lineno) + ": bad label '" + line + "'");
        }
    }
    return labels;
}

void save_labels_csv(const std::vector<int>& labels, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write labels: " + path);
    out << "label\n";
    for (int l : labels) out << l << "\n";
}

Graph grid_graph(std::size_t rows, std::size_t cols) {
    if (rows < 1 || cols < 1) throw InputError("grid_graph: rows and cols must be >= 1");
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    edges.reserve(rows * (cols - 1) + cols * (rows - 1));
    auto id = [cols](std::size_t r, std::size_t c) { return r * cols + c; };
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            if (c + 1 < cols) edges.emplace_back(id(r, c), id(r, c + 1));
            if (r + 1 < rows) edges.emplace_back(id(r, c), id(r + 1, c));
        }
    return Graph(rows * cols, std::move(edges));
}

Graph sbm_generate(std::size_t blocks, const std::vector<std::size_t>& sizes, double p_in,
                   double p_out, std::size_t feature_dim, double noise, std::uint64_t seed,
                   std::vector<std::string>* warnings) {
    if (sizes.size() != blocks) throw InputError("sbm_generate: sizes.size() != blocks");
    if (p_in < 0.0 || p_in > 1.0 || p_out < 0.0 || p_out > 1.0)
        throw InputError("sbm_generate: probabilities must lie in [0,1]");
    if (feature_dim < blocks) throw InputError("sbm_generate: feature_dim must be >= blocks");

    std::size_t n = 0;
    for (std::size_t s : sizes) n += s;
    std::vector<int> labels(n);
    {
        std::size_t at = 0;
        for (std::size_t b = 0; b < blocks; ++b)
            for (std::size_t k = 0; k < sizes[b]; ++k) labels[at++] = static_cast<int>(b);
    }

    Rng rng(derive_seed(seed, 0x5B0C));
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double p = labels[i] == labels[j] ? p_in : p_out;
            if (rng.bernoulli(p)) edges.emplace_back(i, j);
        }
    Graph g(n, std::move(edges));

    Rng frng(derive_seed(seed, 0xFEA7));
    Matrix x(n, feature_dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        x(i, static_cast<std::size_t>(labels[i])) = 1.0;
        for (std::size_t j = 0; j < feature_dim; ++j) x(i, j) += frng.normal(0.0, noise);
    }
    g.set_features(std::move(x));
    g.set_labels(std::move(labels));

    if (warnings) {
        // connectivity via BFS from 0
        std::vector<char> seen(n, 0);
        std::queue<std::size_t> q;
        if (n > 0) {
            q.push(0);
            seen[0] = 1;
        }
        std::size_t cnt = n > 0 ? 1 : 0;
        while (!q.empty()) {
            std::size_t u = q.front();
            q.pop();
            auto [lo, hi] = g.neighbors(u);
            for (const std::size_t* p = lo; p != hi; ++p)
                if (!seen[*p]) {
                    seen[*p] = 1;
                    ++cnt;
                    q.push(*p);
                }
        }
        if (cnt < n) warnings->push_back("sbm_generate: graph is disconnected");
    }
    return g;
}

Graph random_connected_graph(std::size_t n, double p, std::uint64_t seed) {
    for (std::uint64_t attempt = 0;; ++attempt) {
        Rng rng(derive_seed(seed, 0xC0, attempt));
        std::vector<std::pair<std::size_t, std::size_t>> edges;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (rng.bernoulli(p)) edges.emplace_back(i, j);
        Graph g(n, std::move(edges));
        std::vector<char> seen(n, 0);
        std::queue<std::size_t> q;
        if (n > 0) {
            q.push(0);
            seen[0] = 1;
        }
        std::size_t cnt = n > 0 ? 1 : 0;
        while (!q.empty()) {
            std::size_t u = q.front();
            q.pop();
            auto [lo, hi] = g.neighbors(u);
            for (const std::size_t* ptr = lo; ptr != hi; ++ptr)
                if (!seen[*ptr]) {
                    seen[*ptr] = 1;
                    ++cnt;
                    q.push(*ptr);
                }
        }
        if (cnt == n) return g;
        if (attempt > 500) throw NumericError("random_connected_graph: failed to produce a connected graph");
    }
}

Graph path_graph(std::size_t n) {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    return Graph(n, std::move(edges));
}

Graph complete_graph(std::size_t n) {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(i, j);
    return Graph(n, std::move(edges));
}

}  // namespace sfl
