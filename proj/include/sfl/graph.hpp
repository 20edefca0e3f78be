#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sfl/dense.hpp"

namespace sfl {

// Thrown on malformed input files / bad arguments. The CLI maps this to exit 2.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Thrown on numeric failures (eigensolver divergence, singular systems, ...).
// The CLI maps this to exit 3.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Symmetric sparse matrix in CSR form. Built canonically (both (u,v) and (v,u)
// stored, columns ascending per row) so symmetry is exact by construction.
class SymmetricOperator {
  public:
    SymmetricOperator() = default;
    // entries: (i, j, value) with i != j implies the mirrored entry is added
    // automatically when only one direction is given; diagonal allowed.
    static SymmetricOperator from_triplets(std::size_t n,
                                           std::vector<std::tuple<std::size_t, std::size_t, double>> entries);

    std::size_t size() const { return n_; }
    const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
    const std::vector<std::size_t>& col_idx() const { return col_idx_; }
    const std::vector<double>& values() const { return values_; }

    // y = A x
    Vector apply(const Vector& x) const;
    void apply_into(const Vector& x, Vector& y) const;

    Matrix to_dense() const;

  private:
    std::size_t n_ = 0;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> col_idx_;
    std::vector<double> values_;
};

// Immutable undirected graph: CSR adjacency without self-loops or duplicates,
// optional node features (n x d) and integer labels.
class Graph {
  public:
    Graph() = default;
    // Edges may list each undirected pair once or twice; self-loops and
    // duplicates are dropped. If warnings != nullptr, a note is pushed for
    // every dropped line.
    Graph(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> edges,
          std::vector<std::string>* warnings = nullptr);

    std::size_t num_nodes() const { return n_; }
    std::size_t num_edges() const { return undirected_edges_; }
    std::size_t degree(std::size_t u) const { return row_ptr_[u + 1] - row_ptr_[u]; }

    // neighbors of u, ascending
    std::pair<const std::size_t*, const std::size_t*> neighbors(std::size_t u) const {
        return {col_idx_.data() + row_ptr_[u], col_idx_.data() + row_ptr_[u + 1]};
    }
    bool has_edge(std::size_t u, std::size_t v) const;

    // unique edges with u < v, lexicographic
    std::vector<std::pair<std::size_t, std::size_t>> edge_list() const;

    bool has_features() const { return features_.rows() == n_ && features_.cols() > 0; }
    const Matrix& features() const { return features_; }
    void set_features(Matrix x);

    bool has_labels() const { return !labels_.empty(); }
    const std::vector<int>& labels() const { return labels_; }
    void set_labels(std::vector<int> labels);
    int num_classes() const;

  private:
    std::size_t n_ = 0;
    std::size_t undirected_edges_ = 0;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> col_idx_;
    Matrix features_;
    std::vector<int> labels_;
};

// A_hat = D^{-1/2} A D^{-1/2}; rows/cols of isolated nodes are all zero
// (the D^{-1/2}_ii = 0 convention, so L_hat has 1 on their diagonal).
SymmetricOperator normalized_adjacency(const Graph& g);
// L_hat = I - A_hat
SymmetricOperator normalized_laplacian(const Graph& g);

// Edge-list wire format: UTF-8 text, '#' comments, optional "# n=<int>"
// header, one "u v" pair per line (0-indexed).
Graph load_edge_list(const std::string& path, std::vector<std::string>* warnings = nullptr);
void save_edge_list(const Graph& g, const std::string& path);

// Features: CSV with header row, row i = node i, finite reals.
Matrix load_features_csv(const std::string& path);
void save_features_csv(const Matrix& x, const std::string& path);
// Labels: CSV with header row, one non-negative integer per row.
std::vector<int> load_labels_csv(const std::string& path);
void save_labels_csv(const std::vector<int>& labels, const std::string& path);

// rows x cols 4-neighbor lattice
Graph grid_graph(std::size_t rows, std::size_t cols);

// Stochastic block model: labels = block ids, features = one-hot(block) +
// Gaussian(0, noise^2) in feature_dim >= blocks dimensions. Deterministic
// given seed. A disconnected result is allowed (warning only).
Graph sbm_generate(std::size_t blocks, const std::vector<std::size_t>& sizes, double p_in,
                   double p_out, std::size_t feature_dim, double noise, std::uint64_t seed,
                   std::vector<std::string>* warnings = nullptr);

// G(n, p) conditioned on connectivity by retrying with derived seeds; used by
// the theory scans and tests.
Graph random_connected_graph(std::size_t n, double p, std::uint64_t seed);

// path 0-1-2-...-(n-1)
Graph path_graph(std::size_t n);
// complete graph
Graph complete_graph(std::size_t n);

}  // namespace sfl
