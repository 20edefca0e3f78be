#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sfl/bases.hpp"
#include "sfl/dense.hpp"
#include "sfl/graph.hpp"

namespace sfl {

enum class LossKind { Squared, SoftmaxCE };

std::string loss_name(LossKind k);
LossKind loss_from_name(const std::string& name);

// Linear spectral GNN: X_hat = X W (+ bias), Z_{:l} = sum_k alpha_{kl} g_k(A_hat) X_hat_{:l}.
// Under PCD the stored coefficients are beta and the effective alpha_{kl} is
// beta_{kl} * prod_{i<=k} gamma' tanh(eta_i), with the gamma chain shared
// across output channels. With unifilter a single coefficient column is
// stored and broadcast.
struct LinearGnnModel {
    BasisSpec spec;
    std::size_t d_in = 0;
    std::size_t d_out = 0;
    Matrix w;      // d_in x d_out
    Vector bias;   // d_out, empty when bias disabled
    Matrix coeffs; // (K+1) x (unifilter ? 1 : d_out); alpha, or beta under PCD
    bool unifilter = false;
    bool pcd = false;
    Vector eta;          // K entries when pcd
    double gamma_cap = 1.0;  // gamma'

    bool use_bias() const { return !bias.empty(); }
    std::size_t coeff_cols() const { return unifilter ? 1 : d_out; }

    // gamma_i = gamma' tanh(eta_i), i = 1..K
    Vector gammas() const;
    // Gamma_k = prod_{i<=k} gamma_i, Gamma_0 = 1; all-ones without PCD
    Vector gamma_products() const;
    // effective alpha as a (K+1) x d_out matrix (broadcast + PCD chain applied)
    Matrix effective_coeffs() const;
};

// W ~ uniform(+-sqrt(1/d)) seeded; bias 0; coeffs one-hot at k=0 (identity
// filter start); eta = atanh(min(0.9, 1/gamma')) so the initial effective
// gamma_i is min(0.9 * gamma', 1).
LinearGnnModel init_model(std::size_t d_in, std::size_t d_out, const BasisSpec& spec, bool pcd,
                          bool unifilter, bool with_bias, std::uint64_t seed, double gamma_cap = 1.0);

// Per-epoch dropout masks (inverted scaling baked in): entry is 0 or 1/keep.
struct DropoutState {
    Matrix scale_x;  // n x d_in, empty when inactive
    Matrix scale_h;  // n x d_out, empty when inactive
    bool active_x() const { return scale_x.rows() > 0; }
    bool active_h() const { return scale_h.rows() > 0; }
};

DropoutState make_dropout(std::size_t n, std::size_t d_in, std::size_t d_out, double p_x,
                          double p_h, std::uint64_t seed);

struct ForwardCache {
    Matrix x_dropped;           // X after input dropout
    Matrix x_hat;               // filtered input (after hidden dropout)
    std::vector<Matrix> basis;  // basis[k] is n x d_out: g_k(A_hat) applied per channel
};

// Z (n x d_out); cache captures everything backward needs.
Matrix forward(const LinearGnnModel& m, const SymmetricOperator& a_hat, const Matrix& x,
               const DropoutState* dropout = nullptr, ForwardCache* cache = nullptr);

struct Gradients {
    Matrix w;       // d_in x d_out
    Vector bias;    // d_out
    Matrix coeffs;  // same shape as model.coeffs
    Vector eta;     // K when pcd
};

// Loss over mask rows plus analytic gradients for every learnable parameter.
// Squared: 0.5 * sum over mask ||Z - Y||^2 (y required). SoftmaxCE: mean
// negative log-likelihood over mask (labels required).
double loss_and_grads(const LinearGnnModel& m, const SymmetricOperator& a_hat, const Matrix& x,
                      const Matrix* y, const std::vector<int>* labels,
                      const std::vector<std::size_t>& mask, LossKind loss,
                      const DropoutState* dropout, Gradients* grads);

// loss only (no dropout), reusing the same path
double evaluate_loss(const LinearGnnModel& m, const SymmetricOperator& a_hat, const Matrix& x,
                     const Matrix* y, const std::vector<int>* labels,
                     const std::vector<std::size_t>& mask, LossKind loss);

double evaluate_accuracy(const LinearGnnModel& m, const SymmetricOperator& a_hat, const Matrix& x,
                         const std::vector<int>& labels, const std::vector<std::size_t>& mask);

// Per-group learning rates / weight decays. Groups: W+bias, coeffs, pcd (eta).
struct TrainConfig {
    double lr_w = 0.01;
    double lr_coeffs = 0.01;
    double lr_pcd = 0.01;
    double wd_w = 0.0;
    double wd_coeffs = 0.0;
    double wd_pcd = 0.0;
    double dropout_x = 0.0;
    double dropout_hidden = 0.0;
    int max_epochs = 1000;
    int patience = 200;
    std::uint64_t seed = 0;
    LossKind loss = LossKind::Squared;
};

// Standard Adam (beta1 0.9, beta2 0.999, eps 1e-8) with per-group lr and
// L2-style weight decay added to the gradient.
struct AdamState {
    Vector m_w, v_w, m_b, v_b, m_c, v_c, m_e, v_e;
    std::int64_t t = 0;
};

AdamState init_adam(const LinearGnnModel& m);
void adam_step(LinearGnnModel& m, AdamState& st, const Gradients& g, const TrainConfig& cfg);

struct TrainTask {
    const SymmetricOperator* a_hat = nullptr;
    const Matrix* x = nullptr;
    const Matrix* y = nullptr;               // squared-loss target
    const std::vector<int>* labels = nullptr;  // CE target
    std::vector<std::size_t> train_mask;
    std::vector<std::size_t> val_mask;  // empty -> train loss drives early stopping
    std::vector<std::size_t> test_mask;
};

struct EpochStats {
    double train_loss;
    double val_metric;  // loss (lower better) for squared, accuracy for CE
};

struct TrainResult {
    std::vector<EpochStats> history;
    int best_epoch = -1;
    double best_val_metric = 0.0;
};

// <= max_epochs epochs, early stop after `patience` non-improving epochs,
// best-validation parameters restored into m. Throws NumericError naming the
// epoch if the loss turns non-finite.
TrainResult train(LinearGnnModel& m, const TrainTask& task, const TrainConfig& cfg);

// Checkpoint round-trip: documented JSON (spec, dims, parameter arrays in
// row-major order, seed, config hash).
void save_checkpoint(const LinearGnnModel& m, std::uint64_t seed, const std::string& config_hash,
                     const std::string& path);
LinearGnnModel load_checkpoint(const std::string& path, std::uint64_t* seed = nullptr,
                               std::string* config_hash = nullptr);

}  // namespace sfl
