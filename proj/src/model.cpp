#include "sfl/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "sfl/random.hpp"

namespace sfl {

std::string loss_name(LossKind k) { return k == LossKind::Squared ? "squared" : "softmax_ce"; }

LossKind loss_from_name(const std::string& name) {
    if (name == "squared") return LossKind::Squared;
    if (name == "softmax_ce") return LossKind::SoftmaxCE;
    throw InputError("unknown loss kind: " + name);
}

Vector LinearGnnModel::gammas() const {
    Vector g(eta.size());
    for (std::size_t i = 0; i < eta.size(); ++i) g[i] = gamma_cap * std::tanh(eta[i]);
    return g;
}

Vector LinearGnnModel::gamma_products() const {
    const std::size_t kk = static_cast<std::size_t>(spec.degree) + 1;
    Vector prod(kk, 1.0);
    if (!pcd) return prod;
    Vector g = gammas();
    for (std::size_t k = 1; k < kk; ++k) prod[k] = prod[k - 1] * g[k - 1];
    return prod;
}

Matrix LinearGnnModel::effective_coeffs() const {
    const std::size_t kk = static_cast<std::size_t>(spec.degree) + 1;
    Matrix c(kk, d_out);
    const bool fixed =
        spec.family == BasisFamily::FixedAPPNP || spec.family == BasisFamily::FixedSGC;
    Vector fixedc;
    if (fixed) fixedc = fixed_coeffs(spec);
    Vector prod = gamma_products();
    for (std::size_t k = 0; k < kk; ++k)
        for (std::size_t l = 0; l < d_out; ++l) {
            double v = fixed ? fixedc[k] : coeffs(k, unifilter ? 0 : l);
            if (pcd) v *= prod[k];
            c(k, l) = v;
        }
    return c;
}

LinearGnnModel init_model(std::size_t d_in, std::size_t d_out, const BasisSpec& spec, bool pcd,
                          bool unifilter, bool with_bias, std::uint64_t seed, double gamma_cap) {
    if (d_in < 1 || d_out < 1) throw InputError("init_model: dims must be >= 1");
    spec.validate();
    const bool fixed =
        spec.family == BasisFamily::FixedAPPNP || spec.family == BasisFamily::FixedSGC;
    if (pcd && spec.family != BasisFamily::Jacobi)
        throw InputError("init_model: PCD is only supported with the Jacobi family");
    if (gamma_cap <= 0.0) throw InputError("init_model: gamma' must be > 0");

    LinearGnnModel m;
    m.spec = spec;
    m.d_in = d_in;
    m.d_out = d_out;
    m.unifilter = unifilter;
    m.pcd = pcd;
    m.gamma_cap = gamma_cap;

    Rng rng(derive_seed(seed, 0x11A1));
    const double bound = std::sqrt(1.0 / static_cast<double>(d_in));
    m.w = Matrix(d_in, d_out);
    for (double& v : m.w.data()) v = rng.uniform(-bound, bound);
    if (with_bias) m.bias.assign(d_out, 0.0);

    const std::size_t kk = static_cast<std::size_t>(spec.degree) + 1;
    m.coeffs = Matrix(kk, m.coeff_cols(), 0.0);
    if (fixed) {
        Vector fc = fixed_coeffs(spec);
        for (std::size_t k = 0; k < kk; ++k)
            for (std::size_t l = 0; l < m.coeff_cols(); ++l) m.coeffs(k, l) = fc[k];
    } else {
        for (std::size_t l = 0; l < m.coeff_cols(); ++l) m.coeffs(0, l) = 1.0;
    }
    if (pcd) {
        const double target = std::min(0.9, 1.0 / gamma_cap);
        m.eta.assign(static_cast<std::size_t>(spec.degree), std::atanh(target));
    }
    return m;
}

DropoutState make_dropout(std::size_t n, std::size_t d_in, std::size_t d_out, double p_x,
                          double p_h, std::uint64_t seed) {
    DropoutState st;
    if (p_x > 0.0) {
        Rng rng(derive_seed(seed, 0xD0, 1));
        st.scale_x = Matrix(n, d_in);
        const double keep = 1.0 - p_x;
        for (double& v : st.scale_x.data()) v = rng.uniform() < p_x ? 0.0 : 1.0 / keep;
    }
    if (p_h > 0.0) {
        Rng rng(derive_seed(seed, 0xD0, 2));
        st.scale_h = Matrix(n, d_out);
        const double keep = 1.0 - p_h;
        for (double& v : st.scale_h.data()) v = rng.uniform() < p_h ? 0.0 : 1.0 / keep;
    }
    return st;
}

namespace {

// basis[k](:, l) = g_k(A_hat) applied to column l of x_hat
std::vector<Matrix> apply_basis_columns(const BasisSpec& spec, const SymmetricOperator& a_hat,
                                        const Matrix& x_hat) {
    const std::size_t n = x_hat.rows(), d = x_hat.cols();
    const std::size_t kk = static_cast<std::size_t>(spec.degree) + 1;
    std::vector<Matrix> basis(kk, Matrix(n, d));
    Vector col(n);
    for (std::size_t l = 0; l < d; ++l) {
        for (std::size_t i = 0; i < n; ++i) col[i] = x_hat(i, l);
        std::vector<Vector> bk = apply_basis(spec, a_hat, col);
        for (std::size_t k = 0; k < kk; ++k)
            for (std::size_t i = 0; i < n; ++i) basis[k](i, l) = bk[k][i];
    }
    return basis;
}

Matrix compute_x_hat(const LinearGnnModel& m, const Matrix& x, const DropoutState* dropout,
                     Matrix* x_dropped_out) {
    Matrix xd = x;
    if (dropout && dropout->active_x())
        for (std::size_t i = 0; i < xd.data().size(); ++i)
            xd.data()[i] *= dropout->scale_x.data()[i];
    Matrix xh = matmul(xd, m.w);
    if (m.use_bias())
        for (std::size_t i = 0; i < xh.rows(); ++i)
            for (std::size_t l = 0; l < xh.cols(); ++l) xh(i, l) += m.bias[l];
    if (dropout && dropout->active_h())
        for (std::size_t i = 0; i < xh.data().size(); ++i)
            xh.data()[i] *= dropout->scale_h.data()[i];
    if (x_dropped_out) *x_dropped_out = std::move(xd);
    return xh;
}

}  // namespace

Matrix forward(const LinearGnnModel& m, const SymmetricOperator& a_hat, const Matrix& x,
               const DropoutState* dropout, ForwardCache* cache) {
    if (x.rows() != a_hat.size() || x.cols() != m.d_in)
        throw std::invalid_argument("forward: dimension mismatch");
    Matrix xd;
    Matrix x_hat = compute_x_hat(m, x, dropout, cache ? &xd : nullptr);
    std::vector<Matrix> basis = apply_basis_columns(m.spec, a_hat, x_hat);
    Matrix c = m.effective_coeffs();

    const std::size_t n = x.rows();
    Matrix z(n, m.d_out, 0.0);
    for (std::size_t k = 0; k < basis.size(); ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t l = 0; l < m.d_out; ++l) z(i, l) += c(k, l) * basis[k](i, l);

    if (cache) {
        cache->x_dropped = std::move(xd);
        cache->x_hat = std::move(x_hat);
        cache->basis = std::move(basis);
    }
    return z;
}

double loss_and_grads(const LinearGnnModel& m, const SymmetricOperator& a_hat, const Matrix& x,
                      const Matrix* y, const std::vector<int>* labels,
                      const std::vector<std::size_t>& mask, LossKind loss,
                      const DropoutState* dropout, Gradients* grads) {
    if (mask.empty()) throw InputError("loss_and_grads: mask must be nonempty");
    if (loss == LossKind::Squared && !y) throw InputError("squared loss requires a target matrix");
    if (loss == LossKind::SoftmaxCE && !labels) throw InputError("softmax_ce requires labels");

    ForwardCache cache;
    Matrix z = forward(m, a_hat, x, dropout, grads ? &cache : nullptr);
    if (!grads && loss == LossKind::Squared) {
        double total = 0.0;
        for (std::size_t i : mask)
            for (std::size_t l = 0; l < m.d_out; ++l) {
                const double d = z(i, l) - (*y)(i, l);
                total += d * d;
            }
        return 0.5 * total;
    }

    const std::size_t n = x.rows();
    Matrix e(n, m.d_out, 0.0);  // dLoss/dZ, zero off-mask
    double total = 0.0;
    if (loss == LossKind::Squared) {
        for (std::size_t i : mask)
            for (std::size_t l = 0; l < m.d_out; ++l) {
                const double d = z(i, l) - (*y)(i, l);
                e(i, l) = d;
                total += d * d;
            }
        total *= 0.5;
    } else {
        const double inv = 1.0 / static_cast<double>(mask.size());
        for (std::size_t i : mask) {
            const int yi = (*labels)[i];
            if (yi < 0 || static_cast<std::size_t>(yi) >= m.d_out)
                throw InputError("loss_and_grads: label out of range");
            double mx = z(i, 0);
            for (std::size_t l = 1; l < m.d_out; ++l) mx = std::max(mx, z(i, l));
            double denom = 0.0;
            for (std::size_t l = 0; l < m.d_out; ++l) denom += std::exp(z(i, l) - mx);
            total -= (z(i, static_cast<std::size_t>(yi)) - mx - std::log(denom)) * inv;
            for (std::size_t l = 0; l < m.d_out; ++l) {
                const double p = std::exp(z(i, l) - mx) / denom;
                e(i, l) = (p - (static_cast<std::size_t>(yi) == l ? 1.0 : 0.0)) * inv;
            }
        }
    }
    if (!grads) return total;

    const std::size_t kk = static_cast<std::size_t>(m.spec.degree) + 1;
    const bool fixed =
        m.spec.family == BasisFamily::FixedAPPNP || m.spec.family == BasisFamily::FixedSGC;

    // dC(k,l): gradient w.r.t. the effective per-channel coefficient
    Matrix dc(kk, m.d_out, 0.0);
    for (std::size_t k = 0; k < kk; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t l = 0; l < m.d_out; ++l) dc(k, l) += cache.basis[k](i, l) * e(i, l);

    grads->coeffs = Matrix(kk, m.coeff_cols(), 0.0);
    const Vector prod = m.gamma_products();
    if (!fixed) {
        for (std::size_t k = 0; k < kk; ++k)
            for (std::size_t l = 0; l < m.d_out; ++l)
                grads->coeffs(k, m.unifilter ? 0 : l) += (m.pcd ? prod[k] : 1.0) * dc(k, l);
    }

    grads->eta.clear();
    if (m.pcd) {
        const std::size_t kdeg = static_cast<std::size_t>(m.spec.degree);
        // q_k = sum_l beta(k,l) dC(k,l)
        Vector q(kk, 0.0);
        for (std::size_t k = 0; k < kk; ++k)
            for (std::size_t l = 0; l < m.d_out; ++l)
                q[k] += m.coeffs(k, m.unifilter ? 0 : l) * dc(k, l);
        const Vector g = m.gammas();
        Vector dgamma(kdeg, 0.0);
        for (std::size_t i = 1; i <= kdeg; ++i) {
            // running prod_{j<=k, j!=i} gamma_j, k from i upward
            double run = 1.0;
            for (std::size_t j = 1; j < i; ++j) run *= g[j - 1];
            for (std::size_t k = i; k <= kdeg; ++k) {
                if (k > i) run *= g[k - 1];
                dgamma[i - 1] += run * q[k];
            }
        }
        grads->eta.assign(kdeg, 0.0);
        for (std::size_t i = 0; i < kdeg; ++i) {
            const double th = std::tanh(m.eta[i]);
            grads->eta[i] = dgamma[i] * m.gamma_cap * (1.0 - th * th);
        }
    }

    // dR/dX_hat per channel: run the basis on the residual and combine
    Matrix c = m.effective_coeffs();
    std::vector<Matrix> ebasis = apply_basis_columns(m.spec, a_hat, e);
    Matrix gx(n, m.d_out, 0.0);
    for (std::size_t k = 0; k < kk; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t l = 0; l < m.d_out; ++l) gx(i, l) += c(k, l) * ebasis[k](i, l);

    if (dropout && dropout->active_h())
        for (std::size_t i = 0; i < gx.data().size(); ++i)
            gx.data()[i] *= dropout->scale_h.data()[i];

    const Matrix& xd = cache.x_dropped;
    grads->w = gram_style(xd, gx);  // X_d^T gx
    grads->bias.assign(m.d_out, 0.0);
    if (m.use_bias())
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t l = 0; l < m.d_out; ++l) grads->bias[l] += gx(i, l);
    return total;
}

double evaluate_loss(const LinearGnnModel& m, const SymmetricOperator& a_hat, const Matrix& x,
                     const Matrix* y, const std::vector<int>* labels,
                     const std::vector<std::size_t>& mask, LossKind loss) {
    return loss_and_grads(m, a_hat, x, y, labels, mask, loss, nullptr, nullptr);
}

double evaluate_accuracy(const LinearGnnModel& m, const SymmetricOperator& a_hat, const Matrix& x,
                         const std::vector<int>& labels, const std::vector<std::size_t>& mask) {
    if (mask.empty()) throw InputError("evaluate_accuracy: mask must be nonempty");
    Matrix z = forward(m, a_hat, x);
    std::size_t hits = 0;
    for (std::size_t i : mask) {
        std::size_t arg = 0;
        for (std::size_t l = 1; l < m.d_out; ++l)
            if (z(i, l) > z(i, arg)) arg = l;
        if (static_cast<int>(arg) == labels[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(mask.size());
}

AdamState init_adam(const LinearGnnModel& m) {
    AdamState st;
    st.m_w.assign(m.w.data().size(), 0.0);
    st.v_w.assign(m.w.data().size(), 0.0);
    st.m_b.assign(m.bias.size(), 0.0);
    st.v_b.assign(m.bias.size(), 0.0);
    st.m_c.assign(m.coeffs.data().size(), 0.0);
    st.v_c.assign(m.coeffs.data().size(), 0.0);
    st.m_e.assign(m.eta.size(), 0.0);
    st.v_e.assign(m.eta.size(), 0.0);
    return st;
}

namespace {

void adam_update(Vector& param, const Vector& grad, Vector& mbuf, Vector& vbuf, double lr,
                 double wd, double bc1, double bc2) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double g = grad[i] + wd * param[i];
        mbuf[i] = beta1 * mbuf[i] + (1.0 - beta1) * g;
        vbuf[i] = beta2 * vbuf[i] + (1.0 - beta2) * g * g;
        const double mh = mbuf[i] / bc1;
        const double vh = vbuf[i] / bc2;
        param[i] -= lr * mh / (std::sqrt(vh) + eps);
    }
}

}  // namespace

void adam_step(LinearGnnModel& m, AdamState& st, const Gradients& g, const TrainConfig& cfg) {
    ++st.t;
    const double bc1 = 1.0 - std::pow(0.9, static_cast<double>(st.t));
    const double bc2 = 1.0 - std::pow(0.999, static_cast<double>(st.t));
    adam_update(m.w.data(), g.w.data(), st.m_w, st.v_w, cfg.lr_w, cfg.wd_w, bc1, bc2);
    if (m.use_bias()) adam_update(m.bias, g.bias, st.m_b, st.v_b, cfg.lr_w, cfg.wd_w, bc1, bc2);
    const bool fixed =
        m.spec.family == BasisFamily::FixedAPPNP || m.spec.family == BasisFamily::FixedSGC;
    if (!fixed)
        adam_update(m.coeffs.data(), g.coeffs.data(), st.m_c, st.v_c, cfg.lr_coeffs, cfg.wd_coeffs,
                    bc1, bc2);
    if (m.pcd) adam_update(m.eta, g.eta, st.m_e, st.v_e, cfg.lr_pcd, cfg.wd_pcd, bc1, bc2);
}

TrainResult train(LinearGnnModel& m, const TrainTask& task, const TrainConfig& cfg) {
    if (task.train_mask.empty()) throw InputError("train: empty training mask");
    TrainResult res;
    AdamState st = init_adam(m);
    const bool metric_is_loss = cfg.loss == LossKind::Squared;
    const std::vector<std::size_t>& val_mask =
        task.val_mask.empty() ? task.train_mask : task.val_mask;

    LinearGnnModel best = m;
    int since_best = -1;
    const bool use_dropout = cfg.dropout_x > 0.0 || cfg.dropout_hidden > 0.0;

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        DropoutState dropout;
        if (use_dropout)
            dropout = make_dropout(task.x->rows(), m.d_in, m.d_out, cfg.dropout_x,
                                   cfg.dropout_hidden, derive_seed(cfg.seed, 0xE90C, epoch));
        Gradients g;
        const double train_loss =
            loss_and_grads(m, *task.a_hat, *task.x, task.y, task.labels, task.train_mask, cfg.loss,
                           use_dropout ? &dropout : nullptr, &g);
        if (!std::isfinite(train_loss))
            throw NumericError("train: diverged at epoch " + std::to_string(epoch));
        adam_step(m, st, g, cfg);

        double metric;
        if (metric_is_loss)
            metric = evaluate_loss(m, *task.a_hat, *task.x, task.y, task.labels, val_mask, cfg.loss);
        else
            metric = evaluate_accuracy(m, *task.a_hat, *task.x, *task.labels, val_mask);
        if (!std::isfinite(metric))
            throw NumericError("train: diverged at epoch " + std::to_string(epoch));
        res.history.push_back({train_loss, metric});

        const bool improved = res.best_epoch < 0 ||
                              (metric_is_loss ? metric < res.best_val_metric
                                              : metric > res.best_val_metric);
        if (improved) {
            res.best_val_metric = metric;
            res.best_epoch = epoch;
            best = m;
            since_best = 0;
        } else {
            ++since_best;
        }
        if (since_best > cfg.patience) break;
    }
    m = best;
    return res;
}

namespace {

nlohmann::json vec_json(const Vector& v) { return nlohmann::json(v); }

Vector vec_from_json(const nlohmann::json& j) { return j.get<Vector>(); }

}  // namespace

void save_checkpoint(const LinearGnnModel& m, std::uint64_t seed, const std::string& config_hash,
                     const std::string& path) {
    nlohmann::json j;
    j["format"] = "sfl-checkpoint-v1";
    j["basis"] = {{"family", family_name(m.spec.family)},
                  {"degree", m.spec.degree},
                  {"a", m.spec.a},
                  {"b", m.spec.b},
                  {"alpha", m.spec.alpha}};
    if (m.spec.ortho_coeffs) {
        j["basis"]["ortho_a"] = vec_json(m.spec.ortho_coeffs->a);
        j["basis"]["ortho_sqrt_b"] = vec_json(m.spec.ortho_coeffs->sqrt_b);
    }
    j["d_in"] = m.d_in;
    j["d_out"] = m.d_out;
    j["unifilter"] = m.unifilter;
    j["pcd"] = m.pcd;
    j["gamma_cap"] = m.gamma_cap;
    j["w"] = vec_json(m.w.data());          // row-major d_in x d_out
    j["coeffs"] = vec_json(m.coeffs.data());  // row-major (K+1) x cols
    if (m.use_bias()) j["bias"] = vec_json(m.bias);
    if (m.pcd) j["eta"] = vec_json(m.eta);
    j["seed"] = seed;
    j["config_hash"] = config_hash;

    std::ofstream out(path);
    if (!out) throw InputError("cannot write checkpoint: " + path);
    out << j.dump(2) << "\n";
}

LinearGnnModel load_checkpoint(const std::string& path, std::uint64_t* seed,
                               std::string* config_hash) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open checkpoint: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("bad checkpoint json: ") + e.what());
    }
    if (j.value("format", "") != "sfl-checkpoint-v1") throw InputError("unknown checkpoint format");

    LinearGnnModel m;
    const auto& jb = j.at("basis");
    m.spec.family = family_from_name(jb.at("family").get<std::string>());
    m.spec.degree = jb.at("degree").get<int>();
    m.spec.a = jb.at("a").get<double>();
    m.spec.b = jb.at("b").get<double>();
    m.spec.alpha = jb.at("alpha").get<double>();
    if (jb.contains("ortho_a")) {
        OrthoBasisCoeffs oc;
        oc.a = vec_from_json(jb.at("ortho_a"));
        oc.sqrt_b = vec_from_json(jb.at("ortho_sqrt_b"));
        m.spec.ortho_coeffs = std::move(oc);
    }
    m.d_in = j.at("d_in").get<std::size_t>();
    m.d_out = j.at("d_out").get<std::size_t>();
    m.unifilter = j.at("unifilter").get<bool>();
    m.pcd = j.at("pcd").get<bool>();
    m.gamma_cap = j.at("gamma_cap").get<double>();

    m.w = Matrix(m.d_in, m.d_out);
    m.w.data() = vec_from_json(j.at("w"));
    if (m.w.data().size() != m.d_in * m.d_out) throw InputError("checkpoint: bad W size");
    m.coeffs = Matrix(static_cast<std::size_t>(m.spec.degree) + 1, m.unifilter ? 1 : m.d_out);
    Vector cdata = vec_from_json(j.at("coeffs"));
    if (cdata.size() != m.coeffs.data().size()) throw InputError("checkpoint: bad coeffs size");
    m.coeffs.data() = std::move(cdata);
    if (j.contains("bias")) m.bias = vec_from_json(j.at("bias"));
    if (j.contains("eta")) m.eta = vec_from_json(j.at("eta"));
    if (seed) *seed = j.at("seed").get<std::uint64_t>();
    if (config_hash) *config_hash = j.at("config_hash").get<std::string>();
    return m;
}

}  // namespace sfl
