#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "helpers.hpp"
#include "sfl/model.hpp"
#include "sfl/spectral.hpp"

using namespace sfl;
using sfl::test::gaussian_matrix;
using sfl::test::gaussian_vector;

namespace {

BasisSpec jacobi_spec(int degree, double a = 1.0, double b = 1.0) {
    BasisSpec s;
    s.family = BasisFamily::Jacobi;
    s.degree = degree;
    s.a = a;
    s.b = b;
    return s;
}

BasisSpec family_spec(BasisFamily f, int degree) {
    BasisSpec s;
    s.family = f;
    s.degree = degree;
    return s;
}

// central finite differences over every learnable scalar
void check_gradients(LinearGnnModel& m, const SymmetricOperator& a_hat, const Matrix& x,
                     const Matrix* y, const std::vector<int>* labels,
                     const std::vector<std::size_t>& mask, LossKind loss,
                     const DropoutState* dropout, double tol) {
    Gradients g;
    loss_and_grads(m, a_hat, x, y, labels, mask, loss, dropout, &g);

    auto loss_at = [&]() { return loss_and_grads(m, a_hat, x, y, labels, mask, loss, dropout, nullptr); };
    auto check_param = [&](double& p, double analytic) {
        const double h = 1e-5;
        const double keep = p;
        p = keep + h;
        const double up = loss_at();
        p = keep - h;
        const double down = loss_at();
        p = keep;
        const double fd = (up - down) / (2.0 * h);
        const double scale = std::max({1.0, std::fabs(fd), std::fabs(analytic)});
        CHECK(std::fabs(fd - analytic) / scale < tol);
    };

    for (std::size_t i = 0; i < m.w.data().size(); ++i) check_param(m.w.data()[i], g.w.data()[i]);
    if (m.use_bias())
        for (std::size_t i = 0; i < m.bias.size(); ++i) check_param(m.bias[i], g.bias[i]);
    const bool fixed =
        m.spec.family == BasisFamily::FixedAPPNP || m.spec.family == BasisFamily::FixedSGC;
    if (!fixed)
        for (std::size_t i = 0; i < m.coeffs.data().size(); ++i)
            check_param(m.coeffs.data()[i], g.coeffs.data()[i]);
    if (m.pcd)
        for (std::size_t i = 0; i < m.eta.size(); ++i) check_param(m.eta[i], g.eta[i]);
}

}  // namespace

TEST_CASE("init_model: identity-filter start reproduces X W") {
    Graph g = grid_graph(3, 3);
    SymmetricOperator a_hat = normalized_adjacency(g);
    Matrix x = gaussian_matrix(9, 4, 3);
    for (BasisFamily f : {BasisFamily::Monomial, BasisFamily::Chebyshev, BasisFamily::Jacobi}) {
        LinearGnnModel m = init_model(4, 2, family_spec(f, 5), false, false, true, 42);
        Matrix want = matmul(x, m.w);  // bias starts at zero
        Matrix got = forward(m, a_hat, x);
        CHECK(sfl::test::max_abs_diff(got, want) <= 1e-12);
    }
}

TEST_CASE("init_model determinism and unifilter storage") {
    LinearGnnModel a = init_model(3, 2, jacobi_spec(4), true, false, true, 7);
    LinearGnnModel b = init_model(3, 2, jacobi_spec(4), true, false, true, 7);
    CHECK(a.w.data() == b.w.data());
    CHECK(a.coeffs.data() == b.coeffs.data());
    CHECK(a.eta == b.eta);

    LinearGnnModel u = init_model(3, 4, jacobi_spec(4), false, true, true, 7);
    CHECK(u.coeffs.cols() == 1);
    Matrix eff = u.effective_coeffs();
    CHECK(eff.cols() == 4);
    for (std::size_t l = 1; l < 4; ++l)
        for (std::size_t k = 0; k < 5; ++k) CHECK(eff(k, l) == eff(k, 0));
}

TEST_CASE("init rejects PCD off the Jacobi family") {
    CHECK_THROWS_AS(init_model(2, 2, family_spec(BasisFamily::Monomial, 3), true, false, true, 1),
                    InputError);
}

TEST_CASE("forward: one-hot degree-1 Monomial coefficients apply A_hat") {
    Graph g = grid_graph(4, 4);
    SymmetricOperator a_hat = normalized_adjacency(g);
    Matrix x = gaussian_matrix(16, 1, 5);
    LinearGnnModel m = init_model(1, 1, family_spec(BasisFamily::Monomial, 3), false, false, false, 2);
    m.w(0, 0) = 1.0;
    m.coeffs(0, 0) = 0.0;
    m.coeffs(1, 0) = 1.0;
    Matrix got = forward(m, a_hat, x);
    Vector want = a_hat.apply(x.col(0));
    for (std::size_t i = 0; i < 16; ++i) CHECK(got(i, 0) == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("forward: PCD with unit gammas equals the plain model") {
    Graph g = grid_graph(3, 5);
    SymmetricOperator a_hat = normalized_adjacency(g);
    Matrix x = gaussian_matrix(15, 3, 8);
    const double gamma_cap = 2.0;  // tanh(eta) = 1/2 -> gamma_i = 1
    LinearGnnModel pcd = init_model(3, 2, jacobi_spec(6), true, false, true, 11, gamma_cap);
    for (double& e : pcd.eta) e = std::atanh(0.5);
    LinearGnnModel plain = init_model(3, 2, jacobi_spec(6), false, false, true, 11);
    plain.w = pcd.w;
    plain.bias = pcd.bias;
    plain.coeffs = pcd.coeffs;
    Matrix a = forward(pcd, a_hat, x);
    Matrix b = forward(plain, a_hat, x);
    CHECK(sfl::test::max_abs_diff(a, b) <= 1e-12);
}

TEST_CASE("forward on P2 matches the hand-computed spectral answer") {
    // alpha = (1, -1) over Monomial gives g(lambda) = lambda; x = (1, 0)
    SymmetricOperator a_hat = normalized_adjacency(path_graph(2));
    LinearGnnModel m = init_model(1, 1, family_spec(BasisFamily::Monomial, 1), false, false, false, 3);
    m.w(0, 0) = 1.0;
    m.coeffs(0, 0) = 1.0;
    m.coeffs(1, 0) = -1.0;
    Matrix x(2, 1, 0.0);
    x(0, 0) = 1.0;
    Matrix z = forward(m, a_hat, x);
    CHECK(z(0, 0) == doctest::Approx(1.0));
    CHECK(z(1, 0) == doctest::Approx(-1.0));
}

TEST_CASE("spectral consistency: GFT of the forward output is g Xhat~ per channel") {
    Graph g = random_connected_graph(20, 0.25, 31);
    SymmetricOperator a_hat = normalized_adjacency(g);
    Spectrum s = eigendecompose(normalized_laplacian(g));
    Matrix x = gaussian_matrix(20, 3, 6);
    LinearGnnModel m = init_model(3, 2, jacobi_spec(5, 0.5, 0.5), false, false, true, 19);
    Rng rng(23);
    for (double& c : m.coeffs.data()) c = rng.normal();
    Matrix z = forward(m, a_hat, x);

    Matrix xhat = matmul(x, m.w);
    Matrix zt = gft(s, z);
    Matrix xht = gft(s, xhat);
    Matrix eff = m.effective_coeffs();
    for (std::size_t l = 0; l < 2; ++l)
        for (std::size_t i = 0; i < 20; ++i) {
            double gval = 0.0;
            for (int k = 0; k <= 5; ++k)
                gval += eff(static_cast<std::size_t>(k), l) * basis_scalar(m.spec, k, s.values[i]);
            CHECK(zt(i, l) == doctest::Approx(gval * xht(i, l)).epsilon(1e-8));
        }
}

TEST_CASE("zero residual gives zero gradients") {
    Graph g = grid_graph(3, 3);
    SymmetricOperator a_hat = normalized_adjacency(g);
    Matrix x = gaussian_matrix(9, 2, 4);
    LinearGnnModel m = init_model(2, 2, jacobi_spec(4), false, false, true, 5);
    Matrix y = forward(m, a_hat, x);
    std::vector<std::size_t> mask(9);
    for (std::size_t i = 0; i < 9; ++i) mask[i] = i;
    Gradients grads;
    const double loss = loss_and_grads(m, a_hat, x, &y, nullptr, mask, LossKind::Squared, nullptr, &grads);
    CHECK(loss == doctest::Approx(0.0).epsilon(1e-14));
    for (double v : grads.w.data()) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
    for (double v : grads.coeffs.data()) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("analytic gradients match finite differences (squared loss)") {
    Graph g = random_connected_graph(12, 0.3, 13);
    SymmetricOperator a_hat = normalized_adjacency(g);
    Matrix x = gaussian_matrix(12, 3, 21);
    Matrix y = gaussian_matrix(12, 2, 22);
    std::vector<std::size_t> mask{0, 2, 3, 5, 7, 8, 11};

    for (bool pcd : {false, true})
        for (bool bias : {false, true}) {
            LinearGnnModel m = init_model(3, 2, jacobi_spec(4, 0.5, 1.0), pcd, false, bias, 31, 1.5);
            Rng rng(55);
            for (double& c : m.coeffs.data()) c = rng.normal();
            if (pcd)
                for (double& e : m.eta) e = 0.3 * rng.normal();
            check_gradients(m, a_hat, x, &y, nullptr, mask, LossKind::Squared, nullptr, 1e-5);
        }
}

TEST_CASE("analytic gradients match finite differences (softmax CE)") {
    Graph g = random_connected_graph(14, 0.3, 14);
    SymmetricOperator a_hat = normalized_adjacency(g);
    Matrix x = gaussian_matrix(14, 3, 23);
    std::vector<int> labels(14);
    Rng lr(9);
    for (int& l : labels) l = static_cast<int>(lr.below(3));
    std::vector<std::size_t> mask{0, 1, 4, 6, 9, 12, 13};

    for (bool pcd : {false, true}) {
        LinearGnnModel m = init_model(3, 3, jacobi_spec(3, 1.0, 0.5), pcd, false, true, 37, 1.2);
        Rng rng(56);
        for (double& c : m.coeffs.data()) c = rng.normal();
        if (pcd)
            for (double& e : m.eta) e = 0.2 * rng.normal();
        check_gradients(m, a_hat, x, nullptr, &labels, mask, LossKind::SoftmaxCE, nullptr, 1e-4);
    }
}

TEST_CASE("gradients chain correctly through fixed dropout masks") {
    Graph g = random_connected_graph(10, 0.35, 15);
    SymmetricOperator a_hat = normalized_adjacency(g);
    Matrix x = gaussian_matrix(10, 3, 27);
    Matrix y = gaussian_matrix(10, 2, 28);
    std::vector<std::size_t> mask{0, 1, 2, 5, 6, 9};
    LinearGnnModel m = init_model(3, 2, jacobi_spec(3), false, false, true, 41);
    Rng rng(57);
    for (double& c : m.coeffs.data()) c = rng.normal();
    DropoutState st = make_dropout(10, 3, 2, 0.3, 0.25, 77);
    REQUIRE(st.active_x());
    REQUIRE(st.active_h());
    check_gradients(m, a_hat, x, &y, nullptr, mask, LossKind::Squared, &st, 1e-5);
}

TEST_CASE("gradients with unifilter aggregate across channels") {
    Graph g = random_connected_graph(10, 0.35, 16);
    SymmetricOperator a_hat = normalized_adjacency(g);
    Matrix x = gaussian_matrix(10, 2, 29);
    Matrix y = gaussian_matrix(10, 3, 30);
    std::vector<std::size_t> mask{0, 3, 4, 7, 8};
    LinearGnnModel m = init_model(2, 3, jacobi_spec(3), false, true, true, 43);
    Rng rng(58);
    for (double& c : m.coeffs.data()) c = rng.normal();
    check_gradients(m, a_hat, x, &y, nullptr, mask, LossKind::Squared, nullptr, 1e-5);
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
    LinearGnnModel m = init_model(2, 2, jacobi_spec(3), false, false, true, 3);
    LinearGnnModel before = m;
    AdamState st = init_adam(m);
    Gradients g;
    g.w = Matrix(2, 2, 0.0);
    g.bias.assign(2, 0.0);
    g.coeffs = Matrix(4, 2, 0.0);
    TrainConfig cfg;
    cfg.wd_w = 0.0;
    cfg.wd_coeffs = 0.0;
    adam_step(m, st, g, cfg);
    CHECK(m.w.data() == before.w.data());
    CHECK(m.coeffs.data() == before.coeffs.data());
}

TEST_CASE("adam: first step magnitude is about lr") {
    LinearGnnModel m = init_model(1, 1, family_spec(BasisFamily::Monomial, 0), false, false, false, 4);
    m.w(0, 0) = 0.0;
    AdamState st = init_adam(m);
    Gradients g;
    g.w = Matrix(1, 1, 0.7);  // any nonzero gradient
    g.bias = {};
    g.coeffs = Matrix(1, 1, 0.0);
    TrainConfig cfg;
    cfg.lr_w = 0.01;
    adam_step(m, st, g, cfg);
    CHECK(std::fabs(m.w(0, 0)) == doctest::Approx(0.01).epsilon(1e-4));
}

TEST_CASE("adam: weight decay honors the group boundaries") {
    LinearGnnModel m = init_model(2, 1, jacobi_spec(2), false, false, false, 5);
    m.w(0, 0) = 1.0;
    m.w(1, 0) = -1.0;
    m.coeffs(0, 0) = 1.0;
    AdamState st = init_adam(m);
    Gradients g;
    g.w = Matrix(2, 1, 0.0);
    g.coeffs = Matrix(3, 1, 0.0);
    TrainConfig cfg;
    cfg.wd_w = 0.1;   // only the W group decays
    cfg.wd_coeffs = 0.0;
    adam_step(m, st, g, cfg);
    CHECK(std::fabs(m.w(0, 0)) < 1.0);
    CHECK(m.coeffs(0, 0) == 1.0);
}

TEST_CASE("train: patience 0 stops after the first non-improving epoch") {
    Graph g = grid_graph(3, 3);
    SymmetricOperator a_hat = normalized_adjacency(g);
    Matrix x = gaussian_matrix(9, 1, 61);
    Matrix y(9, 1, 0.0);
    LinearGnnModel m = init_model(1, 1, family_spec(BasisFamily::Monomial, 2), false, false, true, 6);
    TrainTask task;
    task.a_hat = &a_hat;
    task.x = &x;
    task.y = &y;
    for (std::size_t i = 0; i < 9; ++i) task.train_mask.push_back(i);
    TrainConfig cfg;
    cfg.max_epochs = 500;
    cfg.patience = 0;
    cfg.lr_w = 10.0;  // force oscillation
    cfg.lr_coeffs = 10.0;
    TrainResult r = train(m, task, cfg);
    CHECK(static_cast<int>(r.history.size()) < 500);
}

TEST_CASE("train reaches an exactly representable target") {
    Graph g = grid_graph(4, 4);  // spectra repeat, but degree 10 >= distinct-1 anyway
    SymmetricOperator a_hat = normalized_adjacency(g);
    Spectrum s = eigendecompose(normalized_laplacian(g));
    Vector x = gaussian_vector(16, 62);
    const double xn = norm2(x);
    for (double& v : x) v /= xn;
    Vector y = apply_exact_filter(s, [](double lam) { return 1.0 - 0.8 * lam; }, x);

    Matrix xm(16, 1), ym(16, 1);
    for (std::size_t i = 0; i < 16; ++i) {
        xm(i, 0) = x[i];
        ym(i, 0) = y[i];
    }
    LinearGnnModel m = init_model(1, 1, jacobi_spec(10, 0.5, 0.5), false, false, true, 7);
    TrainTask task;
    task.a_hat = &a_hat;
    task.x = &xm;
    task.y = &ym;
    for (std::size_t i = 0; i < 16; ++i) task.train_mask.push_back(i);
    TrainConfig cfg;
    cfg.max_epochs = 1000;
    cfg.patience = 200;
    cfg.lr_w = 0.01;
    cfg.lr_coeffs = 0.05;
    TrainResult r = train(m, task, cfg);
    CHECK(static_cast<int>(r.history.size()) <= 1000);
    CHECK(r.best_val_metric <= 1e-6);
}

TEST_CASE("train aborts with the epoch on divergence") {
    Graph g = grid_graph(2, 2);
    SymmetricOperator a_hat = normalized_adjacency(g);
    Matrix x(4, 1, 1.0);
    Matrix y(4, 1, std::numeric_limits<double>::quiet_NaN());
    LinearGnnModel m = init_model(1, 1, family_spec(BasisFamily::Monomial, 1), false, false, true, 8);
    TrainTask task;
    task.a_hat = &a_hat;
    task.x = &x;
    task.y = &y;
    for (std::size_t i = 0; i < 4; ++i) task.train_mask.push_back(i);
    TrainConfig cfg;
    CHECK_THROWS_WITH_AS(train(m, task, cfg), doctest::Contains("epoch 0"), NumericError);
}

TEST_CASE("PCD and plain training trajectories coincide when gammas are pinned at 1") {
    Graph g = grid_graph(3, 4);
    SymmetricOperator a_hat = normalized_adjacency(g);
    Matrix x = gaussian_matrix(12, 2, 63);
    Matrix y = gaussian_matrix(12, 2, 64);
    TrainTask task;
    task.a_hat = &a_hat;
    task.x = &x;
    task.y = &y;
    for (std::size_t i = 0; i < 12; ++i) task.train_mask.push_back(i);

    const double gamma_cap = 2.0;
    LinearGnnModel pcd = init_model(2, 2, jacobi_spec(4), true, false, true, 9, gamma_cap);
    for (double& e : pcd.eta) e = std::atanh(0.5);  // gamma_i = 1 exactly
    LinearGnnModel plain = init_model(2, 2, jacobi_spec(4), false, false, true, 9);
    plain.w = pcd.w;
    plain.bias = pcd.bias;
    plain.coeffs = pcd.coeffs;

    TrainConfig cfg;
    cfg.max_epochs = 5;
    cfg.patience = 100;
    cfg.lr_pcd = 0.0;  // beta/alpha receive identical updates, gammas stay 1
    TrainResult rp = train(pcd, task, cfg);
    TrainResult rq = train(plain, task, cfg);
    REQUIRE(rp.history.size() == rq.history.size());
    for (std::size_t e = 0; e < rp.history.size(); ++e)
        CHECK(std::fabs(rp.history[e].train_loss - rq.history[e].train_loss) <= 1e-10);
    CHECK(sfl::test::max_abs_diff(pcd.coeffs, plain.coeffs) <= 1e-10);
}

TEST_CASE("UniFilter cannot express the two-channel P2 task that multi-filter solves") {
    // least-squares oracle: with a shared filter the best achievable SSE is
    // ||Z~||_F^2 - sigma_1^2 of the 2x2 spectral target, here 0.5
    SymmetricOperator a_hat = normalized_adjacency(path_graph(2));
    Matrix x(2, 1, 0.0);
    x(0, 0) = 1.0;
    Matrix y(2, 2);
    y(0, 0) = 0.5;
    y(1, 0) = 0.5;
    y(0, 1) = 0.5;
    y(1, 1) = -0.5;

    // oracle from first principles: z~ = U^T y with U columns (1,1)/sqrt2, (1,-1)/sqrt2
    // z~ = [[1/sqrt2, 0], [0, 1/sqrt2]]; singular values both 1/sqrt2
    const double frob2 = 1.0;       // ||z~||_F^2
    const double sigma1_sq = 0.5;   // best rank-1 capture
    const double unifilter_optimum_sse = frob2 - sigma1_sq;
    CHECK(unifilter_optimum_sse >= 0.1);

    TrainTask task;
    task.a_hat = &a_hat;
    task.x = &x;
    task.y = &y;
    task.train_mask = {0, 1};
    TrainConfig cfg;
    cfg.max_epochs = 4000;
    cfg.patience = 4000;
    cfg.lr_w = 0.05;
    cfg.lr_coeffs = 0.05;

    // multi-filter reaches (near) zero
    LinearGnnModel multi = init_model(1, 2, jacobi_spec(1), false, false, false, 10);
    cfg.max_epochs = 4000;
    TrainResult rm = train(multi, task, cfg);
    CHECK(2.0 * rm.best_val_metric <= 1e-8);  // metric is 0.5*SSE

    // unifilter stalls at the oracle optimum
    LinearGnnModel uni = init_model(1, 2, jacobi_spec(1), false, true, false, 10);
    TrainResult ru = train(uni, task, cfg);
    CHECK(2.0 * ru.best_val_metric >= 0.95 * unifilter_optimum_sse);
}

TEST_CASE("checkpoint round-trip reproduces the model exactly") {
    Graph g = sbm_generate(2, {12, 12}, 0.7, 0.05, 2, 0.2, 19);
    SymmetricOperator a_hat = normalized_adjacency(g);
    LinearGnnModel m = init_model(2, 2, jacobi_spec(4, 0.5, 1.5), true, false, true, 21, 1.5);
    Rng rng(99);
    for (double& c : m.coeffs.data()) c = rng.normal();

    auto path = (std::filesystem::temp_directory_path() / "ckpt.json").string();
    save_checkpoint(m, 77, "abc123", path);
    std::uint64_t seed = 0;
    std::string hash;
    LinearGnnModel r = load_checkpoint(path, &seed, &hash);
    CHECK(seed == 77);
    CHECK(hash == "abc123");
    CHECK(r.w.data() == m.w.data());
    CHECK(r.coeffs.data() == m.coeffs.data());
    CHECK(r.eta == m.eta);
    CHECK(r.gamma_cap == m.gamma_cap);

    std::vector<std::size_t> mask{0, 3, 5, 11, 17, 20};
    const double a1 = evaluate_accuracy(m, a_hat, g.features(), g.labels(), mask);
    const double a2 = evaluate_accuracy(r, a_hat, g.features(), g.labels(), mask);
    CHECK(a1 == a2);
}

TEST_CASE("fixed-family baselines keep their coefficients frozen in training") {
    Graph g = sbm_generate(2, {10, 10}, 0.8, 0.05, 2, 0.2, 23);
    SymmetricOperator a_hat = normalized_adjacency(g);
    BasisSpec appnp;
    appnp.family = BasisFamily::FixedAPPNP;
    appnp.degree = 4;
    appnp.alpha = 0.1;
    LinearGnnModel m = init_model(2, 2, appnp, false, false, true, 25);
    Matrix coeffs_before = m.coeffs;
    TrainTask task;
    task.a_hat = &a_hat;
    task.x = &g.features();
    task.labels = &g.labels();
    for (std::size_t i = 0; i < 20; ++i) (i % 4 ? task.train_mask : task.val_mask).push_back(i);
    TrainConfig cfg;
    cfg.loss = LossKind::SoftmaxCE;
    cfg.max_epochs = 30;
    train(m, task, cfg);
    CHECK(m.coeffs.data() == coeffs_before.data());
}
