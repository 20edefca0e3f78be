#include "sfl/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace sfl {

Spectrum eigendecompose(const SymmetricOperator& op) {
    const std::size_t n = op.size();
    if (n > 5000) throw NumericError("eigendecompose: n > 5000 is out of scope");
    EigenResult er;
    try {
        er = symmetric_eigen(op.to_dense());
    } catch (const std::runtime_error& e) {
        throw NumericError(e.what());
    }
    Spectrum s{std::move(er.values), std::move(er.vectors)};

    for (std::size_t i = 0; i + 1 < n; ++i)
        if (s.values[i] > s.values[i + 1]) throw NumericError("eigendecompose: values not sorted");
    for (double v : s.values)
        if (v < -1e-9 || v > 2.0 + 1e-9)
            throw NumericError("eigendecompose: eigenvalue outside [0, 2]: " + std::to_string(v));

    // ||U^T U - I||_F
    double ortho_err = 0.0;
    {
        Matrix gram = gram_style(s.u, s.u);
        for (std::size_t i = 0; i < n; ++i) gram(i, i) -= 1.0;
        ortho_err = frobenius(gram);
    }
    if (ortho_err > 1e-8) throw NumericError("eigendecompose: eigenvectors not orthonormal");

    // ||L U - U diag||_F relative to max(1, ||L||_F); equals the
    // reconstruction error ||U diag U^T - L||_F since U is orthogonal
    double op_norm = 0.0;
    for (double v : op.values()) op_norm += v * v;
    op_norm = std::sqrt(op_norm);
    double rec_err = 0.0;
    {
        Vector col(n), lcol(n);
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < n; ++i) col[i] = s.u(i, j);
            op.apply_into(col, lcol);
            for (std::size_t i = 0; i < n; ++i) {
                const double d = lcol[i] - s.values[j] * col[i];
                rec_err += d * d;
            }
        }
        rec_err = std::sqrt(rec_err);
    }
    if (rec_err > 1e-8 * std::max(1.0, op_norm))
        throw NumericError("eigendecompose: reconstruction error above contract");
    return s;
}

Matrix gft(const Spectrum& s, const Matrix& x) {
    if (x.rows() != s.size()) throw std::invalid_argument("gft: dimension mismatch");
    return gram_style(s.u, x);  // U^T X
}

Matrix igft(const Spectrum& s, const Matrix& xt) {
    if (xt.rows() != s.size()) throw std::invalid_argument("igft: dimension mismatch");
    return matmul(s.u, xt);
}

Vector gft(const Spectrum& s, const Vector& x) {
    if (x.size() != s.size()) throw std::invalid_argument("gft: dimension mismatch");
    const std::size_t n = s.size();
    Vector out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        const double* urow = s.u.row(i);
        for (std::size_t j = 0; j < n; ++j) out[j] += urow[j] * xi;
    }
    return out;
}

Vector igft(const Spectrum& s, const Vector& xt) {
    if (xt.size() != s.size()) throw std::invalid_argument("igft: dimension mismatch");
    return matvec(s.u, xt);
}

Vector spectral_energy(const Spectrum& s, const Matrix& x) {
    Matrix xt = gft(s, x);
    Vector w(xt.rows(), 0.0);
    for (std::size_t i = 0; i < xt.rows(); ++i) {
        double e = 0.0;
        const double* row = xt.row(i);
        for (std::size_t j = 0; j < xt.cols(); ++j) e += row[j] * row[j];
        w[i] = e;
    }
    return w;
}

Vector spectral_energy(const Spectrum& s, const Vector& x) {
    Vector xt = gft(s, x);
    for (double& v : xt) v *= v;
    return xt;
}

std::vector<EigenvalueGroup> eigenvalue_groups(const Vector& values, double tol_eig) {
    std::vector<EigenvalueGroup> groups;
    std::size_t begin = 0;
    for (std::size_t i = 1; i <= values.size(); ++i) {
        if (i == values.size() || values[i] - values[i - 1] > tol_eig) {
            groups.push_back({begin, i, values[begin]});
            begin = i;
        }
    }
    return groups;
}

Diagnostics diagnose(const Spectrum& s, const Matrix* x, double tol_missing, double tol_eig) {
    if (tol_missing <= 0.0 || tol_eig <= 0.0) throw InputError("diagnose: tolerances must be > 0");
    Diagnostics d;
    d.groups = eigenvalue_groups(s.values, tol_eig);
    std::size_t multi = 0;
    for (const auto& g : d.groups)
        if (g.size() > 1) ++multi;
    d.multi_ratio = d.groups.empty() ? 0.0 : 100.0 * static_cast<double>(multi) / static_cast<double>(d.groups.size());
    if (x) {
        Vector energy = spectral_energy(s, *x);
        std::size_t missing = 0;
        for (double e : energy)
            if (std::sqrt(e) <= tol_missing) ++missing;
        d.n_missing = missing;
    }
    return d;
}

DensityEstimate signal_density(const Spectrum& s, const Matrix& x, std::size_t bins) {
    if (bins < 1) throw InputError("signal_density: bins must be >= 1");
    Vector energy = spectral_energy(s, x);
    DensityEstimate d;
    d.bin_edges.resize(bins + 1);
    for (std::size_t j = 0; j <= bins; ++j)
        d.bin_edges[j] = 2.0 * static_cast<double>(j) / static_cast<double>(bins);
    const double width = 2.0 / static_cast<double>(bins);

    d.cumulative.assign(bins + 1, 0.0);
    d.density.assign(bins, 0.0);
    for (std::size_t i = 0; i < energy.size(); ++i) {
        const double lam = s.values[i];
        for (std::size_t j = 0; j <= bins; ++j)
            if (lam <= d.bin_edges[j]) d.cumulative[j] += energy[i];
        // atom at 0 belongs to bin 0, atoms on interior edges to the left bin
        std::size_t bin;
        if (lam <= 0.0) {
            bin = 0;
        } else {
            bin = static_cast<std::size_t>(std::ceil(lam / width)) - 1;
            bin = std::min(bin, bins - 1);
        }
        d.density[bin] += energy[i];
    }
    for (double& f : d.density) f /= width;
    return d;
}

void save_density_csv(const DensityEstimate& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write density csv: " + path);
    out << "lambda_lo,lambda_hi,F,f\n";
    out.precision(17);
    for (std::size_t j = 0; j + 1 < d.bin_edges.size(); ++j)
        out << d.bin_edges[j] << "," << d.bin_edges[j + 1] << "," << d.cumulative[j + 1] << ","
            << d.density[j] << "\n";
}

Matrix hessian(const Spectrum& s, const Vector& weights, const BasisSpec& spec) {
    if (weights.size() != s.size()) throw std::invalid_argument("hessian: weight length mismatch");
    for (double w : weights)
        if (w < 0.0) throw InputError("hessian: weights must be >= 0");
    const std::size_t kk = static_cast<std::size_t>(spec.degree) + 1;
    Matrix h(kk, kk, 0.0);
    Vector vals(kk);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double w = weights[i];
        for (std::size_t k = 0; k < kk; ++k)
            vals[k] = basis_scalar(spec, static_cast<int>(k), s.values[i]);
        for (std::size_t k1 = 0; k1 < kk; ++k1)
            for (std::size_t k2 = 0; k2 < kk; ++k2) h(k1, k2) += vals[k1] * vals[k2] * w;
    }
    return h;
}

double condition_number(const Matrix& h) {
    EigenResult er = symmetric_eigen(h);
    double amax = 0.0, amin = std::numeric_limits<double>::infinity();
    for (double v : er.values) {
        amax = std::max(amax, std::fabs(v));
        amin = std::min(amin, std::fabs(v));
    }
    if (amax == 0.0 || amin <= 1e-14 * amax) return std::numeric_limits<double>::infinity();
    return amax / amin;
}

OrthoBasisCoeffs fit_orthonormal_basis(const Spectrum& s, const Vector& weights, int degree) {
    if (weights.size() != s.size())
        throw std::invalid_argument("fit_orthonormal_basis: weight length mismatch");
    if (degree < 0) throw InputError("fit_orthonormal_basis: degree must be >= 0");

    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw InputError("fit_orthonormal_basis: weights must be >= 0");
        total += w;
    }
    if (total <= 0.0) throw InputError("fit_orthonormal_basis: all weights are zero");

    // distinct support points carrying positive weight
    std::size_t support = 0;
    for (const auto& g : eigenvalue_groups(s.values)) {
        double w = 0.0;
        for (std::size_t i = g.begin; i < g.end; ++i) w += weights[i];
        if (w > 1e-12 * total) ++support;
    }
    if (static_cast<std::size_t>(degree) + 1 > support)
        throw InputError("fit_orthonormal_basis: requested degree " + std::to_string(degree) +
                         " needs " + std::to_string(degree + 1) +
                         " weighted support points; max feasible degree is " +
                         std::to_string(support - 1));

    const std::size_t n = s.size();
    OrthoBasisCoeffs oc;
    oc.a.resize(static_cast<std::size_t>(degree) + 1, 0.0);
    oc.sqrt_b.resize(static_cast<std::size_t>(degree) + 2, 0.0);
    oc.sqrt_b[0] = std::sqrt(total);

    // orthonormal-form Stieltjes with full reorthogonalization
    std::vector<Vector> p;  // values of p_0..p_k at the support points
    p.emplace_back(n, 1.0 / oc.sqrt_b[0]);
    for (int k = 0; k <= degree; ++k) {
        const Vector& pk = p.back();
        double ak = 0.0;
        for (std::size_t i = 0; i < n; ++i) ak += weights[i] * s.values[i] * pk[i] * pk[i];
        oc.a[static_cast<std::size_t>(k)] = ak;
        if (k == degree) break;

        Vector r(n);
        const Vector* pm1 = (k > 0) ? &p[static_cast<std::size_t>(k - 1)] : nullptr;
        for (std::size_t i = 0; i < n; ++i) {
            double v = (s.values[i] - ak) * pk[i];
            if (pm1) v -= oc.sqrt_b[static_cast<std::size_t>(k)] * (*pm1)[i];
            r[i] = v;
        }
        // full reorthogonalization pass against all previous polynomials
        for (const Vector& pj : p) {
            double proj = 0.0;
            for (std::size_t i = 0; i < n; ++i) proj += weights[i] * r[i] * pj[i];
            for (std::size_t i = 0; i < n; ++i) r[i] -= proj * pj[i];
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) norm += weights[i] * r[i] * r[i];
        norm = std::sqrt(norm);
        if (!(norm > 1e-14 * std::sqrt(total)))
            throw NumericError("fit_orthonormal_basis: recurrence broke down at degree " +
                               std::to_string(k + 1));
        oc.sqrt_b[static_cast<std::size_t>(k) + 1] = norm;
        for (double& v : r) v /= norm;
        p.push_back(std::move(r));
    }
    return oc;
}

BasisSpec fit_orthonormal_spec(const Spectrum& s, const Vector& weights, int degree) {
    BasisSpec spec;
    spec.family = BasisFamily::OrthoFitted;
    spec.degree = degree;
    spec.ortho_coeffs = fit_orthonormal_basis(s, weights, degree);
    return spec;
}

std::string filter_name(FilterId f) {
    switch (f) {
        case FilterId::Low: return "low";
        case FilterId::High: return "high";
        case FilterId::Band: return "band";
        case FilterId::Reject: return "reject";
        case FilterId::Comb: return "comb";
        case FilterId::Identity: return "identity";
        case FilterId::Cosine: return "cos";
    }
    return "?";
}

FilterId filter_from_name(const std::string& name) {
    if (name == "low") return FilterId::Low;
    if (name == "high") return FilterId::High;
    if (name == "band") return FilterId::Band;
    if (name == "reject") return FilterId::Reject;
    if (name == "comb") return FilterId::Comb;
    if (name == "identity") return FilterId::Identity;
    if (name == "cos") return FilterId::Cosine;
    throw InputError("unknown filter: " + name);
}

double filter_eval(FilterId f, double lambda) {
    switch (f) {
        case FilterId::Low: return std::exp(-10.0 * lambda * lambda);
        case FilterId::High: return 1.0 - std::exp(-10.0 * lambda * lambda);
        case FilterId::Band: return std::exp(-10.0 * (lambda - 1.0) * (lambda - 1.0));
        case FilterId::Reject: return 1.0 - std::exp(-10.0 * (lambda - 1.0) * (lambda - 1.0));
        case FilterId::Comb: return std::fabs(std::sin(M_PI * lambda));
        case FilterId::Identity: return 1.0;
        case FilterId::Cosine: return std::cos(lambda);
    }
    return 0.0;
}

Vector apply_exact_filter(const Spectrum& s, FilterId h, const Vector& x) {
    return apply_exact_filter(s, [h](double lam) { return filter_eval(h, lam); }, x);
}

Vector apply_exact_filter(const Spectrum& s, const std::function<double(double)>& h,
                          const Vector& x) {
    Vector xt = gft(s, x);
    for (std::size_t i = 0; i < xt.size(); ++i) xt[i] *= h(s.values[i]);
    return igft(s, xt);
}

}  // namespace sfl
