#include "sfl/bases.hpp"

#include <cmath>
#include <fstream>

namespace sfl {

std::string family_name(BasisFamily f) {
    switch (f) {
        case BasisFamily::Monomial: return "monomial";
        case BasisFamily::Chebyshev: return "chebyshev";
        case BasisFamily::Bernstein: return "bernstein";
        case BasisFamily::Jacobi: return "jacobi";
        case BasisFamily::FixedAPPNP: return "appnp";
        case BasisFamily::FixedSGC: return "sgc";
        case BasisFamily::OrthoFitted: return "ortho";
    }
    return "?";
}

BasisFamily family_from_name(const std::string& name) {
    if (name == "monomial") return BasisFamily::Monomial;
    if (name == "chebyshev") return BasisFamily::Chebyshev;
    if (name == "bernstein") return BasisFamily::Bernstein;
    if (name == "jacobi") return BasisFamily::Jacobi;
    if (name == "appnp") return BasisFamily::FixedAPPNP;
    if (name == "sgc") return BasisFamily::FixedSGC;
    if (name == "ortho") return BasisFamily::OrthoFitted;
    throw InputError("unknown basis family: " + name);
}

void BasisSpec::validate() const {
    if (degree < 0) throw InputError("basis degree must be >= 0");
    if (family == BasisFamily::Jacobi && (a <= -1.0 || b <= -1.0))
        throw InputError("Jacobi exponents must be > -1");
    if ((family == BasisFamily::FixedAPPNP) && (alpha <= 0.0 || alpha >= 1.0))
        throw InputError("teleport alpha must lie in (0,1)");
    if (family == BasisFamily::OrthoFitted) {
        if (!ortho_coeffs) throw InputError("OrthoFitted spec requires a recurrence table");
        if (ortho_coeffs->max_degree() < degree)
            throw InputError("OrthoFitted recurrence table shorter than requested degree");
    }
}

RecurrenceCoeffs jacobi_recurrence(double a, double b, int k) {
    if (k < 2) throw InputError("jacobi_recurrence: k must be >= 2");
    if (a <= -1.0 || b <= -1.0) throw InputError("jacobi_recurrence: exponents must be > -1");
    const double kk = static_cast<double>(k);
    const double den1 = 2.0 * kk * (kk + a + b);
    const double den2 = 2.0 * kk + a + b - 2.0;
    if (std::fabs(den1) < 1e-12 || std::fabs(den2) < 1e-12)
        throw InputError("jacobi_recurrence: degenerate parameters (a+b too close to -2)");
    RecurrenceCoeffs rc;
    rc.theta = (2.0 * kk + a + b) * (2.0 * kk + a + b - 1.0) / den1;
    rc.theta_prime = (2.0 * kk + a + b - 1.0) * (a * a - b * b) / (den1 * den2);
    rc.theta_dprime =
        (kk + a - 1.0) * (kk + b - 1.0) * (2.0 * kk + a + b) / (kk * (kk + a + b) * den2);
    return rc;
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    if (k > n - k) k = n - k;
    // running product keeps every intermediate an integer (C(n-k+i, i)),
    // exact in double for all K <= 64
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
    return c;
}

namespace {

double jacobi_scalar(double a, double b, int k, double z) {
    if (k == 0) return 1.0;
    double pm1 = 1.0;
    double p = 0.5 * (a - b) + 0.5 * (a + b + 2.0) * z;
    for (int i = 2; i <= k; ++i) {
        const RecurrenceCoeffs rc = jacobi_recurrence(a, b, i);
        const double next = (rc.theta * z + rc.theta_prime) * p - rc.theta_dprime * pm1;
        pm1 = p;
        p = next;
    }
    return p;
}

double ortho_scalar(const OrthoBasisCoeffs& oc, int k, double x) {
    double pm1 = 0.0;
    double p = 1.0 / oc.sqrt_b[0];
    for (int i = 0; i < k; ++i) {
        const double next = ((x - oc.a[i]) * p - oc.sqrt_b[i] * pm1) / oc.sqrt_b[i + 1];
        pm1 = p;
        p = next;
    }
    return p;
}

}  // namespace

double basis_scalar(const BasisSpec& spec, int k, double lambda) {
    if (k < 0 || k > spec.degree) throw InputError("basis_scalar: k out of range 0..K");
    const double z = 1.0 - lambda;
    switch (spec.family) {
        case BasisFamily::Monomial:
        case BasisFamily::FixedAPPNP:
        case BasisFamily::FixedSGC: {
            double p = 1.0;
            for (int i = 0; i < k; ++i) p *= z;
            return p;
        }
        case BasisFamily::Chebyshev: {
            // cos(k arccos z) continued by the recurrence outside [-1,1]
            if (k == 0) return 1.0;
            double tm1 = 1.0, t = z;
            for (int i = 2; i <= k; ++i) {
                const double next = 2.0 * z * t - tm1;
                tm1 = t;
                t = next;
            }
            return t;
        }
        case BasisFamily::Bernstein: {
            const int kdeg = spec.degree;
            return binomial(kdeg, k) * std::pow(1.0 - 0.5 * lambda, kdeg - k) *
                   std::pow(0.5 * lambda, k);
        }
        case BasisFamily::Jacobi:
            return jacobi_scalar(spec.a, spec.b, k, z);
        case BasisFamily::OrthoFitted:
            spec.validate();
            return ortho_scalar(*spec.ortho_coeffs, k, lambda);
    }
    throw InputError("basis_scalar: unknown family");
}

Vector fixed_coeffs(const BasisSpec& spec) {
    spec.validate();
    Vector c(static_cast<std::size_t>(spec.degree) + 1, 0.0);
    if (spec.family == BasisFamily::FixedSGC) {
        c.back() = 1.0;
    } else if (spec.family == BasisFamily::FixedAPPNP) {
        double num = 1.0;
        for (int k = 0; k <= spec.degree; ++k) {
            c[static_cast<std::size_t>(k)] = num / (1.0 - spec.alpha);
            num *= spec.alpha;
        }
    } else {
        throw InputError("fixed_coeffs: spec is not a fixed family");
    }
    return c;
}

std::vector<Vector> apply_basis(const BasisSpec& spec, const SymmetricOperator& a_hat,
                                const Vector& h, const Vector* gammas) {
    spec.validate();
    if (h.size() != a_hat.size()) throw std::invalid_argument("apply_basis: dimension mismatch");
    if (gammas && spec.family != BasisFamily::Jacobi)
        throw InputError("apply_basis: gammas are only supported with the Jacobi family");
    if (gammas && gammas->size() != static_cast<std::size_t>(spec.degree))
        throw std::invalid_argument("apply_basis: gammas must have length K");

    const int kdeg = spec.degree;
    std::vector<Vector> out;
    out.reserve(static_cast<std::size_t>(kdeg) + 1);

    switch (spec.family) {
        case BasisFamily::Monomial:
        case BasisFamily::FixedAPPNP:
        case BasisFamily::FixedSGC: {
            out.push_back(h);
            for (int k = 1; k <= kdeg; ++k) out.push_back(a_hat.apply(out.back()));
            return out;
        }
        case BasisFamily::Chebyshev: {
            out.push_back(h);
            if (kdeg >= 1) out.push_back(a_hat.apply(h));
            for (int k = 2; k <= kdeg; ++k) {
                Vector next = a_hat.apply(out[static_cast<std::size_t>(k - 1)]);
                for (std::size_t i = 0; i < next.size(); ++i)
                    next[i] = 2.0 * next[i] - out[static_cast<std::size_t>(k - 2)][i];
                out.push_back(std::move(next));
            }
            return out;
        }
        case BasisFamily::Jacobi: {
            out.push_back(h);
            if (kdeg >= 1) {
                Vector az = a_hat.apply(h);
                Vector p1(h.size());
                const double c0 = 0.5 * (spec.a - spec.b);
                const double c1 = 0.5 * (spec.a + spec.b + 2.0);
                for (std::size_t i = 0; i < h.size(); ++i) p1[i] = c0 * h[i] + c1 * az[i];
                if (gammas)
                    for (double& v : p1) v *= (*gammas)[0];
                out.push_back(std::move(p1));
            }
            for (int k = 2; k <= kdeg; ++k) {
                const RecurrenceCoeffs rc = jacobi_recurrence(spec.a, spec.b, k);
                const Vector& pk1 = out[static_cast<std::size_t>(k - 1)];
                const Vector& pk2 = out[static_cast<std::size_t>(k - 2)];
                Vector next = a_hat.apply(pk1);
                if (gammas) {
                    const double gk = (*gammas)[static_cast<std::size_t>(k - 1)];
                    const double gk1 = (*gammas)[static_cast<std::size_t>(k - 2)];
                    for (std::size_t i = 0; i < next.size(); ++i)
                        next[i] = gk * rc.theta * next[i] + gk * rc.theta_prime * pk1[i] -
                                  gk * gk1 * rc.theta_dprime * pk2[i];
                } else {
                    for (std::size_t i = 0; i < next.size(); ++i)
                        next[i] = rc.theta * next[i] + rc.theta_prime * pk1[i] -
                                  rc.theta_dprime * pk2[i];
                }
                out.push_back(std::move(next));
            }
            return out;
        }
        case BasisFamily::Bernstein: {
            // b_k = C(K,k) ((I+A)/2)^{K-k} ((I-A)/2)^k h
            Vector minus_pow = h;  // ((I-A)/2)^k h
            for (int k = 0; k <= kdeg; ++k) {
                if (k > 0) {
                    Vector av = a_hat.apply(minus_pow);
                    for (std::size_t i = 0; i < minus_pow.size(); ++i)
                        minus_pow[i] = 0.5 * (minus_pow[i] - av[i]);
                }
                Vector bk = minus_pow;
                for (int j = 0; j < kdeg - k; ++j) {
                    Vector av = a_hat.apply(bk);
                    for (std::size_t i = 0; i < bk.size(); ++i) bk[i] = 0.5 * (bk[i] + av[i]);
                }
                const double coef = binomial(kdeg, k);
                for (double& v : bk) v *= coef;
                out.push_back(std::move(bk));
            }
            return out;
        }
        case BasisFamily::OrthoFitted: {
            // recurrence runs in lambda; multiply-by-lambda is v - A_hat v
            const OrthoBasisCoeffs& oc = *spec.ortho_coeffs;
            Vector p0 = h;
            for (double& v : p0) v /= oc.sqrt_b[0];
            out.push_back(std::move(p0));
            Vector pm1(h.size(), 0.0);
            for (int k = 0; k < kdeg; ++k) {
                const Vector& p = out.back();
                Vector av = a_hat.apply(p);
                Vector next(h.size());
                for (std::size_t i = 0; i < next.size(); ++i) {
                    const double lam_p = p[i] - av[i];
                    next[i] = (lam_p - oc.a[static_cast<std::size_t>(k)] * p[i] -
                               oc.sqrt_b[static_cast<std::size_t>(k)] * pm1[i]) /
                              oc.sqrt_b[static_cast<std::size_t>(k) + 1];
                }
                pm1 = p;
                out.push_back(std::move(next));
            }
            return out;
        }
    }
    throw InputError("apply_basis: unknown family");
}

std::vector<BasisCurvePoint> basis_curve(const BasisSpec& spec, std::size_t grid_points) {
    spec.validate();
    std::vector<BasisCurvePoint> pts;
    pts.reserve(grid_points * static_cast<std::size_t>(spec.degree + 1));
    for (int k = 0; k <= spec.degree; ++k)
        for (std::size_t i = 0; i < grid_points; ++i) {
            const double lam = 2.0 * static_cast<double>(i) / static_cast<double>(grid_points - 1);
            pts.push_back({lam, k, basis_scalar(spec, k, lam)});
        }
    return pts;
}

void save_basis_curve_csv(const std::vector<BasisCurvePoint>& curve, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write basis curve: " + path);
    out << "lambda,k,value\n";
    out.precision(17);
    for (const auto& p : curve) out << p.lambda << "," << p.k << "," << p.value << "\n";
}

}  // namespace sfl
