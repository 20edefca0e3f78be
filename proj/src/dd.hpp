#pragma once

#include <cmath>

// Minimal double-double arithmetic (~31 significant digits) for the
// interpolation pipeline, where monomial expansion through clustered nodes
// amplifies rounding by many orders of magnitude. Error-free transforms via
// two_sum / fma-based two_prod.

namespace sfl::detail {

struct dd {
    double hi = 0.0;
    double lo = 0.0;
    dd() = default;
    dd(double h) : hi(h), lo(0.0) {}
    dd(double h, double l) : hi(h), lo(l) {}
    double value() const { return hi + lo; }
};

inline dd two_sum(double a, double b) {
    const double s = a + b;
    const double bb = s - a;
    return {s, (a - (s - bb)) + (b - bb)};
}

inline dd quick_two_sum(double a, double b) {
    const double s = a + b;
    return {s, b - (s - a)};
}

inline dd two_prod(double a, double b) {
    const double p = a * b;
    return {p, std::fma(a, b, -p)};
}

inline dd add(const dd& x, const dd& y) {
    dd s = two_sum(x.hi, y.hi);
    s.lo += x.lo + y.lo;
    return quick_two_sum(s.hi, s.lo);
}

inline dd sub(const dd& x, const dd& y) { return add(x, {-y.hi, -y.lo}); }

inline dd mul(const dd& x, const dd& y) {
    dd p = two_prod(x.hi, y.hi);
    p.lo += x.hi * y.lo + x.lo * y.hi;
    return quick_two_sum(p.hi, p.lo);
}

inline dd div(const dd& x, const dd& y) {
    const double q1 = x.hi / y.hi;
    dd r = sub(x, mul(y, dd(q1)));
    const double q2 = r.hi / y.hi;
    r = sub(r, mul(y, dd(q2)));
    const double q3 = r.hi / y.hi;
    dd q = quick_two_sum(q1, q2);
    q.lo += q3;
    return quick_two_sum(q.hi, q.lo);
}

}  // namespace sfl::detail
