#ifndef CDTREF_DETAIL_EXPANSION_HPP
#define CDTREF_DETAIL_EXPANSION_HPP

// Exact floating-point expansion arithmetic in the style of Shewchuk's
// "Adaptive Precision Floating-Point Arithmetic". An expansion is a sum of
// nonoverlapping doubles stored in increasing order of magnitude; its sign
// is the sign of its largest (last nonzero) component.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

namespace cdtref::detail {

struct TwoDouble {
    double hi;
    double lo;
};

inline TwoDouble two_sum(double a, double b) {
    const double x = a + b;
    const double bv = x - a;
    const double av = x - bv;
    const double br = b - bv;
    const double ar = a - av;
    return {x, ar + br};
}

inline TwoDouble two_diff(double a, double b) { return two_sum(a, -b); }

inline TwoDouble two_prod(double a, double b) {
    const double x = a * b;
    return {x, std::fma(a, b, -x)};
}

// h = e + f, zero-eliminated. h must have capacity len_e + len_f and must not
// alias the inputs. Returns the number of components written (>= 1; a zero
// expansion is returned as the single component 0.0).
inline std::size_t expansion_sum(std::span<const double> e, std::span<const double> f, double* h) {
    std::size_t ei = 0, fi = 0, hi = 0;
    double q;
    auto enow = [&] { return ei < e.size() ? e[ei] : 0.0; };
    auto fnow = [&] { return fi < f.size() ? f[fi] : 0.0; };

    if (e.empty() && f.empty()) {
        h[0] = 0.0;
        return 1;
    }
    if (e.empty() || (fi < f.size() && std::abs(fnow()) < std::abs(enow()))) {
        q = fnow();
        ++fi;
    } else {
        q = enow();
        ++ei;
    }
    while (ei < e.size() || fi < f.size()) {
        double next;
        if (ei >= e.size() || (fi < f.size() && std::abs(fnow()) < std::abs(enow()))) {
            next = fnow();
            ++fi;
        } else {
            next = enow();
            ++ei;
        }
        const TwoDouble s = two_sum(q, next);
        if (s.lo != 0.0) h[hi++] = s.lo;
        q = s.hi;
    }
    if (q != 0.0 || hi == 0) h[hi++] = q;
    return hi;
}

// h = e * b, zero-eliminated. h must have capacity 2 * len_e.
inline std::size_t scale_expansion(std::span<const double> e, double b, double* h) {
    std::size_t hi = 0;
    if (e.empty()) {
        h[0] = 0.0;
        return 1;
    }
    TwoDouble p = two_prod(e[0], b);
    if (p.lo != 0.0) h[hi++] = p.lo;
    double q = p.hi;
    for (std::size_t i = 1; i < e.size(); ++i) {
        const TwoDouble t = two_prod(e[i], b);
        const TwoDouble s1 = two_sum(q, t.lo);
        if (s1.lo != 0.0) h[hi++] = s1.lo;
        const TwoDouble s2 = two_sum(t.hi, s1.hi);
        if (s2.lo != 0.0) h[hi++] = s2.lo;
        q = s2.hi;
    }
    if (q != 0.0 || hi == 0) h[hi++] = q;
    return hi;
}

inline int expansion_sign(std::span<const double> e) {
    const double top = e.back();
    return (top > 0.0) - (top < 0.0);
}

// Fixed-capacity expansion value supporting exact +, -, * of dyadic values.
// Capacity is a template parameter; overflow is impossible as long as callers
// size results as sum (for +) or 2*product (for *) of operand capacities.
template <std::size_t Cap>
struct Expansion {
    double c[Cap];
    std::size_t n = 0;

    std::span<const double> view() const { return {c, n}; }
    int sign() const { return expansion_sign(view()); }

    static Expansion of(double v) {
        Expansion r;
        r.c[0] = v;
        r.n = 1;
        return r;
    }

    static Expansion product(double a, double b) {
        static_assert(Cap >= 2);
        Expansion r;
        const TwoDouble p = two_prod(a, b);
        r.n = 0;
        if (p.lo != 0.0) r.c[r.n++] = p.lo;
        if (p.hi != 0.0 || r.n == 0) r.c[r.n++] = p.hi;
        if (r.n == 2 && r.c[1] == 0.0) r.n = 1; // hi zero, lo nonzero cannot happen; keep tidy
        return r;
    }
};

template <std::size_t C1, std::size_t C2>
Expansion<C1 + C2> operator+(const Expansion<C1>& a, const Expansion<C2>& b) {
    Expansion<C1 + C2> r;
    r.n = expansion_sum(a.view(), b.view(), r.c);
    return r;
}

template <std::size_t Cap>
Expansion<Cap> operator-(const Expansion<Cap>& a) {
    Expansion<Cap> r;
    r.n = a.n;
    for (std::size_t i = 0; i < a.n; ++i) r.c[i] = -a.c[i];
    return r;
}

template <std::size_t C1, std::size_t C2>
Expansion<C1 + C2> operator-(const Expansion<C1>& a, const Expansion<C2>& b) {
    return a + (-b);
}

// Full exact product: scale b by every component of a and accumulate.
template <std::size_t C1, std::size_t C2>
Expansion<2 * C1 * C2> operator*(const Expansion<C1>& a, const Expansion<C2>& b) {
    Expansion<2 * C1 * C2> acc;
    acc.c[0] = 0.0;
    acc.n = 1;
    double part[2 * C2];
    double merged[2 * C1 * C2];
    for (std::size_t i = 0; i < a.n; ++i) {
        const std::size_t pn = scale_expansion(b.view(), a.c[i], part);
        const std::size_t mn = expansion_sum(acc.view(), {part, pn}, merged);
        std::copy_n(merged, mn, acc.c);
        acc.n = mn;
    }
    return acc;
}

} // namespace cdtref::detail

#endif
