#pragma once

// Truncated bivariate Taylor scalars ("jets") for propagating derivatives of
// covariance expressions with respect to the two kernel arguments. A
// Jet<N1,N2> carries coefficients c[i][j] = (1/i!)(1/j!) d^i/ds^i d^j/dt^j f
// of a function f(s,t) around (0,0), truncated at degree N1 in s and N2 in t.
// Arithmetic on jets computes the corresponding coefficients of sums,
// products, quotients and elementary-function compositions exactly (up to
// rounding), so extracting c[i][j]*i!*j! yields analytic mixed partials.

#include <array>
#include <cmath>
#include <stdexcept>

namespace cgrf {

template <int N1, int N2>
struct Jet {
    static_assert(N1 >= 0 && N2 >= 0 && N1 <= 3 && N2 <= 3, "jet order out of range");
    // c[i][j] is the Taylor coefficient of s^i t^j
    std::array<std::array<double, N2 + 1>, N1 + 1> c{};

    Jet() = default;
    explicit Jet(double v) { c[0][0] = v; }

    static Jet constant(double v) { return Jet(v); }

    // value + ds*s + dt*t seed for an input coordinate
    static Jet seed(double v, double ds, double dt) {
        Jet j;
        j.c[0][0] = v;
        if constexpr (N1 >= 1) j.c[1][0] = ds;
        if constexpr (N2 >= 1) j.c[0][1] = dt;
        return j;
    }

    double value() const { return c[0][0]; }

    // i!*j! * c[i][j]; the (i,j) mixed partial
    double deriv(int i, int j) const {
        static constexpr double fact[4] = {1.0, 1.0, 2.0, 6.0};
        return c[i][j] * fact[i] * fact[j];
    }

    Jet operator-() const {
        Jet r;
        for (int i = 0; i <= N1; ++i)
            for (int j = 0; j <= N2; ++j) r.c[i][j] = -c[i][j];
        return r;
    }

    Jet& operator+=(const Jet& o) {
        for (int i = 0; i <= N1; ++i)
            for (int j = 0; j <= N2; ++j) c[i][j] += o.c[i][j];
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        for (int i = 0; i <= N1; ++i)
            for (int j = 0; j <= N2; ++j) c[i][j] -= o.c[i][j];
        return *this;
    }
    Jet& operator*=(double a) {
        for (int i = 0; i <= N1; ++i)
            for (int j = 0; j <= N2; ++j) c[i][j] *= a;
        return *this;
    }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator+(Jet a, double b) { a.c[0][0] += b; return a; }
    friend Jet operator+(double b, Jet a) { a.c[0][0] += b; return a; }
    friend Jet operator-(Jet a, double b) { a.c[0][0] -= b; return a; }
    friend Jet operator-(double b, const Jet& a) { Jet r = -a; r.c[0][0] += b; return r; }
    friend Jet operator*(Jet a, double b) { return a *= b; }
    friend Jet operator*(double b, Jet a) { return a *= b; }
    friend Jet operator/(Jet a, double b) { return a *= (1.0 / b); }

    friend Jet operator*(const Jet& a, const Jet& b) {
        Jet r;
        for (int i = 0; i <= N1; ++i)
            for (int j = 0; j <= N2; ++j) {
                double s = 0.0;
                for (int p = 0; p <= i; ++p)
                    for (int q = 0; q <= j; ++q) s += a.c[p][q] * b.c[i - p][j - q];
                r.c[i][j] = s;
            }
        return r;
    }

    Jet& operator*=(const Jet& o) { *this = *this * o; return *this; }
    Jet& operator/=(const Jet& o) { *this = *this / o; return *this; }

    friend Jet operator/(const Jet& a, const Jet& b) { return a * recip(b); }
    friend Jet operator/(double a, const Jet& b) { return recip(b) * a; }
};

namespace jets {

// f applied to a jet via the truncated Taylor series of f around u.value():
// f(u0 + D) = sum_k derivs[k]/k! D^k, D nilpotent in the truncated algebra.
// derivs[k] must hold f^(k)(u0) for k = 0..N1+N2.
template <int N1, int N2>
Jet<N1, N2> compose(const std::array<double, 7>& derivs, const Jet<N1, N2>& u) {
    Jet<N1, N2> delta = u;
    delta.c[0][0] = 0.0;
    Jet<N1, N2> r(derivs[0]);
    Jet<N1, N2> dp(1.0);
    double fact = 1.0;
    for (int k = 1; k <= N1 + N2; ++k) {
        dp *= delta;
        fact *= k;
        r += dp * (derivs[k] / fact);
    }
    return r;
}

}  // namespace jets

template <int N1, int N2>
Jet<N1, N2> recip(const Jet<N1, N2>& u) {
    const double v = u.value();
    std::array<double, 7> d{};
    // f^(k)(v) = (-1)^k k! / v^{k+1}
    double p = 1.0 / v;
    for (int k = 0; k <= N1 + N2; ++k) {
        d[k] = p;
        p *= -(k + 1) / v;
    }
    return jets::compose(d, u);
}

template <int N1, int N2>
Jet<N1, N2> exp(const Jet<N1, N2>& u) {
    std::array<double, 7> d{};
    const double e = std::exp(u.value());
    for (int k = 0; k <= N1 + N2; ++k) d[k] = e;
    return jets::compose(d, u);
}

template <int N1, int N2>
Jet<N1, N2> log(const Jet<N1, N2>& u) {
    const double v = u.value();
    if (v <= 0.0) throw std::domain_error("jet log: nonpositive value");
    std::array<double, 7> d{};
    d[0] = std::log(v);
    double p = 1.0 / v;
    for (int k = 1; k <= N1 + N2; ++k) {
        d[k] = p;  // (k-1)! (-1)^{k-1} / v^k
        p *= -k / v;
    }
    return jets::compose(d, u);
}

template <int N1, int N2>
Jet<N1, N2> sin(const Jet<N1, N2>& u) {
    const double s = std::sin(u.value()), c = std::cos(u.value());
    std::array<double, 7> d{};
    const double cyc[4] = {s, c, -s, -c};
    for (int k = 0; k <= N1 + N2; ++k) d[k] = cyc[k % 4];
    return jets::compose(d, u);
}

template <int N1, int N2>
Jet<N1, N2> cos(const Jet<N1, N2>& u) {
    const double s = std::sin(u.value()), c = std::cos(u.value());
    std::array<double, 7> d{};
    const double cyc[4] = {c, -s, -c, s};
    for (int k = 0; k <= N1 + N2; ++k) d[k] = cyc[k % 4];
    return jets::compose(d, u);
}

template <int N1, int N2>
Jet<N1, N2> sqrt(const Jet<N1, N2>& u) {
    const double v = u.value();
    if (v < 0.0) throw std::domain_error("jet sqrt: negative value");
    std::array<double, 7> d{};
    // f^(k)(v) = (1/2)(1/2-1)...(1/2-k+1) v^{1/2-k}
    double coef = 1.0;
    double vpow = std::sqrt(v);
    for (int k = 0; k <= N1 + N2; ++k) {
        d[k] = coef * vpow;
        coef *= (0.5 - k);
        vpow /= v;
    }
    return jets::compose(d, u);
}

// integer power by repeated multiplication
template <int N1, int N2>
Jet<N1, N2> powi(Jet<N1, N2> base, long n) {
    if (n < 0) return recip(powi(base, -n));
    Jet<N1, N2> r(1.0);
    while (n > 0) {
        if (n & 1) r *= base;
        base *= base;
        n >>= 1;
    }
    return r;
}

template <int N1, int N2>
Jet<N1, N2> pow(const Jet<N1, N2>& base, double e) {
    const long n = static_cast<long>(e);
    if (static_cast<double>(n) == e) return powi(base, n);
    return exp(log(base) * e);
}

// plain-double counterparts so scalar-generic code compiles for double too
inline double value_of(double x) { return x; }
template <int N1, int N2>
double value_of(const Jet<N1, N2>& j) { return j.value(); }

}  // namespace cgrf
