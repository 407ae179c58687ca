#pragma once

// Base covariance functions (squared exponential, half-integer Matern,
// periodic, products over disjoint dimension groups, sums), their analytic
// partial derivatives, and first-order boundary operators L = a*d/dx + b.
//
// Derivatives are evaluated in closed form, either directly (mixed partials
// routed to one-dimensional factors) or through jet-valued arguments, which
// propagates exact derivatives of whole covariance expressions. Finite
// differences appear only in tests.
//
// Smoothness gates: a Matern(nu) factor admits derivative order at most
// ceil(nu)-1 per argument per dimension (so at most twice the sample-path
// differentiability in total); violations raise SmoothnessError rather than
// returning NaN. Derivatives of the multi-dimensional isotropic Matern are
// not supported; use one-dimensional Matern product factors.

#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <variant>
#include <vector>

#include "cgrf/common.hpp"
#include "cgrf/jet.hpp"

namespace cgrf {

constexpr int kUnboundedDiff = 1 << 20;

struct Hyperparams {
    double precision = 1.0;             // alpha; prior variance is 1/alpha
    std::vector<double> lengthscales;   // one per dimension
    double nu = 1.5;                    // Matern only
    double period = 1.0;                // periodic only
};

struct BoundaryOperator {
    double a = 0.0;  // derivative coefficient
    double b = 1.0;  // identity coefficient
    int axis = 0;

    BoundaryOperator() = default;
    BoundaryOperator(double a_, double b_, int axis_) : a(a_), b(b_), axis(axis_) {
        if (a == 0.0 && b == 0.0)
            throw ConfigError("boundary operator: a and b cannot both be zero");
    }
    static BoundaryOperator identity() { return BoundaryOperator(0.0, 1.0, 0); }
    static BoundaryOperator derivative(int axis, double a = 1.0) {
        return BoundaryOperator(a, 0.0, axis);
    }
    static BoundaryOperator robin(double a, double b, int axis) {
        return BoundaryOperator(a, b, axis);
    }
    bool is_identity() const { return a == 0.0; }
    int order() const { return a == 0.0 ? 0 : 1; }
};

// ---------------------------------------------------------------------------
// One-dimensional derivative evaluators (unit variance)

namespace k1d {

// n-th derivative of exp(-d^2/(2 ls^2)) via probabilists' Hermite recursion
template <class SJ>
SJ se_deriv(double ls, int n, const SJ& d) {
    const SJ z = d * (1.0 / ls);
    SJ he_prev(1.0), he(1.0);
    if (n >= 1) he = z;
    for (int k = 1; k < n; ++k) {
        const SJ next = z * he - static_cast<double>(k) * he_prev;
        he_prev = he;
        he = next;
    }
    using std::exp;
    const SJ g = exp(z * z * (-0.5));
    double scale = 1.0;
    for (int k = 0; k < n; ++k) scale *= -1.0 / ls;
    return he * g * scale;
}

struct MaternTables {
    double c = 0.0;  // sqrt(2 nu) / ls
    int s = 0;       // sample-path differentiability = ceil(nu) - 1
    // P[n] holds coefficients of the polynomial in u = c|d| with
    // phi^(n)(d) = sign(d)^n c^n P[n](c|d|) exp(-c|d|); P[n+1] = P[n]' - P[n]
    std::vector<std::vector<double>> P;

    explicit MaternTables(double nu = 1.5, double ls = 1.0) {
        const double half = nu - std::floor(nu);
        if (std::abs(half - 0.5) > 1e-12 || nu <= 0.0 || nu > 3.5)
            throw ConfigError("matern: nu must be one of 1/2, 3/2, 5/2, 7/2");
        s = static_cast<int>(std::ceil(nu)) - 1;
        c = std::sqrt(2.0 * nu) / ls;
        std::vector<double> p0;
        if (s == 0) p0 = {1.0};
        else if (s == 1) p0 = {1.0, 1.0};
        else if (s == 2) p0 = {1.0, 1.0, 1.0 / 3.0};
        else p0 = {1.0, 1.0, 0.4, 1.0 / 15.0};
        P.push_back(p0);
        for (int n = 1; n <= 2 * s; ++n) {
            const auto& prev = P.back();
            std::vector<double> next(prev.size(), 0.0);
            for (std::size_t i = 0; i + 1 < prev.size(); ++i)
                next[i] = prev[i + 1] * static_cast<double>(i + 1);
            for (std::size_t i = 0; i < prev.size(); ++i) next[i] -= prev[i];
            while (next.size() > 1 && next.back() == 0.0) next.pop_back();
            P.push_back(next);
        }
    }

    double deriv_at_zero(int n) const {
        if (n % 2 == 1) return 0.0;
        double cn = 1.0;
        for (int k = 0; k < n; ++k) cn *= c;
        return cn * P[n][0];
    }
};

template <class SJ>
SJ poly_eval(const std::vector<double>& p, const SJ& u) {
    SJ r(p.back());
    for (int i = static_cast<int>(p.size()) - 2; i >= 0; --i) r = r * u + p[i];
    return r;
}

inline double matern_deriv(const MaternTables& t, int n, double d) {
    if (n > 2 * t.s)
        throw SmoothnessError("matern: derivative order exceeds kernel smoothness");
    if (d == 0.0) return t.deriv_at_zero(n);
    const double u = t.c * std::abs(d);
    const double sgn = (d > 0.0) ? 1.0 : -1.0;
    double cn = 1.0;
    for (int k = 0; k < n; ++k) cn *= sgn * t.c;
    return cn * poly_eval(t.P[n], u) * std::exp(-u);
}

template <int N1, int N2>
Jet<N1, N2> matern_deriv(const MaternTables& t, int n, const Jet<N1, N2>& d) {
    if (n > 2 * t.s)
        throw SmoothnessError("matern: derivative order exceeds kernel smoothness");
    const double v = d.value();
    if (v != 0.0) {
        const Jet<N1, N2> u = (v > 0.0 ? d : -d) * t.c;
        double cn = 1.0;
        const double sgn = (v > 0.0) ? 1.0 : -1.0;
        for (int k = 0; k < n; ++k) cn *= sgn * t.c;
        using cgrf::exp;
        return poly_eval(t.P[n], u) * exp(-u) * cn;
    }
    // zero lag: even/odd Taylor coefficients of phi^(n); coefficients beyond
    // the smoothness budget do not influence admissible extractions
    std::array<double, 7> derivs{};
    for (int k = 0; k <= N1 + N2; ++k)
        derivs[k] = (n + k <= 2 * t.s) ? t.deriv_at_zero(n + k) : 0.0;
    return jets::compose(derivs, d);
}

// derivatives of exp(q(d)) with q = -2 sin^2(pi d / p) / ls^2, via Bell sums
template <class SJ>
SJ periodic_deriv(double ls, double period, int n, const SJ& d) {
    using std::cos;
    using std::exp;
    using std::sin;
    const double w = 2.0 * M_PI / period;
    const double il2 = 1.0 / (ls * ls);
    const SJ th = d * w;
    // q = -(1 - cos(th)) / ls^2
    const SJ q0 = (cos(th) - 1.0) * il2;
    const SJ q1 = sin(th) * (-w * il2);
    const SJ q2 = cos(th) * (-w * w * il2);
    const SJ q3 = sin(th) * (w * w * w * il2);
    const SJ q4 = cos(th) * (w * w * w * w * il2);
    const SJ e = exp(q0);
    switch (n) {
        case 0: return e;
        case 1: return q1 * e;
        case 2: return (q2 + q1 * q1) * e;
        case 3: return (q3 + q1 * q2 * 3.0 + q1 * q1 * q1) * e;
        case 4:
            return (q4 + q1 * q3 * 4.0 + q2 * q2 * 3.0 + q1 * q1 * q2 * 6.0 +
                    q1 * q1 * q1 * q1) * e;
        default: throw SmoothnessError("periodic: derivative order > 4 not implemented");
    }
}

}  // namespace k1d

// ---------------------------------------------------------------------------
// Kernel

class Kernel;
using KernelPtr = std::shared_ptr<const Kernel>;

// derivative applied to the kernel arguments before evaluation (the boundary
// operators of a constraint act through this)
struct AppliedDeriv {
    int ord1 = 0, axis1 = 0;
    int ord2 = 0, axis2 = 0;
};

class Kernel {
public:
    struct SE {
        double var;
        std::vector<double> ls;
    };
    struct Matern {
        double var;
        std::vector<double> ls;
        double nu;
        k1d::MaternTables tab;  // built from nu and ls[0]; 1-dim derivative path
    };
    struct Periodic {
        double var;
        double ls;
        double period;
    };
    struct Product {
        std::vector<KernelPtr> factors;
        std::vector<std::vector<int>> dims;  // global dims per factor
        int total_dim;
    };
    struct Sum {
        std::vector<KernelPtr> terms;
    };

    static Kernel se(double precision, std::vector<double> lengthscales) {
        check_positive(precision, "precision");
        for (double l : lengthscales) check_positive(l, "lengthscale");
        if (lengthscales.empty()) throw ConfigError("se: need at least one lengthscale");
        return Kernel(SE{1.0 / precision, std::move(lengthscales)});
    }
    static Kernel matern(double precision, std::vector<double> lengthscales, double nu) {
        check_positive(precision, "precision");
        for (double l : lengthscales) check_positive(l, "lengthscale");
        if (lengthscales.empty()) throw ConfigError("matern: need at least one lengthscale");
        k1d::MaternTables tab(nu, lengthscales[0]);
        return Kernel(Matern{1.0 / precision, std::move(lengthscales), nu, tab});
    }
    static Kernel periodic(double precision, double lengthscale, double period) {
        check_positive(precision, "precision");
        check_positive(lengthscale, "lengthscale");
        check_positive(period, "period");
        return Kernel(Periodic{1.0 / precision, lengthscale, period});
    }
    static Kernel product(std::vector<std::pair<Kernel, std::vector<int>>> factors) {
        Product p;
        int total = 0;
        std::vector<bool> seen;
        for (auto& [k, dims] : factors) {
            if (static_cast<int>(dims.size()) != k.dim())
                throw ConfigError("product: factor dimension does not match its dim list");
            for (int dgl : dims) {
                if (dgl < 0) throw ConfigError("product: bad dimension index");
                if (dgl >= static_cast<int>(seen.size())) seen.resize(dgl + 1, false);
                if (seen[dgl]) throw ConfigError("product: factor dimensions overlap");
                seen[dgl] = true;
                ++total;
            }
            p.factors.push_back(std::make_shared<Kernel>(std::move(k)));
            p.dims.push_back(dims);
        }
        for (bool s : seen)
            if (!s) throw ConfigError("product: factor dimensions must cover 0..d-1");
        p.total_dim = total;
        return Kernel(std::move(p));
    }
    static Kernel sum(std::vector<Kernel> terms) {
        if (terms.empty()) throw ConfigError("sum: need at least one term");
        Sum s;
        const int d = terms.front().dim();
        for (auto& t : terms) {
            if (t.dim() != d) throw ConfigError("sum: term dimensions differ");
            s.terms.push_back(std::make_shared<Kernel>(std::move(t)));
        }
        return Kernel(std::move(s));
    }

    int dim() const {
        return std::visit(
            [](const auto& k) -> int {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, SE>) return static_cast<int>(k.ls.size());
                else if constexpr (std::is_same_v<T, Matern>) return static_cast<int>(k.ls.size());
                else if constexpr (std::is_same_v<T, Periodic>) return 1;
                else if constexpr (std::is_same_v<T, Product>) return k.total_dim;
                else return k.terms.front()->dim();
            },
            v_);
    }

    // sample-path differentiability order along a dimension
    int diff_order(int d) const {
        return std::visit(
            [&](const auto& k) -> int {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, Matern>) return k.tab.s;
                else if constexpr (std::is_same_v<T, Product>) {
                    for (std::size_t f = 0; f < k.factors.size(); ++f)
                        for (std::size_t j = 0; j < k.dims[f].size(); ++j)
                            if (k.dims[f][j] == d)
                                return k.factors[f]->diff_order(static_cast<int>(j));
                    throw std::logic_error("product: dimension not found");
                } else if constexpr (std::is_same_v<T, Sum>) {
                    int m = kUnboundedDiff;
                    for (const auto& t : k.terms) m = std::min(m, t->diff_order(d));
                    return m;
                } else {
                    (void)k;
                    return kUnboundedDiff;
                }
            },
            v_);
    }

    // stationary variance k(x, x)
    double variance() const {
        return std::visit(
            [](const auto& k) -> double {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, Product>) {
                    double v = 1.0;
                    for (const auto& f : k.factors) v *= f->variance();
                    return v;
                } else if constexpr (std::is_same_v<T, Sum>) {
                    double v = 0.0;
                    for (const auto& t : k.terms) v += t->variance();
                    return v;
                } else return k.var;
            },
            v_);
    }

    double min_lengthscale() const {
        return std::visit(
            [](const auto& k) -> double {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, SE> || std::is_same_v<T, Matern>) {
                    double m = k.ls.front();
                    for (double l : k.ls) m = std::min(m, l);
                    return m;
                } else if constexpr (std::is_same_v<T, Periodic>) return k.ls;
                else if constexpr (std::is_same_v<T, Product>) {
                    double m = std::numeric_limits<double>::infinity();
                    for (const auto& f : k.factors) m = std::min(m, f->min_lengthscale());
                    return m;
                } else {
                    double m = std::numeric_limits<double>::infinity();
                    for (const auto& t : k.terms) m = std::min(m, t->min_lengthscale());
                    return m;
                }
            },
            v_);
    }

    double eval(const Point& x, const Point& xp) const {
        check_dims(x, xp);
        const std::vector<int> zero(dim(), 0);
        return deriv(zero, zero, x, xp);
    }

    // analytic mixed partial: per-dimension orders di on the first argument
    // and dj on the second
    double deriv(const std::vector<int>& di, const std::vector<int>& dj, const Point& x,
                 const Point& xp) const {
        check_dims(x, xp);
        if (static_cast<int>(di.size()) != dim() || static_cast<int>(dj.size()) != dim())
            throw DimensionMismatchError("kernel deriv: multi-index size mismatch");
        return deriv_impl(di, dj, x.data(), xp.data());
    }

    // jet evaluation with optional first/second-order applied derivatives;
    // X and Y may carry arbitrary jet dependence in both slots
    template <int N1, int N2>
    Jet<N1, N2> jet(const SmallVec<Jet<N1, N2>>& X, const SmallVec<Jet<N1, N2>>& Y,
                    const AppliedDeriv& ad = {}) const {
        if (X.size() != dim() || Y.size() != dim())
            throw DimensionMismatchError("kernel jet: point dimension mismatch");
        return jet_impl(X, Y, ad, 0);
    }

private:
    std::variant<SE, Matern, Periodic, Product, Sum> v_;

    template <class T>
    explicit Kernel(T t) : v_(std::move(t)) {}

    static void check_positive(double v, const char* what) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ConfigError(std::string(what) + " must be strictly positive");
    }
    void check_dims(const Point& x, const Point& xp) const {
        if (static_cast<int>(x.size()) != dim() || static_cast<int>(xp.size()) != dim())
            throw DimensionMismatchError("kernel: point dimension != kernel dimension");
    }

    double deriv_impl(const std::vector<int>& di, const std::vector<int>& dj, const double* x,
                      const double* xp) const {
        return std::visit(
            [&](const auto& k) -> double {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, SE>) {
                    double r = k.var;
                    for (std::size_t m = 0; m < k.ls.size(); ++m) {
                        const double sgn = (dj[m] % 2 == 1) ? -1.0 : 1.0;
                        r *= sgn * k1d::se_deriv(k.ls[m], di[m] + dj[m], x[m] - xp[m]);
                    }
                    return r;
                } else if constexpr (std::is_same_v<T, Matern>) {
                    int tot = 0;
                    for (std::size_t m = 0; m < k.ls.size(); ++m) tot += di[m] + dj[m];
                    if (tot == 0) {
                        double r2 = 0.0;
                        for (std::size_t m = 0; m < k.ls.size(); ++m) {
                            const double d = (x[m] - xp[m]) / k.ls[m];
                            r2 += d * d;
                        }
                        // radial profile shares the 1-dim tables at unit scale
                        k1d::MaternTables unit(k.nu, 1.0);
                        return k.var * k1d::matern_deriv(unit, 0, std::sqrt(r2));
                    }
                    if (k.ls.size() > 1)
                        throw SmoothnessError(
                            "matern: derivatives of the multi-dimensional isotropic form are "
                            "unsupported; use 1-dim product factors");
                    if (di[0] > k.tab.s || dj[0] > k.tab.s)
                        throw SmoothnessError(
                            "matern: requested order exceeds differentiability (ceil(nu)-1) per "
                            "argument");
                    const double sgn = (dj[0] % 2 == 1) ? -1.0 : 1.0;
                    return k.var * sgn * k1d::matern_deriv(k.tab, di[0] + dj[0], x[0] - xp[0]);
                } else if constexpr (std::is_same_v<T, Periodic>) {
                    const double sgn = (dj[0] % 2 == 1) ? -1.0 : 1.0;
                    return k.var * sgn *
                           k1d::periodic_deriv(k.ls, k.period, di[0] + dj[0], x[0] - xp[0]);
                } else if constexpr (std::is_same_v<T, Product>) {
                    double r = 1.0;
                    for (std::size_t f = 0; f < k.factors.size(); ++f) {
                        const auto& dims = k.dims[f];
                        std::vector<int> si(dims.size()), sj(dims.size());
                        std::vector<double> sx(dims.size()), sxp(dims.size());
                        for (std::size_t j = 0; j < dims.size(); ++j) {
                            si[j] = di[dims[j]];
                            sj[j] = dj[dims[j]];
                            sx[j] = x[dims[j]];
                            sxp[j] = xp[dims[j]];
                        }
                        r *= k.factors[f]->deriv_impl(si, sj, sx.data(), sxp.data());
                    }
                    return r;
                } else {
                    double r = 0.0;
                    for (const auto& t : k.terms) r += t->deriv_impl(di, dj, x, xp);
                    return r;
                }
            },
            v_);
    }

    template <int N1, int N2>
    Jet<N1, N2> jet_impl(const SmallVec<Jet<N1, N2>>& X, const SmallVec<Jet<N1, N2>>& Y,
                         const AppliedDeriv& ad, int dim_offset) const {
        using J = Jet<N1, N2>;
        return std::visit(
            [&](const auto& k) -> J {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, SE>) {
                    J r(k.var);
                    for (int m = 0; m < static_cast<int>(k.ls.size()); ++m) {
                        const int g = m + dim_offset;
                        int n = 0;
                        double sgn = 1.0;
                        if (ad.ord1 > 0 && ad.axis1 == g) n += ad.ord1;
                        if (ad.ord2 > 0 && ad.axis2 == g) {
                            n += ad.ord2;
                            if (ad.ord2 % 2 == 1) sgn = -sgn;
                        }
                        const J d = X[g] - Y[g];
                        r *= k1d::se_deriv(k.ls[m], n, d) * sgn;
                    }
                    return r;
                } else if constexpr (std::is_same_v<T, Matern>) {
                    if (k.ls.size() == 1) {
                        const int g = dim_offset;
                        int n = 0;
                        double sgn = 1.0;
                        int per_arg1 = 0, per_arg2 = 0;
                        if (ad.ord1 > 0 && ad.axis1 == g) { n += ad.ord1; per_arg1 = ad.ord1; }
                        if (ad.ord2 > 0 && ad.axis2 == g) {
                            n += ad.ord2;
                            per_arg2 = ad.ord2;
                            if (ad.ord2 % 2 == 1) sgn = -sgn;
                        }
                        if (per_arg1 + N1 > k.tab.s || per_arg2 + N2 > k.tab.s)
                            throw SmoothnessError(
                                "matern: requested order exceeds differentiability per argument");
                        const J d = X[g] - Y[g];
                        return k1d::matern_deriv(k.tab, n, d) * (k.var * sgn);
                    }
                    if (ad.ord1 > 0 || ad.ord2 > 0 || N1 > 0 || N2 > 0)
                        throw SmoothnessError(
                            "matern: derivatives of the multi-dimensional isotropic form are "
                            "unsupported; use 1-dim product factors");
                    J r2(0.0);
                    for (int m = 0; m < static_cast<int>(k.ls.size()); ++m) {
                        const int g = m + dim_offset;
                        const J d = (X[g] - Y[g]) * (1.0 / k.ls[m]);
                        r2 += d * d;
                    }
                    k1d::MaternTables unit(k.nu, 1.0);
                    using cgrf::sqrt;
                    return k1d::matern_deriv(unit, 0, sqrt(r2)) * k.var;
                } else if constexpr (std::is_same_v<T, Periodic>) {
                    const int g = dim_offset;
                    int n = 0;
                    double sgn = 1.0;
                    if (ad.ord1 > 0 && ad.axis1 == g) n += ad.ord1;
                    if (ad.ord2 > 0 && ad.axis2 == g) {
                        n += ad.ord2;
                        if (ad.ord2 % 2 == 1) sgn = -sgn;
                    }
                    const J d = X[g] - Y[g];
                    return k1d::periodic_deriv(k.ls, k.period, n, d) * (k.var * sgn);
                } else if constexpr (std::is_same_v<T, Product>) {
                    J r(1.0);
                    // applied axes are global; factors see them through offsets
                    for (std::size_t f = 0; f < k.factors.size(); ++f) {
                        const auto& dims = k.dims[f];
                        // factors own contiguous global dims only when built that
                        // way; remap via a gather
                        SmallVec<J> sx(static_cast<int>(dims.size()));
                        SmallVec<J> sy(static_cast<int>(dims.size()));
                        AppliedDeriv sad;
                        for (std::size_t j = 0; j < dims.size(); ++j) {
                            sx[static_cast<int>(j)] = X[dims[j]];
                            sy[static_cast<int>(j)] = Y[dims[j]];
                            if (ad.ord1 > 0 && ad.axis1 == dims[j]) {
                                sad.ord1 = ad.ord1;
                                sad.axis1 = static_cast<int>(j);
                            }
                            if (ad.ord2 > 0 && ad.axis2 == dims[j]) {
                                sad.ord2 = ad.ord2;
                                sad.axis2 = static_cast<int>(j);
                            }
                        }
                        r *= k.factors[f]->jet_impl(sx, sy, sad, 0);
                    }
                    return r;
                } else {
                    J r(0.0);
                    for (const auto& t : k.terms) r += t->jet_impl(X, Y, ad, dim_offset);
                    return r;
                }
            },
            v_);
    }
};

// Evaluator for (L_left k L_right*)(x, x'); either operator may be absent.
// Expands into the four-term derivative sum.
class OperatorAppliedKernel {
public:
    OperatorAppliedKernel(KernelPtr k, std::optional<BoundaryOperator> left,
                          std::optional<BoundaryOperator> right)
        : k_(std::move(k)), left_(left), right_(right) {}

    double eval(const Point& x, const Point& xp) const {
        const BoundaryOperator l = left_.value_or(BoundaryOperator::identity());
        const BoundaryOperator r = right_.value_or(BoundaryOperator::identity());
        const int d = k_->dim();
        std::vector<int> zi(d, 0);
        double out = 0.0;
        if (l.b != 0.0 && r.b != 0.0) out += l.b * r.b * k_->deriv(zi, zi, x, xp);
        if (l.a != 0.0) {
            std::vector<int> di(d, 0);
            di[l.axis] = 1;
            if (r.b != 0.0) out += l.a * r.b * k_->deriv(di, zi, x, xp);
            if (r.a != 0.0) {
                std::vector<int> dj(d, 0);
                dj[r.axis] = 1;
                out += l.a * r.a * k_->deriv(di, dj, x, xp);
            }
        }
        if (r.a != 0.0 && l.b != 0.0) {
            std::vector<int> dj(d, 0);
            dj[r.axis] = 1;
            out += l.b * r.a * k_->deriv(zi, dj, x, xp);
        }
        return out;
    }

private:
    KernelPtr k_;
    std::optional<BoundaryOperator> left_, right_;
};

}  // namespace cgrf
