#pragma once

// Spatial and spatio-temporal domains, their constrainable boundary
// segments, and continuous projection maps onto those segments. Everything
// here is immutable after construction and safe for concurrent reads.
//
// Segment ids are canonical per shape:
//   Interval:     0 = {a}, 1 = {b}
//   Box (d-dim):  2*axis + 0 (lo side), 2*axis + 1 (hi side)
//   UnitDisk:     0 = full circle, 1 = left half circle, 2 = right half
//   UnitTriangle: 0 = side x1=0, 1 = hypotenuse x1+x2=1, 2 = side x2=0
//   DogBone:      0 = bottom edge (x2=-10), 1 = top edge (x2=+10)
//   SpaceTime:    0 = initial slice t=t0, 1 = final slice t=t1,
//                 2+k = time extrusion of spatial segment k
// Extruded segments are closed in time; the initial-time corner belongs to
// both the initial slice and the extruded side.

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "cgrf/common.hpp"
#include "cgrf/expr.hpp"
#include "cgrf/rng.hpp"

namespace cgrf {

enum class Shape { Interval, Box, UnitDisk, UnitTriangle, DogBone, SpaceTime };

struct Domain;
using DomainPtr = std::shared_ptr<const Domain>;

struct Domain {
    Shape shape = Shape::Interval;
    double a = 0.0, b = 1.0;          // Interval
    std::vector<double> lo, hi;       // Box
    double grip_hw = 4.0;             // DogBone
    double gauge_hw = 2.0;
    double gauge_extent = 5.0;        // gauge section is |x2| <= gauge_extent
    double grip_start = 7.0;          // grips are |x2| >= grip_start
    double half_height = 10.0;
    double t0 = 0.0, t1 = 1.0;        // SpaceTime
    DomainPtr spatial;

    static Domain interval(double a, double b) {
        if (!(a < b)) throw ConfigError("interval: require a < b");
        Domain d;
        d.shape = Shape::Interval;
        d.a = a;
        d.b = b;
        return d;
    }
    static Domain box(std::vector<double> lo, std::vector<double> hi) {
        if (lo.size() != hi.size() || lo.empty()) throw ConfigError("box: lo/hi size mismatch");
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (!(lo[i] < hi[i])) throw ConfigError("box: require lo < hi componentwise");
        Domain d;
        d.shape = Shape::Box;
        d.lo = std::move(lo);
        d.hi = std::move(hi);
        return d;
    }
    static Domain unit_disk() {
        Domain d;
        d.shape = Shape::UnitDisk;
        return d;
    }
    static Domain unit_triangle() {
        Domain d;
        d.shape = Shape::UnitTriangle;
        return d;
    }
    static Domain dog_bone(double grip_hw = 4.0, double gauge_hw = 2.0, double gauge_extent = 5.0,
                           double grip_start = 7.0) {
        if (!(grip_hw > gauge_hw && gauge_hw > 0.0))
            throw ConfigError("dog_bone: require grip half-width > gauge half-width > 0");
        if (!(0.0 < gauge_extent && gauge_extent < grip_start && grip_start < 10.0))
            throw ConfigError("dog_bone: require 0 < gauge_extent < grip_start < 10");
        Domain d;
        d.shape = Shape::DogBone;
        d.grip_hw = grip_hw;
        d.gauge_hw = gauge_hw;
        d.gauge_extent = gauge_extent;
        d.grip_start = grip_start;
        return d;
    }
    static Domain space_time(double t0, double t1, Domain spatial_dom) {
        if (!(t0 < t1)) throw ConfigError("space_time: require t0 < t1");
        if (spatial_dom.shape == Shape::SpaceTime)
            throw ConfigError("space_time: spatial factor must be purely spatial");
        Domain d;
        d.shape = Shape::SpaceTime;
        d.t0 = t0;
        d.t1 = t1;
        d.spatial = std::make_shared<Domain>(std::move(spatial_dom));
        return d;
    }

    int dim() const {
        switch (shape) {
            case Shape::Interval: return 1;
            case Shape::Box: return static_cast<int>(lo.size());
            case Shape::UnitDisk:
            case Shape::UnitTriangle:
            case Shape::DogBone: return 2;
            case Shape::SpaceTime: return 1 + spatial->dim();
        }
        return 0;
    }

    // coordinate names used by the expression grammar (t, x1, x2, ...)
    std::vector<std::string> axes() const {
        std::vector<std::string> names;
        if (shape == Shape::SpaceTime) {
            names.push_back("t");
            for (const auto& n : spatial->axes()) names.push_back(n);
        } else {
            for (int i = 0; i < dim(); ++i) names.push_back("x" + std::to_string(i + 1));
        }
        return names;
    }

    double dog_bone_half_width(double x2) const {
        const double ax = std::abs(x2);
        if (ax <= gauge_extent) return gauge_hw;
        if (ax >= grip_start) return grip_hw;
        const double s = (ax - gauge_extent) / (grip_start - gauge_extent);
        return gauge_hw + s * (grip_hw - gauge_hw);
    }

    bool is_convex() const {
        if (shape == Shape::DogBone) return false;
        if (shape == Shape::SpaceTime) return spatial->is_convex();
        return true;
    }

    std::pair<Point, Point> bounding_box() const {
        switch (shape) {
            case Shape::Interval: return {{a}, {b}};
            case Shape::Box: return {Point(lo.begin(), lo.end()), Point(hi.begin(), hi.end())};
            case Shape::UnitDisk: return {{-1.0, -1.0}, {1.0, 1.0}};
            case Shape::UnitTriangle: return {{0.0, 0.0}, {1.0, 1.0}};
            case Shape::DogBone: return {{-grip_hw, -half_height}, {grip_hw, half_height}};
            case Shape::SpaceTime: {
                auto [slo, shi] = spatial->bounding_box();
                Point l{t0}, h{t1};
                l.insert(l.end(), slo.begin(), slo.end());
                h.insert(h.end(), shi.begin(), shi.end());
                return {l, h};
            }
        }
        return {{}, {}};
    }

    int n_segments() const {
        switch (shape) {
            case Shape::Interval: return 2;
            case Shape::Box: return 2 * dim();
            case Shape::UnitDisk: return 3;
            case Shape::UnitTriangle: return 3;
            case Shape::DogBone: return 2;
            case Shape::SpaceTime: return 2 + spatial->n_segments();
        }
        return 0;
    }
};

inline bool contains(const Domain& d, const Point& x, double tol = kMembershipTol) {
    if (static_cast<int>(x.size()) != d.dim())
        throw DimensionMismatchError("contains: point dimension != domain dimension");
    require_finite(x);
    switch (d.shape) {
        case Shape::Interval: return x[0] >= d.a - tol && x[0] <= d.b + tol;
        case Shape::Box:
            for (std::size_t i = 0; i < d.lo.size(); ++i)
                if (x[i] < d.lo[i] - tol || x[i] > d.hi[i] + tol) return false;
            return true;
        case Shape::UnitDisk: return x[0] * x[0] + x[1] * x[1] <= 1.0 + tol;
        case Shape::UnitTriangle:
            return x[0] >= -tol && x[1] >= -tol && x[0] + x[1] <= 1.0 + tol;
        case Shape::DogBone:
            return std::abs(x[1]) <= d.half_height + tol &&
                   std::abs(x[0]) <= d.dog_bone_half_width(x[1]) + tol;
        case Shape::SpaceTime: {
            if (x[0] < d.t0 - tol || x[0] > d.t1 + tol) return false;
            Point xs(x.begin() + 1, x.end());
            return contains(*d.spatial, xs, tol);
        }
    }
    return false;
}

// ---------------------------------------------------------------------------
// Boundary segments

struct BoundarySegment {
    DomainPtr domain;
    int id = 0;

    int param_dim() const {
        switch (domain->shape) {
            case Shape::Interval: return 0;
            case Shape::Box: return domain->dim() - 1;
            case Shape::UnitDisk:
            case Shape::UnitTriangle:
            case Shape::DogBone: return 1;
            case Shape::SpaceTime:
                if (id <= 1) return domain->spatial->dim();
                return 1 + BoundarySegment{domain->spatial, id - 2}.param_dim();
        }
        return 0;
    }

    // map u in [0,1]^param_dim onto the segment
    Point param(const std::vector<double>& u) const {
        const Domain& d = *domain;
        switch (d.shape) {
            case Shape::Interval: return {id == 0 ? d.a : d.b};
            case Shape::Box: {
                const int axis = id / 2;
                Point x(d.lo.size());
                std::size_t k = 0;
                for (std::size_t i = 0; i < d.lo.size(); ++i) {
                    if (static_cast<int>(i) == axis) x[i] = (id % 2 == 0) ? d.lo[i] : d.hi[i];
                    else x[i] = d.lo[i] + u[k++] * (d.hi[i] - d.lo[i]);
                }
                return x;
            }
            case Shape::UnitDisk: {
                double th = 0.0;
                if (id == 0) th = 2.0 * M_PI * u[0];
                else if (id == 1) th = 0.5 * M_PI + M_PI * u[0];   // x1 <= 0 arc
                else th = 0.5 * M_PI - M_PI * u[0];                // x1 >= 0 arc
                return {std::cos(th), std::sin(th)};
            }
            case Shape::UnitTriangle:
                if (id == 0) return {0.0, u[0]};
                if (id == 1) return {1.0 - u[0], u[0]};
                return {u[0], 0.0};
            case Shape::DogBone: {
                const double x1 = -d.grip_hw + 2.0 * d.grip_hw * u[0];
                return {x1, id == 0 ? -d.half_height : d.half_height};
            }
            case Shape::SpaceTime: {
                if (id <= 1) {
                    // whole spatial domain at a fixed time
                    Point xs = spatial_slice_param(u);
                    Point x{id == 0 ? d.t0 : d.t1};
                    x.insert(x.end(), xs.begin(), xs.end());
                    return x;
                }
                BoundarySegment sub{d.spatial, id - 2};
                std::vector<double> urest(u.begin() + 1, u.end());
                Point xs = sub.param(urest);
                Point x{d.t0 + u[0] * (d.t1 - d.t0)};
                x.insert(x.end(), xs.begin(), xs.end());
                return x;
            }
        }
        throw std::logic_error("segment param: bad shape");
    }

    bool contains_point(const Point& x, double tol = kMembershipTol) const {
        const Domain& d = *domain;
        if (static_cast<int>(x.size()) != d.dim())
            throw DimensionMismatchError("segment membership: dimension mismatch");
        switch (d.shape) {
            case Shape::Interval: return std::abs(x[0] - (id == 0 ? d.a : d.b)) <= tol;
            case Shape::Box: {
                const int axis = id / 2;
                const double v = (id % 2 == 0) ? d.lo[axis] : d.hi[axis];
                if (std::abs(x[axis] - v) > tol) return false;
                return contains(d, x, tol);
            }
            case Shape::UnitDisk: {
                const double r2 = x[0] * x[0] + x[1] * x[1];
                if (std::abs(r2 - 1.0) > tol) return false;
                if (id == 1) return x[0] <= tol;
                if (id == 2) return x[0] >= -tol;
                return true;
            }
            case Shape::UnitTriangle:
                if (!contains(d, x, tol)) return false;
                if (id == 0) return std::abs(x[0]) <= tol;
                if (id == 1) return std::abs(x[0] + x[1] - 1.0) <= tol;
                return std::abs(x[1]) <= tol;
            case Shape::DogBone: {
                const double v = (id == 0) ? -d.half_height : d.half_height;
                return std::abs(x[1] - v) <= tol && std::abs(x[0]) <= d.grip_hw + tol;
            }
            case Shape::SpaceTime: {
                Point xs(x.begin() + 1, x.end());
                if (id == 0)
                    return std::abs(x[0] - d.t0) <= tol && contains(*d.spatial, xs, tol);
                if (id == 1)
                    return std::abs(x[0] - d.t1) <= tol && contains(*d.spatial, xs, tol);
                if (x[0] < d.t0 - tol || x[0] > d.t1 + tol) return false;
                return BoundarySegment{d.spatial, id - 2}.contains_point(xs, tol);
            }
        }
        return false;
    }

private:
    Point spatial_slice_param(const std::vector<double>& u) const {
        const Domain& s = *domain->spatial;
        switch (s.shape) {
            case Shape::Interval: return {s.a + u[0] * (s.b - s.a)};
            case Shape::Box: {
                Point x(s.lo.size());
                for (std::size_t i = 0; i < s.lo.size(); ++i)
                    x[i] = s.lo[i] + u[i] * (s.hi[i] - s.lo[i]);
                return x;
            }
            case Shape::UnitDisk: {
                const double r = std::sqrt(u[0]);
                const double th = 2.0 * M_PI * u[1];
                return {r * std::cos(th), r * std::sin(th)};
            }
            default:
                throw ConfigError("initial-slice parametrization unsupported for this spatial shape");
        }
    }
};

inline BoundarySegment segment(const DomainPtr& d, int id) {
    if (id < 0 || id >= d->n_segments()) throw ConfigError("unknown segment id");
    return BoundarySegment{d, id};
}

// ---------------------------------------------------------------------------
// Projections

struct Projection {
    enum class Kind { Axis, DiskLeft, DiskRight, TriangleHyp };
    Kind kind = Kind::Axis;
    int axis = 0;       // Axis: coordinate to pin
    double value = 0.0; // Axis: plane position
    BoundarySegment target;

    template <class S>
    SmallVec<S> apply(const SmallVec<S>& x) const {
        SmallVec<S> y = x;
        switch (kind) {
            case Kind::Axis: y[axis] = S(value); break;
            case Kind::DiskLeft: y[0] = -clamped_sqrt(1.0 - x[1] * x[1]); break;
            case Kind::DiskRight: y[0] = clamped_sqrt(1.0 - x[1] * x[1]); break;
            case Kind::TriangleHyp: y[0] = 1.0 - x[1]; break;
        }
        return y;
    }

    Point apply_point(const Point& x) const {
        SmallVec<double> s(static_cast<int>(x.size()));
        for (std::size_t i = 0; i < x.size(); ++i) s[static_cast<int>(i)] = x[i];
        SmallVec<double> y = apply(s);
        Point out(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = y[static_cast<int>(i)];
        return out;
    }
};

// natural projection along a signed coordinate direction for a segment
inline Projection default_projection(const DomainPtr& dom, int segment_id) {
    const Domain& d = *dom;
    Projection p;
    p.target = segment(dom, segment_id);
    switch (d.shape) {
        case Shape::Interval:
            p.axis = 0;
            p.value = segment_id == 0 ? d.a : d.b;
            return p;
        case Shape::Box:
            p.axis = segment_id / 2;
            p.value = (segment_id % 2 == 0) ? d.lo[p.axis] : d.hi[p.axis];
            return p;
        case Shape::UnitDisk:
            if (segment_id == 1) p.kind = Projection::Kind::DiskLeft;
            else if (segment_id == 2) p.kind = Projection::Kind::DiskRight;
            else
                throw ConfigError(
                    "full-circle segment has no single continuous projection; split it into the "
                    "two half-circle segments");
            return p;
        case Shape::UnitTriangle:
            if (segment_id == 0) { p.axis = 0; p.value = 0.0; }
            else if (segment_id == 2) { p.axis = 1; p.value = 0.0; }
            else p.kind = Projection::Kind::TriangleHyp;
            return p;
        case Shape::DogBone:
            p.axis = 1;
            p.value = segment_id == 0 ? -d.half_height : d.half_height;
            return p;
        case Shape::SpaceTime: {
            if (segment_id == 0) { p.axis = 0; p.value = d.t0; return p; }
            if (segment_id == 1) { p.axis = 0; p.value = d.t1; return p; }
            Projection sp = default_projection(d.spatial, segment_id - 2);
            if (sp.kind != Projection::Kind::Axis)
                throw ConfigError("extruded projections support axis-aligned spatial segments only");
            p.axis = sp.axis + 1;
            p.value = sp.value;
            return p;
        }
    }
    throw std::logic_error("default_projection: bad shape");
}

inline Point project(const Domain& d, const Projection& p, const Point& x) {
    if (!contains(d, x)) throw OutsideDomainError("project: point outside domain");
    return p.apply_point(x);
}

// ---------------------------------------------------------------------------
// Samplers

// Deterministic uniform-stratified samples on a segment; includes the
// parametrization endpoints whenever n >= 2.
inline std::vector<Point> sample_boundary(const BoundarySegment& seg, int n,
                                          std::uint64_t /*seed*/ = 0) {
    if (n < 1) throw std::invalid_argument("sample_boundary: n >= 1 required");
    const int pd = seg.param_dim();
    std::vector<Point> out;
    out.reserve(n);
    if (pd == 0) {
        for (int i = 0; i < n; ++i) out.push_back(seg.param({}));
        return out;
    }
    if (pd == 1) {
        for (int i = 0; i < n; ++i) {
            const double u = (n == 1) ? 0.5 : static_cast<double>(i) / (n - 1);
            out.push_back(seg.param({u}));
        }
        return out;
    }
    // lattice with >= n nodes, thinned to exactly n keeping first and last
    int m1 = std::max(2, static_cast<int>(std::floor(std::sqrt(static_cast<double>(n)))));
    int m2 = (n + m1 - 1) / m1;
    m2 = std::max(2, m2);
    while (m1 * m2 < n) ++m2;
    const int total = m1 * m2;
    for (int k = 0; k < n; ++k) {
        const long idx = (n == 1) ? 0 : static_cast<long>(k) * (total - 1) / (n - 1);
        const int i = static_cast<int>(idx / m2), j = static_cast<int>(idx % m2);
        std::vector<double> u(pd, 0.0);
        u[0] = static_cast<double>(i) / (m1 - 1);
        u[1] = static_cast<double>(j) / (m2 - 1);
        out.push_back(seg.param(u));
    }
    return out;
}

enum class InteriorScheme { Grid, LowDiscrepancy };

namespace detail {
inline void tensor_grid(const Point& lo, const Point& hi, const std::vector<int>& counts,
                        std::vector<Point>& out) {
    const int d = static_cast<int>(lo.size());
    std::vector<int> idx(d, 0);
    for (;;) {
        Point x(d);
        for (int i = 0; i < d; ++i)
            x[i] = counts[i] == 1 ? 0.5 * (lo[i] + hi[i])
                                  : lo[i] + (hi[i] - lo[i]) * idx[i] / (counts[i] - 1);
        out.push_back(x);
        int i = d - 1;
        for (; i >= 0; --i) {
            if (++idx[i] < counts[i]) break;
            idx[i] = 0;
        }
        if (i < 0) break;
    }
}
}  // namespace detail

// Deterministic interior designs. Grid returns a tensor grid with per-axis
// count round(n^(1/d)) on interval/box domains (exactly n in one dimension),
// and the first n bounding-box grid points that fall inside otherwise.
// LowDiscrepancy rejects Halton points from the bounding box until n are in.
inline std::vector<Point> sample_interior(const DomainPtr& dom, int n, InteriorScheme scheme,
                                          std::uint64_t seed = 0) {
    if (n < 1) throw std::invalid_argument("sample_interior: n >= 1 required");
    const Domain& d = *dom;
    const int dim = d.dim();
    auto [lo, hi] = d.bounding_box();
    std::vector<Point> out;
    if (scheme == InteriorScheme::Grid) {
        const bool rectangular = d.shape == Shape::Interval || d.shape == Shape::Box ||
                                 (d.shape == Shape::SpaceTime &&
                                  (d.spatial->shape == Shape::Interval || d.spatial->shape == Shape::Box));
        int m = std::max(1, static_cast<int>(std::llround(std::pow(static_cast<double>(n), 1.0 / dim))));
        if (rectangular) {
            while (static_cast<long>(std::pow(m + 1, dim)) <= n) ++m;
            std::vector<int> counts(dim, m);
            if (dim == 1) counts[0] = n;
            detail::tensor_grid(lo, hi, counts, out);
            return out;
        }
        for (;;) {
            std::vector<Point> grid;
            std::vector<int> counts(dim, m);
            detail::tensor_grid(lo, hi, counts, grid);
            out.clear();
            for (const auto& x : grid) {
                if (contains(d, x)) out.push_back(x);
                if (static_cast<int>(out.size()) == n) return out;
            }
            ++m;
        }
    }
    const std::uint64_t skip = 1000 * (seed + 1);
    static const unsigned bases[4] = {2, 3, 5, 7};
    for (std::uint64_t k = skip; static_cast<int>(out.size()) < n; ++k) {
        Point x(dim);
        for (int i = 0; i < dim; ++i) x[i] = lo[i] + (hi[i] - lo[i]) * halton(k, bases[i]);
        if (contains(d, x)) out.push_back(x);
    }
    return out;
}

}  // namespace cgrf
