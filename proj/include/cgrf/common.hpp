#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace cgrf {

// Domain points are small dense coordinate vectors (d <= 4 in practice).
using Point = std::vector<double>;

// Fixed-capacity coordinate vector usable with jet-valued scalars.
template <class S, int Cap = 4>
struct SmallVec {
    S v[Cap]{};
    int n = 0;

    SmallVec() = default;
    explicit SmallVec(int size) : n(size) {}

    int size() const { return n; }
    S& operator[](int i) { return v[i]; }
    const S& operator[](int i) const { return v[i]; }
    void push_back(const S& s) { v[n++] = s; }
};

struct DimensionMismatchError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct SmoothnessError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct OutsideDomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DegenerateGeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotPositiveDefiniteError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

inline void require_finite(const Point& x, const char* what = "point") {
    for (double c : x)
        if (!std::isfinite(c)) throw std::invalid_argument(std::string(what) + ": non-finite coordinate");
}

constexpr double kMembershipTol = 1e-12;

}  // namespace cgrf
