#pragma once

// Closed convex sets with closed-form metric projections.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "parfix/errors.hpp"
#include "parfix/hilbert.hpp"

namespace parfix {

/// {x : <normal, x> <= offset}
struct Halfspace {
    Vector normal;
    double offset = 0.0;
    friend bool operator==(const Halfspace&, const Halfspace&) = default;
};

/// {x : <normal, x> == offset}
struct Hyperplane {
    Vector normal;
    double offset = 0.0;
    friend bool operator==(const Hyperplane&, const Hyperplane&) = default;
};

struct Ball {
    Vector center;
    double radius = 0.0;
    friend bool operator==(const Ball&, const Ball&) = default;
};

struct Box {
    Vector lo;
    Vector hi;
    friend bool operator==(const Box&, const Box&) = default;
};

class ConvexSet;

/// Not directly projectable; see oracle::project_intersection.
struct Intersection {
    std::vector<ConvexSet> members;
    friend bool operator==(const Intersection&, const Intersection&);
};

class ConvexSet {
public:
    using variant_type = std::variant<Halfspace, Hyperplane, Ball, Box, Intersection>;

    // Construction goes through the named factories below, which enforce the invariants.
    static ConvexSet halfspace(Vector normal, double offset) {
        require_nonzero(normal, "halfspace");
        require_finite_scalar(offset, "halfspace offset");
        return ConvexSet(Halfspace{std::move(normal), offset});
    }

    static ConvexSet hyperplane(Vector normal, double offset) {
        require_nonzero(normal, "hyperplane");
        require_finite_scalar(offset, "hyperplane offset");
        return ConvexSet(Hyperplane{std::move(normal), offset});
    }

    static ConvexSet ball(Vector center, double radius) {
        if (center.empty()) throw config_error("", "ball: center must be nonempty");
        if (!(radius >= 0.0) || !std::isfinite(radius)) {
            throw config_error("", "ball: radius must be finite and >= 0");
        }
        return ConvexSet(Ball{std::move(center), radius});
    }

    static ConvexSet box(Vector lo, Vector hi) {
        if (lo.empty()) throw config_error("", "box: bounds must be nonempty");
        if (lo.dim() != hi.dim()) throw config_error("", "box: lo and hi differ in dimension");
        for (std::size_t i = 0; i < lo.dim(); ++i) {
            if (lo[i] > hi[i]) {
                throw config_error("", "box: lo[" + std::to_string(i) + "] > hi[" +
                                           std::to_string(i) + "]");
            }
        }
        return ConvexSet(Box{std::move(lo), std::move(hi)});
    }

    static ConvexSet intersection(std::vector<ConvexSet> members);

    const variant_type& variant() const noexcept { return v_; }

    template <class T>
    const T* get_if() const noexcept { return std::get_if<T>(&v_); }

    std::size_t dim() const;

    /// Short lowercase name of the variant.
    const char* kind() const noexcept {
        static constexpr const char* names[] = {"halfspace", "hyperplane", "ball", "box",
                                                "intersection"};
        return names[v_.index()];
    }

    friend bool operator==(const ConvexSet&, const ConvexSet&) = default;

private:
    template <class T>
    explicit ConvexSet(T alt) : v_(std::move(alt)) {}

    static void require_nonzero(const Vector& a, const char* what) {
        if (a.empty()) throw config_error("", std::string(what) + ": normal must be nonempty");
        if (norm_squared(a) == 0.0) {
            throw config_error("", std::string(what) + ": normal must be nonzero");
        }
    }

    static void require_finite_scalar(double v, const char* what) {
        if (!std::isfinite(v)) throw config_error("", std::string(what) + " must be finite");
    }

    variant_type v_;
};

inline bool operator==(const Intersection& a, const Intersection& b) {
    return a.members == b.members;
}

inline std::size_t ConvexSet::dim() const {
    struct {
        std::size_t operator()(const Halfspace& s) const { return s.normal.dim(); }
        std::size_t operator()(const Hyperplane& s) const { return s.normal.dim(); }
        std::size_t operator()(const Ball& s) const { return s.center.dim(); }
        std::size_t operator()(const Box& s) const { return s.lo.dim(); }
        std::size_t operator()(const Intersection& s) const { return s.members.front().dim(); }
    } visitor;
    return std::visit(visitor, v_);
}

inline ConvexSet ConvexSet::intersection(std::vector<ConvexSet> members) {
    if (members.empty()) throw config_error("", "intersection: member list must be nonempty");
    const std::size_t d = members.front().dim();
    for (std::size_t i = 1; i < members.size(); ++i) {
        if (members[i].dim() != d) {
            throw config_error("members[" + std::to_string(i) + "]",
                               "intersection members must share one dimension");
        }
    }
    return ConvexSet(Intersection{std::move(members)});
}

/// Metric projection onto a directly projectable set. Members are returned
/// unchanged. Intersections must go through oracle::project_intersection.
inline Vector project(const ConvexSet& set, const Vector& x) {
    detail::require_same_dim(set.dim(), x.dim(), "project");
    struct {
        const Vector& x;
        Vector operator()(const Halfspace& h) const {
            const double excess = inner(h.normal, x) - h.offset;
            if (excess <= 0.0) return x;
            return axpby(1.0, x, -excess / norm_squared(h.normal), h.normal);
        }
        Vector operator()(const Hyperplane& h) const {
            const double excess = inner(h.normal, x) - h.offset;
            if (excess == 0.0) return x;
            return axpby(1.0, x, -excess / norm_squared(h.normal), h.normal);
        }
        Vector operator()(const Ball& b) const {
            const double d = distance(x, b.center);
            if (d <= b.radius) return x;
            return axpby(1.0, b.center, b.radius / d, x - b.center);
        }
        Vector operator()(const Box& b) const {
            std::vector<double> out(x.dim());
            for (std::size_t i = 0; i < x.dim(); ++i) out[i] = std::clamp(x[i], b.lo[i], b.hi[i]);
            return Vector(std::move(out));
        }
        Vector operator()(const Intersection&) const {
            throw domain_error(
                "project: intersection is not directly projectable; use "
                "oracle::project_intersection");
        }
    } visitor{x};
    return std::visit(visitor, set.variant());
}

/// Distance from x to a directly projectable set.
inline double distance_to(const ConvexSet& set, const Vector& x) {
    return distance(project(set, x), x);
}

/// Membership within tol. Intersections test every member.
inline bool contains(const ConvexSet& set, const Vector& x, double tol) {
    if (const auto* in = set.get_if<Intersection>()) {
        return std::all_of(in->members.begin(), in->members.end(),
                           [&](const ConvexSet& m) { return contains(m, x, tol); });
    }
    return distance_to(set, x) <= tol;
}

/// Flattens nested intersections into a list of directly projectable sets.
inline void flatten_into(const ConvexSet& set, std::vector<ConvexSet>& out) {
    if (const auto* in = set.get_if<Intersection>()) {
        for (const auto& m : in->members) flatten_into(m, out);
    } else {
        out.push_back(set);
    }
}

} // namespace parfix
