#pragma once

// Operator algebra over R^n. Every Operator carries the strongest property
// class its construction guarantees, so schemes can check their hypotheses
// before iterating:
//
//   metric_projection(D)          FirmlyNonexpansive
//   subgradient_projection(f)     StronglyQuasinonexpansive
//   affine(A, c), ||A|| <= 1      Nonexpansive
//   relax(T, lambda)              StronglyQuasinonexpansive (FirmlyNonexpansive if T is)
//   compose_with_projection(S, C) StronglyQuasinonexpansive if S is, otherwise the class of S
//   custom(...)                   whatever the caller declares
//
// Demiclosedness of I - T at 0 is not machine-checkable. It holds for the
// built-in constructions and is a declared assumption for custom operators.

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "parfix/errors.hpp"
#include "parfix/functionals.hpp"
#include "parfix/hilbert.hpp"
#include "parfix/sets.hpp"

namespace parfix {

/// Tolerance under which x counts as a fixed point in assertions.
inline constexpr double fixed_point_tolerance = 1e-12;

/// Slack for "x lies in the domain of definition" checks.
inline constexpr double domain_membership_tolerance = 1e-9;

enum class PropertyClass {
    Quasinonexpansive,
    Nonexpansive,
    StronglyQuasinonexpansive,
    FirmlyNonexpansive,
};

inline const char* to_string(PropertyClass c) noexcept {
    switch (c) {
    case PropertyClass::Quasinonexpansive: return "quasinonexpansive";
    case PropertyClass::Nonexpansive: return "nonexpansive";
    case PropertyClass::StronglyQuasinonexpansive: return "strongly_quasinonexpansive";
    case PropertyClass::FirmlyNonexpansive: return "firmly_nonexpansive";
    }
    return "unknown";
}

/// Whether an operator of class `have` (with a fixed point) is also of class `need`.
/// Firmly nonexpansive implies both nonexpansive and strongly quasinonexpansive;
/// every class implies quasinonexpansive.
constexpr bool implies(PropertyClass have, PropertyClass need) noexcept {
    if (have == need) return true;
    switch (need) {
    case PropertyClass::Quasinonexpansive: return true;
    case PropertyClass::Nonexpansive:
    case PropertyClass::StronglyQuasinonexpansive:
        return have == PropertyClass::FirmlyNonexpansive;
    case PropertyClass::FirmlyNonexpansive: return false;
    }
    return false;
}

class Operator;

struct MetricProjection {
    ConvexSet set;
};

/// x -> x - (f(x)/||g||^2) g when f(x) > 0, identity otherwise.
struct SubgradientProjection {
    ConvexFunctional f;
};

/// x -> lambda*x + (1 - lambda)*T x
struct Relaxed {
    std::shared_ptr<const Operator> inner;
    double lambda = 0.5;
};

/// x -> S(P_C x); turns S : C -> H into a self-map of H with the same fixed points.
struct ComposedWithProjection {
    std::shared_ptr<const Operator> inner;
    ConvexSet domain;
};

/// x -> A x + c
struct Affine {
    Matrix A;
    Vector c;
};

/// User-supplied map. Its property class and demiclosedness are declared, not derived.
struct Custom {
    std::function<Vector(const Vector&)> map;
    std::size_t dim = 0;
    std::string name;
};

class Operator {
public:
    using kind_type =
        std::variant<MetricProjection, SubgradientProjection, Relaxed, ComposedWithProjection,
                     Affine, Custom>;

    const kind_type& kind() const noexcept { return kind_; }

    template <class T>
    const T* get_if() const noexcept { return std::get_if<T>(&kind_); }

    std::size_t dim() const noexcept { return dim_; }
    PropertyClass property_class() const noexcept { return class_; }
    bool demiclosed_at_zero() const noexcept { return demiclosed_; }

    /// Set on which the mapping is defined; empty means all of R^n.
    const std::optional<ConvexSet>& defined_on() const noexcept { return defined_on_; }
    bool is_self_map() const noexcept { return !defined_on_.has_value(); }

    const char* kind_name() const noexcept {
        static constexpr const char* names[] = {"projection", "subgradient_projection", "relaxed",
                                                "composed",   "affine",                 "custom"};
        return names[kind_.index()];
    }

    /// The same mapping, declared as T : C -> H. Points outside C are rejected by apply().
    Operator restricted_to(ConvexSet domain) const {
        detail::require_same_dim(dim_, domain.dim(), "Operator::restricted_to");
        if (domain.get_if<Intersection>()) {
            throw config_error("", "domain of definition must be directly projectable");
        }
        Operator out = *this;
        out.defined_on_ = std::move(domain);
        return out;
    }

    friend bool operator==(const Operator& a, const Operator& b);

private:
    Operator(kind_type kind, std::size_t dim, PropertyClass cls, bool demiclosed)
        : kind_(std::move(kind)), dim_(dim), class_(cls), demiclosed_(demiclosed) {}

    friend Operator metric_projection(ConvexSet set);
    friend Operator subgradient_projection(ConvexFunctional f);
    friend Operator relax(const Operator& inner, double lambda);
    friend Operator compose_with_projection(const Operator& inner, ConvexSet domain);
    friend Operator affine(Matrix A, Vector c);
    friend Operator custom(std::function<Vector(const Vector&)> map, std::size_t dim,
                           PropertyClass declared, bool demiclosed, std::string name);

    kind_type kind_;
    std::size_t dim_ = 0;
    PropertyClass class_ = PropertyClass::Quasinonexpansive;
    bool demiclosed_ = true;
    std::optional<ConvexSet> defined_on_;
};

inline bool operator==(const Operator& a, const Operator& b) {
    if (a.dim_ != b.dim_ || a.class_ != b.class_ || a.demiclosed_ != b.demiclosed_ ||
        a.defined_on_ != b.defined_on_ || a.kind_.index() != b.kind_.index()) {
        return false;
    }
    struct {
        const Operator::kind_type& other;
        bool operator()(const MetricProjection& k) const {
            return k.set == std::get<MetricProjection>(other).set;
        }
        bool operator()(const SubgradientProjection& k) const {
            return k.f == std::get<SubgradientProjection>(other).f;
        }
        bool operator()(const Relaxed& k) const {
            const auto& o = std::get<Relaxed>(other);
            return k.lambda == o.lambda && *k.inner == *o.inner;
        }
        bool operator()(const ComposedWithProjection& k) const {
            const auto& o = std::get<ComposedWithProjection>(other);
            return k.domain == o.domain && *k.inner == *o.inner;
        }
        bool operator()(const Affine& k) const {
            const auto& o = std::get<Affine>(other);
            return k.A == o.A && k.c == o.c;
        }
        bool operator()(const Custom& k) const {
            const auto& o = std::get<Custom>(other);
            return k.name == o.name && k.dim == o.dim &&
                   k.map.target_type() == o.map.target_type();
        }
    } visitor{b.kind_};
    return std::visit(visitor, a.kind_);
}

inline Operator metric_projection(ConvexSet set) {
    if (set.get_if<Intersection>()) {
        throw config_error("", "projection onto an intersection is not directly computable; "
                               "list the members as separate operators");
    }
    const std::size_t d = set.dim();
    return Operator(MetricProjection{std::move(set)}, d, PropertyClass::FirmlyNonexpansive, true);
}

inline Operator subgradient_projection(ConvexFunctional f) {
    const std::size_t d = f.dim();
    return Operator(SubgradientProjection{std::move(f)}, d,
                    PropertyClass::StronglyQuasinonexpansive, true);
}

inline Operator relax(const Operator& inner, double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) {
        throw config_error("", "relaxation parameter must lie in (0, 1)");
    }
    const PropertyClass cls = inner.property_class() == PropertyClass::FirmlyNonexpansive
                                  ? PropertyClass::FirmlyNonexpansive
                                  : PropertyClass::StronglyQuasinonexpansive;
    Operator out(Relaxed{std::make_shared<const Operator>(inner), lambda}, inner.dim(), cls,
                 inner.demiclosed_at_zero());
    out.defined_on_ = inner.defined_on();
    return out;
}

inline Operator compose_with_projection(const Operator& inner, ConvexSet domain) {
    detail::require_same_dim(inner.dim(), domain.dim(), "compose_with_projection");
    if (domain.get_if<Intersection>()) {
        throw config_error("", "composition domain must be directly projectable");
    }
    if (inner.defined_on() && *inner.defined_on() != domain) {
        throw config_error("", "inner operator is defined on a different set than the "
                               "composition domain");
    }
    PropertyClass cls = inner.property_class();
    if (cls == PropertyClass::FirmlyNonexpansive) cls = PropertyClass::StronglyQuasinonexpansive;
    return Operator(ComposedWithProjection{std::make_shared<const Operator>(inner),
                                           std::move(domain)},
                    inner.dim(), cls, inner.demiclosed_at_zero());
}

/// Spectral norm of A is checked by power iteration with slack 1e-8.
inline Operator affine(Matrix A, Vector c) {
    if (A.rows() != A.cols() || A.rows() != c.dim() || c.empty()) {
        throw config_error("", "affine: A must be square and match the offset dimension");
    }
    const double sn = spectral_norm(A);
    if (sn > 1.0 + 1e-8) {
        throw config_error("", "affine: spectral norm " + std::to_string(sn) +
                                   " exceeds 1; only nonexpansive maps are supported");
    }
    const std::size_t d = c.dim();
    return Operator(Affine{std::move(A), std::move(c)}, d, PropertyClass::Nonexpansive, true);
}

inline Operator custom(std::function<Vector(const Vector&)> map, std::size_t dim,
                       PropertyClass declared, bool demiclosed, std::string name) {
    if (!map) throw config_error("", "custom operator needs a callable");
    if (dim == 0) throw config_error("", "custom operator needs a positive dimension");
    return Operator(Custom{std::move(map), dim, std::move(name)}, dim, declared, demiclosed);
}

Vector apply(const Operator& op, const Vector& x);

namespace detail {

struct ApplyVisitor {
    const Vector& x;

    Vector operator()(const MetricProjection& k) const { return project(k.set, x); }

    Vector operator()(const SubgradientProjection& k) const {
        const double fx = k.f.value(x);
        if (fx <= 0.0) return x;
        const Vector g = k.f.subgradient(x);
        const double gg = norm_squared(g);
        if (gg == 0.0) {
            throw domain_error("subgradient projection: inconsistent functional (zero "
                               "subgradient where f > 0, so the zero sublevel set is empty)");
        }
        return axpby(1.0, x, -fx / gg, g);
    }

    Vector operator()(const Relaxed& k) const {
        return axpby(k.lambda, x, 1.0 - k.lambda, apply(*k.inner, x));
    }

    Vector operator()(const ComposedWithProjection& k) const {
        return apply(*k.inner, project(k.domain, x));
    }

    Vector operator()(const Affine& k) const { return k.A * x + k.c; }

    Vector operator()(const Custom& k) const {
        Vector y = k.map(x);
        require_same_dim(y.dim(), x.dim(), "custom operator output");
        return y;
    }
};

} // namespace detail

inline Vector apply(const Operator& op, const Vector& x) {
    detail::require_same_dim(op.dim(), x.dim(), "apply");
    if (op.defined_on() && !contains(*op.defined_on(), x, domain_membership_tolerance)) {
        throw domain_error(std::string("apply: point lies outside the domain of this ") +
                           op.kind_name() + " operator; wrap it with compose_with_projection");
    }
    return std::visit(detail::ApplyVisitor{x}, op.kind());
}

/// ||T x - x||
inline double displacement(const Operator& op, const Vector& x) {
    return distance(apply(op, x), x);
}

/// max_i ||T_i x - x||
inline double fixed_point_residual(std::span<const Operator> ops, const Vector& x) {
    if (ops.empty()) throw config_error("", "fixed_point_residual: empty operator list");
    double r = 0.0;
    for (const auto& op : ops) r = std::max(r, displacement(op, x));
    return r;
}

} // namespace parfix
