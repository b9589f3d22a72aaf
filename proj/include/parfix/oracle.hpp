#pragma once

// Reference machinery for checking scheme limits: the nearest point of an
// intersection of projectable sets by Dykstra's algorithm, and membership
// tests built on it. Only the set projections of sets.hpp are shared with the
// schemes; no selection or iteration code is reused.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <optional>
#include <span>
#include <vector>

#include "parfix/errors.hpp"
#include "parfix/hilbert.hpp"
#include "parfix/operators.hpp"
#include "parfix/sets.hpp"

namespace parfix::oracle {

struct OracleConfig {
    double tol = 1e-12;
    std::size_t max_sweeps = 1'000'000;
};

struct DykstraResult {
    Vector point;
    std::size_t sweeps = 0;
};

/// Dykstra's cyclic projections with correction terms. Converges to the
/// nearest point of the intersection, unlike plain alternating projections.
/// Stops when one sweep moves the iterate and the corrections by at most
/// tol * max(1, ||x||).
inline DykstraResult dykstra(std::span<const ConvexSet> sets, const Vector& x,
                             const OracleConfig& cfg = {}) {
    if (!(cfg.tol > 0.0)) throw config_error("oracle.tol", "must be > 0");
    std::vector<ConvexSet> flat;
    for (const auto& s : sets) flatten_into(s, flat);
    if (flat.empty()) throw config_error("oracle", "no sets to intersect");
    for (const auto& s : flat) detail::require_same_dim(s.dim(), x.dim(), "project_intersection");

    const std::size_t m = flat.size();
    const std::size_t n = x.dim();
    const double scale = std::max(1.0, norm(x));

    std::vector<double> cur(x.begin(), x.end());
    std::vector<std::vector<double>> corr(m, std::vector<double>(n, 0.0));
    std::vector<double> shifted(n);

    for (std::size_t sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
        double moved = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) shifted[j] = cur[j] + corr[i][j];
            const Vector y = project(flat[i], Vector(shifted));
            for (std::size_t j = 0; j < n; ++j) {
                const double new_corr = shifted[j] - y[j];
                const double dc = new_corr - corr[i][j];
                const double dx = y[j] - cur[j];
                moved += dc * dc + dx * dx;
                corr[i][j] = new_corr;
                cur[j] = y[j];
            }
        }
        if (std::sqrt(moved) <= cfg.tol * scale) {
            return {Vector(std::move(cur)), sweep};
        }
    }
    throw oracle_error("project_intersection: Dykstra did not settle within " +
                       std::to_string(cfg.max_sweeps) +
                       " sweeps; the intersection is possibly empty");
}

/// P_F(x) for F the intersection of `sets`.
inline Vector project_intersection(std::span<const ConvexSet> sets, const Vector& x,
                                   const OracleConfig& cfg = {}) {
    return dykstra(sets, x, cfg).point;
}

inline bool membership(std::span<const ConvexSet> sets, const Vector& x, double tol,
                       const OracleConfig& cfg = {}) {
    return distance(x, project_intersection(sets, x, cfg)) <= tol;
}

/// Projectable sets whose intersection is F(op), or nothing when F(op) has
/// no such description (affine maps, quadratic level sets, custom maps).
/// Uses F(lambda I + (1 - lambda) T) = F(T) and F(S P_C) = F(S) with
/// F(S) contained in C.
inline std::optional<std::vector<ConvexSet>> fixed_point_sets(const Operator& op) {
    std::vector<ConvexSet> out;
    bool ok = true;
    struct {
        std::vector<ConvexSet>& out;
        bool& ok;
        void operator()(const MetricProjection& k) const { flatten_into(k.set, out); }
        void operator()(const SubgradientProjection& k) const {
            const auto* ma = k.f.get_if<MaxAffine>();
            if (!ma) {
                ok = false;
                return;
            }
            for (const auto& piece : ma->pieces) {
                if (norm_squared(piece.a) == 0.0) {
                    if (piece.b < 0.0) ok = false;  // empty level set
                    continue;
                }
                out.push_back(ConvexSet::halfspace(piece.a, piece.b));
            }
        }
        void operator()(const Relaxed& k) const { append(*k.inner); }
        void operator()(const ComposedWithProjection& k) const {
            append(*k.inner);
            flatten_into(k.domain, out);
        }
        void operator()(const Affine&) const { ok = false; }
        void operator()(const Custom&) const { ok = false; }
        void append(const Operator& inner) const {
            auto sets = fixed_point_sets(inner);
            if (!sets) {
                ok = false;
                return;
            }
            out.insert(out.end(), sets->begin(), sets->end());
        }
    } visitor{out, ok};
    std::visit(visitor, op.kind());
    if (!ok) return std::nullopt;
    if (op.defined_on()) flatten_into(*op.defined_on(), out);
    // F(op) = R^n (only trivially true pieces) has no description here.
    if (out.empty()) return std::nullopt;
    return out;
}

/// Sets describing the common fixed point set of a family, optionally
/// intersected with a domain.
inline std::optional<std::vector<ConvexSet>> family_fixed_point_sets(
    std::span<const Operator> ops, const std::optional<ConvexSet>& domain = std::nullopt) {
    std::vector<ConvexSet> out;
    for (const auto& op : ops) {
        auto sets = fixed_point_sets(op);
        if (!sets) return std::nullopt;
        out.insert(out.end(), sets->begin(), sets->end());
    }
    if (domain) flatten_into(*domain, out);
    return out;
}

} // namespace parfix::oracle
