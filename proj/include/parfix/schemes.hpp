#pragma once

// Iteration drivers for the common fixed point problem of a finite family
// {T_1, ..., T_N}. Each iteration selects i_n by parallel argmax selection
// (see selection.hpp) and then applies one of
//
//   projected_halpern  x_{n+1} = P_C(a_n u + (1 - a_n)(b_n x_n + (1 - b_n) T_{i_n} x_n))
//   halpern            x_{n+1} = a_n u + (1 - a_n) S_{i_n} x_n
//   picard             x_{n+1} = S_{i_n} x_n
//
// Iterations are numbered from n = 1. A run stops at the first x_n whose
// fixed point residual max_i ||T_i x_n - x_n|| is <= residual_tol, or at
// n = max_iters. The selection at x_n computes every displacement, so the
// residual comes for free with the step.

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "parfix/errors.hpp"
#include "parfix/hilbert.hpp"
#include "parfix/operators.hpp"
#include "parfix/parallel.hpp"
#include "parfix/schedule.hpp"
#include "parfix/selection.hpp"
#include "parfix/sets.hpp"

namespace parfix {

struct SnapshotPolicy {
    enum class Kind { None, Final, EveryK };
    Kind kind = Kind::None;
    std::size_t k = 1;

    static SnapshotPolicy none() { return {Kind::None, 1}; }
    static SnapshotPolicy final_only() { return {Kind::Final, 1}; }
    static SnapshotPolicy every(std::size_t k) { return {Kind::EveryK, k}; }
};

struct RunConfig {
    std::optional<Vector> anchor;  // u, Halpern variants only
    Vector initial;                // x_1
    std::size_t max_iters = 1'000'000;
    double residual_tol = 1e-8;
    std::size_t trace_every = 1;
    SnapshotPolicy snapshots = SnapshotPolicy::none();
    double tie_tolerance = 0.0;
    /// Diagnostic column of the trace (e.g. distance to a reference point).
    /// Evaluated only on traced rows; never influences the iteration.
    std::function<double(const Vector&)> trace_distance;
};

struct TraceRow {
    std::size_t n = 0;
    std::optional<double> alpha;
    std::size_t selected_index = 0;  // zero-based
    double selected_displacement = 0.0;
    double residual = 0.0;
    std::optional<double> dist_to_oracle;
};

struct Snapshot {
    std::size_t n = 0;
    Vector x;
};

struct RunTrace {
    std::vector<TraceRow> rows;
    std::vector<Snapshot> snapshots;
    std::vector<std::pair<std::string, std::string>> metadata;
};

enum class StopReason { ResidualMet, MaxIters, NumericalFailure };

inline const char* to_string(StopReason r) noexcept {
    switch (r) {
    case StopReason::ResidualMet: return "residual_met";
    case StopReason::MaxIters: return "max_iters";
    case StopReason::NumericalFailure: return "numerical_failure";
    }
    return "unknown";
}

struct RunResult {
    Vector final_iterate;
    std::size_t iterations_used = 0;
    double final_residual = 0.0;
    bool converged = false;
    StopReason stop_reason = StopReason::MaxIters;
    RunTrace trace;
};

/// b x + (1 - b) image; the relaxed operator b I + (1 - b) T evaluated from a cached T x.
inline Vector blend(double beta, const Vector& x, const Vector& image) {
    return axpby(beta, x, 1.0 - beta, image);
}

namespace detail {

inline void check_family(std::span<const Operator> ops, std::size_t dim) {
    if (ops.empty()) throw config_error("operators", "operator family must be nonempty");
    for (std::size_t i = 0; i < ops.size(); ++i) {
        const std::string path = "operators[" + std::to_string(i) + "]";
        if (ops[i].dim() != dim) {
            throw config_error(path, "dimension " + std::to_string(ops[i].dim()) +
                                         " does not match " + std::to_string(dim));
        }
        if (!ops[i].demiclosed_at_zero()) {
            throw config_error(path, "operator is not declared demiclosed at 0");
        }
    }
}

inline void check_self_maps(std::span<const Operator> ops, Scheme scheme) {
    for (std::size_t i = 0; i < ops.size(); ++i) {
        const std::string path = "operators[" + std::to_string(i) + "]";
        if (!ops[i].is_self_map()) {
            throw config_error(path, std::string(ops[i].kind_name()) +
                                         " operator is defined on a subset only; " +
                                         to_string(scheme) +
                                         " needs self-maps of R^n (wrap it with "
                                         "compose_with_projection)");
        }
        if (!implies(ops[i].property_class(), PropertyClass::StronglyQuasinonexpansive)) {
            throw config_error(path, std::string(ops[i].kind_name()) + " operator is " +
                                         to_string(ops[i].property_class()) + "; " +
                                         to_string(scheme) +
                                         " needs strongly quasinonexpansive operators "
                                         "(relax it first)");
        }
    }
}

inline void check_config(const RunConfig& cfg, std::size_t dim, bool needs_anchor) {
    if (cfg.initial.dim() != dim) {
        throw config_error("run.initial", "dimension does not match the problem dimension");
    }
    if (needs_anchor) {
        if (!cfg.anchor) throw config_error("anchor", "Halpern schemes need an anchor");
        if (cfg.anchor->dim() != dim) {
            throw config_error("anchor", "dimension does not match the problem dimension");
        }
    }
    if (cfg.max_iters == 0) throw config_error("run.max_iters", "must be positive");
    if (!(cfg.residual_tol > 0.0)) throw config_error("run.residual_tol", "must be > 0");
    if (cfg.trace_every == 0) throw config_error("run.trace_every", "must be positive");
    if (cfg.snapshots.kind == SnapshotPolicy::Kind::EveryK && cfg.snapshots.k == 0) {
        throw config_error("run.snapshots", "k must be positive");
    }
    if (!(cfg.tie_tolerance >= 0.0)) throw config_error("run.tie_tolerance", "must be >= 0");
}

// Shared iteration loop. `step(n, x, selection)` returns x_{n+1}.
template <class Step>
RunResult iterate(std::span<const Operator> ops, Vector x, const RunConfig& cfg,
                  ThreadPool* pool, const std::function<std::optional<double>(std::size_t)>& alpha,
                  Step&& step) {
    RunResult result;
    const SelectOptions sel_opts{cfg.tie_tolerance, pool};
    const bool every_k = cfg.snapshots.kind == SnapshotPolicy::Kind::EveryK;

    auto record = [&](std::size_t n, const Selection& sel, double residual, const Vector& at) {
        TraceRow row;
        row.n = n;
        row.alpha = alpha(n);
        row.selected_index = sel.index;
        row.selected_displacement = sel.displacement;
        row.residual = residual;
        if (cfg.trace_distance) row.dist_to_oracle = cfg.trace_distance(at);
        result.trace.rows.push_back(std::move(row));
    };

    auto finish = [&](std::size_t n, const Selection& sel, double residual, StopReason reason) {
        if (result.trace.rows.empty() || result.trace.rows.back().n != n) {
            record(n, sel, residual, x);
        }
        if (cfg.snapshots.kind != SnapshotPolicy::Kind::None &&
            (result.trace.snapshots.empty() || result.trace.snapshots.back().n != n)) {
            result.trace.snapshots.push_back({n, x});
        }
        result.iterations_used = n;
        result.final_residual = residual;
        result.stop_reason = reason;
        result.converged = reason == StopReason::ResidualMet;
        result.final_iterate = std::move(x);
    };

    for (std::size_t n = 1;; ++n) {
        Selection sel;
        try {
            sel = select(ops, x, sel_opts);
        } catch (const non_finite_error&) {
            // T_i x_n overflowed; x_n itself is the last finite iterate.
            if (cfg.snapshots.kind != SnapshotPolicy::Kind::None) {
                result.trace.snapshots.push_back({n, x});
            }
            result.iterations_used = n;
            result.final_residual = std::numeric_limits<double>::infinity();
            result.stop_reason = StopReason::NumericalFailure;
            result.final_iterate = std::move(x);
            return result;
        }
        double residual = 0.0;
        for (double d : sel.all_displacements) residual = std::max(residual, d);

        if (n == 1 || n % cfg.trace_every == 0) record(n, sel, residual, x);
        if (every_k && (n == 1 || n % cfg.snapshots.k == 0)) {
            result.trace.snapshots.push_back({n, x});
        }

        if (residual <= cfg.residual_tol) {
            finish(n, sel, residual, StopReason::ResidualMet);
            return result;
        }
        if (n >= cfg.max_iters) {
            finish(n, sel, residual, StopReason::MaxIters);
            return result;
        }
        try {
            x = step(n, x, sel);
        } catch (const non_finite_error&) {
            finish(n, sel, residual, StopReason::NumericalFailure);
            return result;
        }
    }
}

} // namespace detail

/// x_{n+1} = P_C(a_n u + (1 - a_n)(b_n x_n + (1 - b_n) T_{i_n} x_n)).
/// The operators may be quasinonexpansive maps C -> H; x_1 is projected onto C
/// on entry, so every iterate lies in C.
inline RunResult projected_halpern(std::span<const Operator> ops, const ConvexSet& domain,
                                   const Schedule& schedule, const RunConfig& cfg,
                                   ThreadPool* pool = nullptr) {
    const std::size_t dim = domain.dim();
    if (domain.get_if<Intersection>()) {
        throw config_error("domain", "domain must be directly projectable");
    }
    detail::check_family(ops, dim);
    for (std::size_t i = 0; i < ops.size(); ++i) {
        if (ops[i].defined_on() && *ops[i].defined_on() != domain) {
            throw config_error("operators[" + std::to_string(i) + "]",
                               "operator is defined on a set other than the scheme domain");
        }
    }
    detail::check_config(cfg, dim, true);
    require_valid_schedule(schedule, Scheme::ProjectedHalpern);

    const Vector& u = *cfg.anchor;
    auto alpha = [&](std::size_t n) -> std::optional<double> { return schedule.alpha_at(n); };
    return detail::iterate(ops, project(domain, cfg.initial), cfg, pool, alpha,
                           [&](std::size_t n, const Vector& x, const Selection& sel) {
                               const double a = schedule.alpha_at(n);
                               const Vector inner = blend(schedule.beta_at(n), x, sel.image);
                               return project(domain, axpby(a, u, 1.0 - a, inner));
                           });
}

/// x_{n+1} = a_n u + (1 - a_n) S_{i_n} x_n for strongly quasinonexpansive self-maps.
inline RunResult halpern(std::span<const Operator> ops, const Schedule& schedule,
                         const RunConfig& cfg, ThreadPool* pool = nullptr) {
    const std::size_t dim = cfg.initial.dim();
    detail::check_family(ops, dim);
    detail::check_self_maps(ops, Scheme::Halpern);
    detail::check_config(cfg, dim, true);
    require_valid_schedule(schedule, Scheme::Halpern);

    const Vector& u = *cfg.anchor;
    auto alpha = [&](std::size_t n) -> std::optional<double> { return schedule.alpha_at(n); };
    return detail::iterate(ops, cfg.initial, cfg, pool, alpha,
                           [&](std::size_t n, const Vector&, const Selection& sel) {
                               const double a = schedule.alpha_at(n);
                               return axpby(a, u, 1.0 - a, sel.image);
                           });
}

/// x_{n+1} = S_{i_n} x_n for strongly quasinonexpansive self-maps.
inline RunResult picard(std::span<const Operator> ops, const RunConfig& cfg,
                        ThreadPool* pool = nullptr) {
    const std::size_t dim = cfg.initial.dim();
    detail::check_family(ops, dim);
    detail::check_self_maps(ops, Scheme::Picard);
    detail::check_config(cfg, dim, false);

    auto alpha = [](std::size_t) -> std::optional<double> { return std::nullopt; };
    return detail::iterate(ops, cfg.initial, cfg, pool, alpha,
                           [](std::size_t, const Vector&, const Selection& sel) {
                               return sel.image;
                           });
}

} // namespace parfix
