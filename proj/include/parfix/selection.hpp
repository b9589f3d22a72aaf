#pragma once

// Parallel argmax selection: evaluate every operator at the current point and
// pick one of maximal displacement, smallest index among ties.

#include <cstddef>
#include <span>
#include <vector>

#include "parfix/errors.hpp"
#include "parfix/hilbert.hpp"
#include "parfix/operators.hpp"
#include "parfix/parallel.hpp"

namespace parfix {

struct Selection {
    std::size_t index = 0;  // zero-based position in the operator list
    double displacement = 0.0;
    std::vector<double> all_displacements;
    Vector image;  // T_index x
};

struct SelectOptions {
    /// Indices within tie_tolerance of the maximum count as tied.
    double tie_tolerance = 0.0;
    /// Optional pool for the per-operator evaluations.
    ThreadPool* pool = nullptr;
};

inline Selection select(std::span<const Operator> ops, const Vector& x,
                        const SelectOptions& options = {}) {
    if (ops.empty()) throw config_error("", "select: empty operator list");
    for (const auto& op : ops) detail::require_same_dim(op.dim(), x.dim(), "select");

    std::vector<Vector> images(ops.size());
    std::vector<double> disp(ops.size());
    auto evaluate = [&](std::size_t i) {
        images[i] = apply(ops[i], x);
        disp[i] = distance(images[i], x);
    };
    if (options.pool) {
        options.pool->parallel_for(ops.size(), evaluate);
    } else {
        for (std::size_t i = 0; i < ops.size(); ++i) evaluate(i);
    }

    double best = disp[0];
    for (double d : disp) best = std::max(best, d);
    std::size_t k = 0;
    while (disp[k] < best - options.tie_tolerance) ++k;

    return Selection{k, disp[k], std::move(disp), std::move(images[k])};
}

} // namespace parfix
