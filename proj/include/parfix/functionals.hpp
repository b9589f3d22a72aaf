#pragma once

// Convex functionals with a deterministic subgradient oracle. The zero
// sublevel set {x : f(x) <= 0} is what a subgradient projection targets.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "parfix/errors.hpp"
#include "parfix/hilbert.hpp"

namespace parfix {

/// f(x) = 0.5 * x^T Q x + <q, x> + r with Q symmetric positive semidefinite.
struct Quadratic {
    Matrix Q;
    Vector q;
    double r = 0.0;
    friend bool operator==(const Quadratic&, const Quadratic&) = default;
};

struct AffinePiece {
    Vector a;
    double b = 0.0;
    friend bool operator==(const AffinePiece&, const AffinePiece&) = default;
};

/// f(x) = max_i (<a_i, x> - b_i). The zero sublevel set is the polyhedron
/// {x : <a_i, x> <= b_i for all i}.
struct MaxAffine {
    std::vector<AffinePiece> pieces;
    friend bool operator==(const MaxAffine&, const MaxAffine&) = default;
};

namespace detail {

// Cholesky of Q + shift*I; false when a pivot is not positive.
inline bool cholesky_succeeds(const Matrix& Q, double shift) {
    const std::size_t n = Q.rows();
    std::vector<double> L(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double d = Q(j, j) + shift;
        for (std::size_t k = 0; k < j; ++k) d -= L[j * n + k] * L[j * n + k];
        if (!(d > 0.0)) return false;
        const double ljj = std::sqrt(d);
        L[j * n + j] = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = Q(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= L[i * n + k] * L[j * n + k];
            L[i * n + j] = s / ljj;
        }
    }
    return true;
}

} // namespace detail

class ConvexFunctional {
public:
    using variant_type = std::variant<Quadratic, MaxAffine>;

    static ConvexFunctional quadratic(Matrix Q, Vector q, double r) {
        const std::size_t n = q.dim();
        if (n == 0) throw config_error("", "quadratic: q must be nonempty");
        if (Q.rows() != n || Q.cols() != n) {
            throw config_error("", "quadratic: Q must be " + std::to_string(n) + "x" +
                                       std::to_string(n));
        }
        if (!std::isfinite(r)) throw config_error("", "quadratic: r must be finite");
        double scale = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(Q(i, j)));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (std::abs(Q(i, j) - Q(j, i)) > 1e-12 * std::max(1.0, scale)) {
                    throw config_error("", "quadratic: Q must be symmetric");
                }
            }
        }
        if (!detail::cholesky_succeeds(Q, 1e-12 * std::max(1.0, scale))) {
            throw config_error("", "quadratic: Q must be positive semidefinite");
        }
        return ConvexFunctional(Quadratic{std::move(Q), std::move(q), r});
    }

    static ConvexFunctional max_affine(std::vector<AffinePiece> pieces) {
        if (pieces.empty()) throw config_error("", "max_affine: needs at least one piece");
        const std::size_t n = pieces.front().a.dim();
        if (n == 0) throw config_error("", "max_affine: pieces must be nonempty vectors");
        for (std::size_t i = 0; i < pieces.size(); ++i) {
            if (pieces[i].a.dim() != n) {
                throw config_error("pieces[" + std::to_string(i) + "]",
                                   "max_affine pieces must share one dimension");
            }
            if (!std::isfinite(pieces[i].b)) {
                throw config_error("pieces[" + std::to_string(i) + "]", "b must be finite");
            }
        }
        return ConvexFunctional(MaxAffine{std::move(pieces)});
    }

    const variant_type& variant() const noexcept { return v_; }

    template <class T>
    const T* get_if() const noexcept { return std::get_if<T>(&v_); }

    std::size_t dim() const {
        if (const auto* qf = get_if<Quadratic>()) return qf->q.dim();
        return std::get<MaxAffine>(v_).pieces.front().a.dim();
    }

    double value(const Vector& x) const {
        detail::require_same_dim(dim(), x.dim(), "ConvexFunctional::value");
        if (const auto* qf = get_if<Quadratic>()) {
            return 0.5 * inner(x, qf->Q * x) + inner(qf->q, x) + qf->r;
        }
        const auto& p = std::get<MaxAffine>(v_).pieces[active_piece(x)];
        return inner(p.a, x) - p.b;
    }

    /// One subgradient at x. For MaxAffine, the active piece with the
    /// lowest index.
    Vector subgradient(const Vector& x) const {
        detail::require_same_dim(dim(), x.dim(), "ConvexFunctional::subgradient");
        if (const auto* qf = get_if<Quadratic>()) return qf->Q * x + qf->q;
        return std::get<MaxAffine>(v_).pieces[active_piece(x)].a;
    }

    friend bool operator==(const ConvexFunctional&, const ConvexFunctional&) = default;

private:
    template <class T>
    explicit ConvexFunctional(T alt) : v_(std::move(alt)) {}

    std::size_t active_piece(const Vector& x) const {
        const auto& pieces = std::get<MaxAffine>(v_).pieces;
        std::size_t best = 0;
        double best_value = inner(pieces[0].a, x) - pieces[0].b;
        for (std::size_t i = 1; i < pieces.size(); ++i) {
            const double v = inner(pieces[i].a, x) - pieces[i].b;
            if (v > best_value) {
                best = i;
                best_value = v;
            }
        }
        return best;
    }

    variant_type v_;
};

} // namespace parfix
