#pragma once

// Problem files: a JSON document describing an operator family, the scheme to
// run, its schedule and run settings. The normative schema lives in
// docs/problem-schema.md. Operator order is meaningful: selection breaks
// ties toward the smallest index.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "parfix/errors.hpp"
#include "parfix/hilbert.hpp"
#include "parfix/operators.hpp"
#include "parfix/oracle.hpp"
#include "parfix/parallel.hpp"
#include "parfix/schedule.hpp"
#include "parfix/schemes.hpp"
#include "parfix/sets.hpp"

namespace parfix {

struct Problem {
    std::string name;
    std::size_t dim = 0;
    Scheme scheme = Scheme::Picard;
    std::vector<Operator> operators;
    std::optional<ConvexSet> domain;  // projected_halpern only
    std::optional<Schedule> schedule; // required by the Halpern variants
    RunConfig config;                 // anchor lives in config.anchor
    /// Test metadata; never read by the solver.
    std::optional<Vector> known_solution;
};

struct LoadOptions {
    /// When false, schedule conditions are not enforced (used by schedule-check,
    /// which reports them instead).
    bool enforce_schedule = true;
};

namespace io {

using json = nlohmann::json;

inline std::string child(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

inline std::string item(const std::string& path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
}

inline void require_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw config_error(path, "expected an object");
}

inline void reject_unknown_keys(const json& j, const std::string& path,
                                std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed) known = known || it.key() == k;
        if (!known) throw config_error(child(path, it.key()), "unknown field");
    }
}

inline const json& field(const json& j, const char* key, const std::string& path) {
    const auto it = j.find(key);
    if (it == j.end()) throw config_error(child(path, key), "missing required field");
    return *it;
}

inline double as_real(const json& j, const std::string& path) {
    if (!j.is_number()) throw config_error(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw config_error(path, "must be finite");
    return v;
}

inline std::size_t as_count(const json& j, const std::string& path) {
    if (j.is_number_unsigned()) return j.get<std::size_t>();
    if (j.is_number_integer()) {
        if (j.get<std::int64_t>() < 0) throw config_error(path, "must be nonnegative");
        return static_cast<std::size_t>(j.get<std::int64_t>());
    }
    if (j.is_number_float()) {
        const double v = j.get<double>();
        if (v >= 0.0 && v == std::floor(v) && v < 9.0e15) return static_cast<std::size_t>(v);
    }
    throw config_error(path, "expected a nonnegative integer");
}

inline std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) throw config_error(path, "expected a string");
    return j.get<std::string>();
}

inline std::vector<double> as_reals(const json& j, const std::string& path) {
    if (!j.is_array()) throw config_error(path, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_real(j[i], item(path, i)));
    return out;
}

inline Vector as_vector(const json& j, const std::string& path, std::size_t dim) {
    auto v = as_reals(j, path);
    if (v.size() != dim) {
        throw config_error(path, "expected " + std::to_string(dim) + " coordinates, got " +
                                     std::to_string(v.size()));
    }
    return Vector(std::move(v));
}

inline Matrix as_matrix(const json& j, const std::string& path, std::size_t dim) {
    if (!j.is_array() || j.size() != dim) {
        throw config_error(path, "expected " + std::to_string(dim) + " rows");
    }
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < dim; ++i) rows.push_back(as_vector(j[i], item(path, i), dim).values());
    return Matrix::from_rows(rows);
}

// Rethrows constructor errors with the field path attached.
template <class F>
auto at_path(const std::string& path, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const config_error& e) {
        throw config_error(e.path().empty() ? path : child(path, e.path()), e.message());
    } catch (const dimension_error& e) {
        throw config_error(path, e.what());
    }
}

inline ConvexSet parse_set(const json& j, const std::string& path, std::size_t dim) {
    require_object(j, path);
    const std::string type = as_string(field(j, "type", path), child(path, "type"));
    if (type == "halfspace" || type == "hyperplane") {
        reject_unknown_keys(j, path, {"type", "normal", "offset"});
        Vector a = as_vector(field(j, "normal", path), child(path, "normal"), dim);
        const double b = as_real(field(j, "offset", path), child(path, "offset"));
        return at_path(path, [&] {
            return type == "halfspace" ? ConvexSet::halfspace(a, b) : ConvexSet::hyperplane(a, b);
        });
    }
    if (type == "ball") {
        reject_unknown_keys(j, path, {"type", "center", "radius"});
        Vector c = as_vector(field(j, "center", path), child(path, "center"), dim);
        const double r = as_real(field(j, "radius", path), child(path, "radius"));
        return at_path(path, [&] { return ConvexSet::ball(c, r); });
    }
    if (type == "box") {
        reject_unknown_keys(j, path, {"type", "lo", "hi"});
        Vector lo = as_vector(field(j, "lo", path), child(path, "lo"), dim);
        Vector hi = as_vector(field(j, "hi", path), child(path, "hi"), dim);
        return at_path(path, [&] { return ConvexSet::box(lo, hi); });
    }
    if (type == "intersection") {
        reject_unknown_keys(j, path, {"type", "members"});
        const json& m = field(j, "members", path);
        const std::string mpath = child(path, "members");
        if (!m.is_array()) throw config_error(mpath, "expected an array of sets");
        std::vector<ConvexSet> members;
        for (std::size_t i = 0; i < m.size(); ++i) members.push_back(parse_set(m[i], item(mpath, i), dim));
        return at_path(path, [&] { return ConvexSet::intersection(members); });
    }
    throw config_error(child(path, "type"), "unknown set type '" + type + "'");
}

inline ConvexFunctional parse_functional(const json& j, const std::string& path, std::size_t dim) {
    require_object(j, path);
    const std::string type = as_string(field(j, "type", path), child(path, "type"));
    if (type == "quadratic") {
        reject_unknown_keys(j, path, {"type", "Q", "q", "r"});
        Matrix Q = as_matrix(field(j, "Q", path), child(path, "Q"), dim);
        Vector q = as_vector(field(j, "q", path), child(path, "q"), dim);
        const double r = as_real(field(j, "r", path), child(path, "r"));
        return at_path(path, [&] { return ConvexFunctional::quadratic(Q, q, r); });
    }
    if (type == "max_affine") {
        reject_unknown_keys(j, path, {"type", "pieces"});
        const json& p = field(j, "pieces", path);
        const std::string ppath = child(path, "pieces");
        if (!p.is_array()) throw config_error(ppath, "expected an array");
        std::vector<AffinePiece> pieces;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const std::string ip = item(ppath, i);
            require_object(p[i], ip);
            reject_unknown_keys(p[i], ip, {"a", "b"});
            pieces.push_back({as_vector(field(p[i], "a", ip), child(ip, "a"), dim),
                              as_real(field(p[i], "b", ip), child(ip, "b"))});
        }
        return at_path(path, [&] { return ConvexFunctional::max_affine(pieces); });
    }
    throw config_error(child(path, "type"), "unknown functional type '" + type + "'");
}

inline Operator parse_operator(const json& j, const std::string& path, std::size_t dim) {
    require_object(j, path);
    const std::string type = as_string(field(j, "type", path), child(path, "type"));
    auto with_domain = [&](Operator op) {
        if (const auto it = j.find("defined_on"); it != j.end()) {
            ConvexSet d = parse_set(*it, child(path, "defined_on"), dim);
            return at_path(child(path, "defined_on"), [&] { return op.restricted_to(d); });
        }
        return op;
    };
    if (type == "projection") {
        reject_unknown_keys(j, path, {"type", "set", "defined_on"});
        ConvexSet s = parse_set(field(j, "set", path), child(path, "set"), dim);
        return with_domain(at_path(child(path, "set"), [&] { return metric_projection(s); }));
    }
    if (type == "subgradient_projection") {
        reject_unknown_keys(j, path, {"type", "functional", "defined_on"});
        ConvexFunctional f =
            parse_functional(field(j, "functional", path), child(path, "functional"), dim);
        return with_domain(subgradient_projection(f));
    }
    if (type == "relaxed") {
        reject_unknown_keys(j, path, {"type", "lambda", "operator", "defined_on"});
        const double lambda = as_real(field(j, "lambda", path), child(path, "lambda"));
        Operator inner = parse_operator(field(j, "operator", path), child(path, "operator"), dim);
        return with_domain(at_path(child(path, "lambda"), [&] { return relax(inner, lambda); }));
    }
    if (type == "composed") {
        reject_unknown_keys(j, path, {"type", "domain", "operator", "defined_on"});
        ConvexSet d = parse_set(field(j, "domain", path), child(path, "domain"), dim);
        Operator inner = parse_operator(field(j, "operator", path), child(path, "operator"), dim);
        return with_domain(at_path(path, [&] { return compose_with_projection(inner, d); }));
    }
    if (type == "affine") {
        reject_unknown_keys(j, path, {"type", "matrix", "offset", "defined_on"});
        Matrix A = as_matrix(field(j, "matrix", path), child(path, "matrix"), dim);
        Vector c = as_vector(field(j, "offset", path), child(path, "offset"), dim);
        return with_domain(at_path(path, [&] { return affine(A, c); }));
    }
    throw config_error(child(path, "type"), "unknown operator type '" + type + "'");
}

inline StepRule parse_rule(const json& j, const std::string& path) {
    require_object(j, path);
    if (j.contains("constant") && !j.contains("family")) {
        reject_unknown_keys(j, path, {"constant"});
        return ConstantRule{as_real(j["constant"], child(path, "constant"))};
    }
    const std::string family = as_string(field(j, "family", path), child(path, "family"));
    if (family == "power") {
        reject_unknown_keys(j, path, {"family", "a", "c", "p"});
        return PowerLawRule{as_real(field(j, "a", path), child(path, "a")),
                            as_real(field(j, "c", path), child(path, "c")),
                            as_real(field(j, "p", path), child(path, "p"))};
    }
    if (family == "constant") {
        reject_unknown_keys(j, path, {"family", "value"});
        return ConstantRule{as_real(field(j, "value", path), child(path, "value"))};
    }
    if (family == "sequence") {
        reject_unknown_keys(j, path, {"family", "values"});
        auto values = as_reals(field(j, "values", path), child(path, "values"));
        if (values.empty()) throw config_error(child(path, "values"), "must be nonempty");
        return SequenceRule{std::move(values)};
    }
    throw config_error(child(path, "family"), "unknown schedule family '" + family + "'");
}

inline json set_to_json(const ConvexSet& s) {
    struct {
        json operator()(const Halfspace& h) const {
            return {{"type", "halfspace"}, {"normal", h.normal.values()}, {"offset", h.offset}};
        }
        json operator()(const Hyperplane& h) const {
            return {{"type", "hyperplane"}, {"normal", h.normal.values()}, {"offset", h.offset}};
        }
        json operator()(const Ball& b) const {
            return {{"type", "ball"}, {"center", b.center.values()}, {"radius", b.radius}};
        }
        json operator()(const Box& b) const {
            return {{"type", "box"}, {"lo", b.lo.values()}, {"hi", b.hi.values()}};
        }
        json operator()(const Intersection& in) const {
            json members = json::array();
            for (const auto& m : in.members) members.push_back(set_to_json(m));
            return {{"type", "intersection"}, {"members", members}};
        }
    } visitor;
    return std::visit(visitor, s.variant());
}

inline json functional_to_json(const ConvexFunctional& f) {
    if (const auto* q = f.get_if<Quadratic>()) {
        return {{"type", "quadratic"}, {"Q", q->Q.to_rows()}, {"q", q->q.values()}, {"r", q->r}};
    }
    json pieces = json::array();
    for (const auto& p : std::get<MaxAffine>(f.variant()).pieces) {
        pieces.push_back({{"a", p.a.values()}, {"b", p.b}});
    }
    return {{"type", "max_affine"}, {"pieces", pieces}};
}

inline json operator_to_json(const Operator& op) {
    struct {
        json operator()(const MetricProjection& k) const {
            return {{"type", "projection"}, {"set", set_to_json(k.set)}};
        }
        json operator()(const SubgradientProjection& k) const {
            return {{"type", "subgradient_projection"}, {"functional", functional_to_json(k.f)}};
        }
        json operator()(const Relaxed& k) const {
            return {{"type", "relaxed"}, {"lambda", k.lambda}, {"operator", operator_to_json(*k.inner)}};
        }
        json operator()(const ComposedWithProjection& k) const {
            return {{"type", "composed"},
                    {"domain", set_to_json(k.domain)},
                    {"operator", operator_to_json(*k.inner)}};
        }
        json operator()(const Affine& k) const {
            return {{"type", "affine"}, {"matrix", k.A.to_rows()}, {"offset", k.c.values()}};
        }
        json operator()(const Custom& k) const {
            throw config_error("", "custom operator '" + k.name + "' cannot be serialized");
        }
    } visitor;
    json j = std::visit(visitor, op.kind());
    // Relaxed inherits the restriction of its inner operator; only write it where declared.
    const bool inherited = op.get_if<Relaxed>() &&
                           op.get_if<Relaxed>()->inner->defined_on() == op.defined_on();
    if (op.defined_on() && !inherited) j["defined_on"] = set_to_json(*op.defined_on());
    return j;
}

inline json rule_to_json(const StepRule& r) {
    if (const auto* c = std::get_if<ConstantRule>(&r)) return {{"family", "constant"}, {"value", c->value}};
    if (const auto* p = std::get_if<PowerLawRule>(&r)) {
        return {{"family", "power"}, {"a", p->a}, {"c", p->c}, {"p", p->p}};
    }
    return {{"family", "sequence"}, {"values", std::get<SequenceRule>(r).values}};
}

} // namespace io

inline Scheme parse_scheme(const std::string& s, const std::string& path = "scheme") {
    if (s == "projected_halpern") return Scheme::ProjectedHalpern;
    if (s == "halpern") return Scheme::Halpern;
    if (s == "picard") return Scheme::Picard;
    throw config_error(path, "unknown scheme '" + s + "' (expected projected_halpern, halpern "
                             "or picard)");
}

/// Checks the hypotheses the configured scheme places on the problem.
inline void validate_problem(const Problem& p, const LoadOptions& opts = {}) {
    const bool halpern_like = p.scheme != Scheme::Picard;
    if (halpern_like != p.config.anchor.has_value()) {
        throw config_error("anchor", halpern_like ? "required by Halpern schemes"
                                                  : "only allowed for Halpern schemes");
    }
    if ((p.scheme == Scheme::ProjectedHalpern) != p.domain.has_value()) {
        throw config_error("domain", p.domain ? "only allowed for projected_halpern"
                                              : "required by projected_halpern");
    }
    if (halpern_like && !p.schedule) throw config_error("schedule", "required by Halpern schemes");
    detail::check_family(p.operators, p.dim);
    if (p.domain) {
        if (p.domain->get_if<Intersection>()) {
            throw config_error("domain", "must be directly projectable");
        }
        for (std::size_t i = 0; i < p.operators.size(); ++i) {
            if (p.operators[i].defined_on() && *p.operators[i].defined_on() != *p.domain) {
                throw config_error("operators[" + std::to_string(i) + "].defined_on",
                                   "must match the problem domain");
            }
        }
    } else {
        detail::check_self_maps(p.operators, p.scheme);
    }
    detail::check_config(p.config, p.dim, halpern_like);
    if (opts.enforce_schedule && halpern_like) require_valid_schedule(*p.schedule, p.scheme);
}

inline Problem load_problem(const std::string& text, const LoadOptions& opts = {}) {
    using io::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw config_error("", std::string("malformed problem file: ") + e.what());
    }
    io::require_object(j, "");
    io::reject_unknown_keys(j, "", {"name", "dim", "scheme", "anchor", "domain", "operators",
                                    "schedule", "run", "known_solution"});
    Problem p;
    if (j.contains("name")) p.name = io::as_string(j["name"], "name");
    p.dim = io::as_count(io::field(j, "dim", ""), "dim");
    if (p.dim == 0) throw config_error("dim", "must be positive");
    p.scheme = parse_scheme(io::as_string(io::field(j, "scheme", ""), "scheme"));

    const json& ops = io::field(j, "operators", "");
    if (!ops.is_array() || ops.empty()) {
        throw config_error("operators", "expected a nonempty array of operators");
    }
    for (std::size_t i = 0; i < ops.size(); ++i) {
        p.operators.push_back(io::parse_operator(ops[i], io::item("operators", i), p.dim));
    }
    if (j.contains("domain")) p.domain = io::parse_set(j["domain"], "domain", p.dim);
    if (j.contains("anchor")) p.config.anchor = io::as_vector(j["anchor"], "anchor", p.dim);

    if (j.contains("schedule")) {
        const json& s = j["schedule"];
        io::require_object(s, "schedule");
        io::reject_unknown_keys(s, "schedule", {"alpha", "beta"});
        Schedule sched;
        sched.alpha = io::parse_rule(io::field(s, "alpha", "schedule"), "schedule.alpha");
        if (s.contains("beta")) {
            sched.beta = io::parse_rule(s["beta"], "schedule.beta");
        } else if (p.scheme == Scheme::ProjectedHalpern) {
            throw config_error("schedule.beta", "required by projected_halpern");
        }
        p.schedule = std::move(sched);
    }

    const json& run = io::field(j, "run", "");
    io::require_object(run, "run");
    io::reject_unknown_keys(run, "run",
                            {"initial", "max_iters", "residual_tol", "trace_every", "tie_tolerance"});
    p.config.initial = io::as_vector(io::field(run, "initial", "run"), "run.initial", p.dim);
    if (run.contains("max_iters")) p.config.max_iters = io::as_count(run["max_iters"], "run.max_iters");
    if (run.contains("residual_tol")) {
        p.config.residual_tol = io::as_real(run["residual_tol"], "run.residual_tol");
    }
    if (run.contains("trace_every")) {
        p.config.trace_every = io::as_count(run["trace_every"], "run.trace_every");
    }
    if (run.contains("tie_tolerance")) {
        p.config.tie_tolerance = io::as_real(run["tie_tolerance"], "run.tie_tolerance");
    }
    if (j.contains("known_solution")) {
        p.known_solution = io::as_vector(j["known_solution"], "known_solution", p.dim);
    }

    validate_problem(p, opts);
    return p;
}

inline std::string serialize_problem(const Problem& p) {
    using io::json;
    json j;
    if (!p.name.empty()) j["name"] = p.name;
    j["dim"] = p.dim;
    j["scheme"] = to_string(p.scheme);
    if (p.config.anchor) j["anchor"] = p.config.anchor->values();
    if (p.domain) j["domain"] = io::set_to_json(*p.domain);
    json ops = json::array();
    for (const auto& op : p.operators) ops.push_back(io::operator_to_json(op));
    j["operators"] = ops;
    if (p.schedule) {
        j["schedule"] = {{"alpha", io::rule_to_json(p.schedule->alpha)},
                         {"beta", io::rule_to_json(p.schedule->beta)}};
    }
    j["run"] = {{"initial", p.config.initial.values()},
                {"max_iters", p.config.max_iters},
                {"residual_tol", p.config.residual_tol},
                {"trace_every", p.config.trace_every},
                {"tie_tolerance", p.config.tie_tolerance}};
    if (p.known_solution) j["known_solution"] = p.known_solution->values();
    return j.dump(2) + "\n";
}

/// Structural equality of everything a problem file can express.
inline bool same_problem(const Problem& a, const Problem& b) {
    return a.name == b.name && a.dim == b.dim && a.scheme == b.scheme &&
           a.operators == b.operators && a.domain == b.domain && a.schedule == b.schedule &&
           a.config.anchor == b.config.anchor && a.config.initial == b.config.initial &&
           a.config.max_iters == b.config.max_iters &&
           a.config.residual_tol == b.config.residual_tol &&
           a.config.trace_every == b.config.trace_every &&
           a.config.tie_tolerance == b.config.tie_tolerance &&
           a.known_solution == b.known_solution;
}

/// Sets whose intersection is the problem's target set F (with the domain
/// for projected_halpern), or nothing when the family is not reducible.
inline std::optional<std::vector<ConvexSet>> oracle_sets(const Problem& p) {
    return oracle::family_fixed_point_sets(p.operators, p.domain);
}

/// Runs the configured scheme. Problem metadata is attached to the trace.
inline RunResult solve(const Problem& p, ThreadPool* pool = nullptr) {
    RunResult r;
    switch (p.scheme) {
    case Scheme::ProjectedHalpern:
        r = projected_halpern(p.operators, *p.domain, *p.schedule, p.config, pool);
        break;
    case Scheme::Halpern: r = halpern(p.operators, *p.schedule, p.config, pool); break;
    case Scheme::Picard: r = picard(p.operators, p.config, pool); break;
    }
    auto& md = r.trace.metadata;
    md.emplace_back("problem", p.name);
    md.emplace_back("scheme", to_string(p.scheme));
    md.emplace_back("dim", std::to_string(p.dim));
    md.emplace_back("operators", std::to_string(p.operators.size()));
    return r;
}

} // namespace parfix
