#pragma once

// Step-size schedules {alpha_n}, {beta_n} (n >= 1) and their validity gate.
// Divergence and vanishing of alpha are judged from the declared family,
// never from samples.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <string>
#include <variant>
#include <vector>

#include "parfix/errors.hpp"

namespace parfix {

enum class Scheme { ProjectedHalpern, Halpern, Picard };

inline const char* to_string(Scheme s) noexcept {
    switch (s) {
    case Scheme::ProjectedHalpern: return "projected_halpern";
    case Scheme::Halpern: return "halpern";
    case Scheme::Picard: return "picard";
    }
    return "unknown";
}

struct ConstantRule {
    double value = 0.5;
    friend bool operator==(const ConstantRule&, const ConstantRule&) = default;
};

/// a / (n + c)^p
struct PowerLawRule {
    double a = 1.0;
    double c = 1.0;
    double p = 1.0;
    friend bool operator==(const PowerLawRule&, const PowerLawRule&) = default;
};

/// Explicit values for n = 1, 2, ...; the last value repeats forever.
/// Its asymptotics are not declared, so it cannot certify alpha conditions.
struct SequenceRule {
    std::vector<double> values;
    friend bool operator==(const SequenceRule&, const SequenceRule&) = default;
};

using StepRule = std::variant<ConstantRule, PowerLawRule, SequenceRule>;

inline double step_value(const StepRule& rule, std::size_t n) {
    if (n == 0) throw config_error("", "schedules are indexed from n = 1");
    if (const auto* c = std::get_if<ConstantRule>(&rule)) return c->value;
    if (const auto* p = std::get_if<PowerLawRule>(&rule)) {
        return p->a / std::pow(static_cast<double>(n) + p->c, p->p);
    }
    const auto& s = std::get<SequenceRule>(rule);
    if (s.values.empty()) throw config_error("", "sequence schedule is empty");
    return s.values[std::min(n, s.values.size()) - 1];
}

inline const char* family_name(const StepRule& rule) noexcept {
    static constexpr const char* names[] = {"constant", "power", "sequence"};
    return names[rule.index()];
}

struct Schedule {
    StepRule alpha = PowerLawRule{1.0, 1.0, 1.0};
    StepRule beta = ConstantRule{0.5};

    double alpha_at(std::size_t n) const { return step_value(alpha, n); }
    double beta_at(std::size_t n) const { return step_value(beta, n); }

    friend bool operator==(const Schedule&, const Schedule&) = default;
};

enum class CheckStatus { Pass, Fail, CannotCertify, NotApplicable };

inline const char* to_string(CheckStatus s) noexcept {
    switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::CannotCertify: return "cannot_certify";
    case CheckStatus::NotApplicable: return "not_applicable";
    }
    return "unknown";
}

struct ScheduleCheck {
    std::string condition;
    CheckStatus status = CheckStatus::NotApplicable;
    std::string detail;
};

struct ScheduleReport {
    Scheme scheme = Scheme::Picard;
    std::vector<ScheduleCheck> checks;

    /// True when no applicable condition failed or was uncertifiable.
    bool ok() const {
        return std::none_of(checks.begin(), checks.end(), [](const ScheduleCheck& c) {
            return c.status == CheckStatus::Fail || c.status == CheckStatus::CannotCertify;
        });
    }

    const ScheduleCheck* find(const std::string& condition) const {
        for (const auto& c : checks)
            if (c.condition == condition) return &c;
        return nullptr;
    }
};

namespace detail {

struct RangeFacts {
    bool finite = true;
    double first = 0.0;   // value at n = 1
    double lowest = 0.0;  // inf over n >= 1
    double highest = 0.0; // sup over n >= 1
    bool monotone_ok = true;
};

// inf/sup of a rule over n >= 1, exact for each family.
inline RangeFacts range_facts(const StepRule& rule) {
    RangeFacts f;
    if (const auto* c = std::get_if<ConstantRule>(&rule)) {
        f.finite = std::isfinite(c->value);
        f.first = f.lowest = f.highest = c->value;
    } else if (const auto* p = std::get_if<PowerLawRule>(&rule)) {
        f.finite = std::isfinite(p->a) && std::isfinite(p->c) && std::isfinite(p->p);
        // (n + c) must stay positive and the sequence non-increasing.
        f.monotone_ok = f.finite && 1.0 + p->c > 0.0 && p->p >= 0.0 && p->a > 0.0;
        if (f.monotone_ok) {
            f.first = f.highest = step_value(rule, 1);
            f.lowest = p->p == 0.0 ? p->a : 0.0;
        }
    } else {
        const auto& s = std::get<SequenceRule>(rule);
        f.finite = !s.values.empty() &&
                   std::all_of(s.values.begin(), s.values.end(),
                               [](double v) { return std::isfinite(v); });
        if (f.finite) {
            f.first = s.values.front();
            f.lowest = *std::min_element(s.values.begin(), s.values.end());
            f.highest = *std::max_element(s.values.begin(), s.values.end());
        }
    }
    return f;
}

inline std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

} // namespace detail

inline ScheduleReport validate_schedule(const Schedule& schedule, Scheme scheme) {
    using detail::fmt_double;
    ScheduleReport report;
    report.scheme = scheme;
    const bool uses_alpha = scheme != Scheme::Picard;
    const bool uses_beta = scheme == Scheme::ProjectedHalpern;
    const auto na = [&](const char* name) {
        report.checks.push_back({name, CheckStatus::NotApplicable,
                                 std::string("unused by ") + to_string(scheme)});
    };

    if (uses_alpha) {
        const auto a = detail::range_facts(schedule.alpha);
        // alpha_n in (0, 1]
        if (!a.finite || !a.monotone_ok) {
            report.checks.push_back({"alpha_in_range", CheckStatus::Fail,
                                     "alpha family parameters do not produce a positive "
                                     "non-increasing sequence"});
        } else if (a.lowest < 0.0 || (a.lowest == 0.0 && !std::holds_alternative<PowerLawRule>(
                                                             schedule.alpha)) ||
                   a.highest > 1.0) {
            report.checks.push_back({"alpha_in_range", CheckStatus::Fail,
                                     "values span [" + fmt_double(a.lowest) + ", " +
                                         fmt_double(a.highest) + "], need (0, 1]"});
        } else {
            report.checks.push_back({"alpha_in_range", CheckStatus::Pass,
                                     "sup alpha_n = " + fmt_double(a.highest)});
        }

        if (const auto* p = std::get_if<PowerLawRule>(&schedule.alpha)) {
            report.checks.push_back(
                {"alpha_divergent_sum", p->p <= 1.0 ? CheckStatus::Pass : CheckStatus::Fail,
                 "power family with p = " + fmt_double(p->p) +
                     (p->p <= 1.0 ? " <= 1, sum diverges" : " > 1, sum converges")});
            report.checks.push_back(
                {"alpha_vanishing", p->p > 0.0 ? CheckStatus::Pass : CheckStatus::Fail,
                 "power family with p = " + fmt_double(p->p) +
                     (p->p > 0.0 ? " > 0, alpha_n -> 0" : " <= 0, alpha_n does not vanish")});
        } else if (const auto* c = std::get_if<ConstantRule>(&schedule.alpha)) {
            report.checks.push_back({"alpha_divergent_sum",
                                     c->value > 0.0 ? CheckStatus::Pass : CheckStatus::Fail,
                                     "constant alpha_n = " + fmt_double(c->value)});
            report.checks.push_back({"alpha_vanishing",
                                     c->value == 0.0 ? CheckStatus::Pass : CheckStatus::Fail,
                                     "constant alpha_n = " + fmt_double(c->value) +
                                         " does not vanish"});
        } else {
            report.checks.push_back({"alpha_divergent_sum", CheckStatus::CannotCertify,
                                     "sequence family declares no asymptotics"});
            report.checks.push_back({"alpha_vanishing", CheckStatus::CannotCertify,
                                     "sequence family declares no asymptotics"});
        }
    } else {
        na("alpha_in_range");
        na("alpha_divergent_sum");
        na("alpha_vanishing");
    }

    if (uses_beta) {
        const auto b = detail::range_facts(schedule.beta);
        if (!b.finite || !b.monotone_ok) {
            report.checks.push_back({"beta_in_range", CheckStatus::Fail,
                                     "beta family parameters do not produce a positive "
                                     "non-increasing sequence"});
            report.checks.push_back({"beta_inf_positive", CheckStatus::Fail, "invalid family"});
            report.checks.push_back({"beta_sup_below_one", CheckStatus::Fail, "invalid family"});
        } else {
            const bool in_range = b.highest < 1.0 && (b.lowest > 0.0 || (b.lowest == 0.0 &&
                                  std::holds_alternative<PowerLawRule>(schedule.beta)));
            report.checks.push_back({"beta_in_range",
                                     in_range ? CheckStatus::Pass : CheckStatus::Fail,
                                     "values span [" + fmt_double(b.lowest) + ", " +
                                         fmt_double(b.highest) + "], need (0, 1)"});
            report.checks.push_back({"beta_inf_positive",
                                     b.lowest > 0.0 ? CheckStatus::Pass : CheckStatus::Fail,
                                     "inf beta_n = " + fmt_double(b.lowest)});
            report.checks.push_back({"beta_sup_below_one",
                                     b.highest < 1.0 ? CheckStatus::Pass : CheckStatus::Fail,
                                     "sup beta_n = " + fmt_double(b.highest)});
        }
    } else {
        na("beta_in_range");
        na("beta_inf_positive");
        na("beta_sup_below_one");
    }
    return report;
}

/// Throws config_error naming the first failing condition.
inline void require_valid_schedule(const Schedule& schedule, Scheme scheme,
                                   const std::string& path = "schedule") {
    const auto report = validate_schedule(schedule, scheme);
    for (const auto& c : report.checks) {
        if (c.status == CheckStatus::Fail || c.status == CheckStatus::CannotCertify) {
            throw config_error(path, c.condition + " " + to_string(c.status) + " for " +
                                         to_string(scheme) + " (" + c.detail + ")");
        }
    }
}

} // namespace parfix
