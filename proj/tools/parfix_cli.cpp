// parfix: run, verify and schedule-check common fixed point problems.
//
// Exit codes
//   0  run converged / verify gap within tolerance / schedule valid
//   1  configuration error (unreadable or invalid problem, invalid schedule)
//   2  run stopped at max_iters / verify gap above tolerance
//   3  verify: oracle unavailable for this operator family
//   4  numerical failure (non-finite iterate)

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "parfix/parfix.hpp"

namespace {

using parfix::Problem;
using parfix::RunResult;
using parfix::Scheme;

enum Exit : int {
    exit_ok = 0,
    exit_config = 1,
    exit_not_met = 2,
    exit_oracle_unavailable = 3,
    exit_numerical = 4,
};

struct RunFlags {
    std::string problem_path;
    std::optional<std::size_t> max_iters;
    std::optional<double> tol;
    std::optional<std::size_t> trace_every;
    std::string trace_out;
    std::string summary_out;
    std::optional<double> verify_tol;
    std::size_t threads = parfix::hardware_threads();
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parfix::config_error("", "cannot read problem file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Problem load(const RunFlags& f, const parfix::LoadOptions& opts = {}) {
    Problem p = parfix::load_problem(read_file(f.problem_path), opts);
    if (f.max_iters) p.config.max_iters = *f.max_iters;
    if (f.tol) p.config.residual_tol = *f.tol;
    if (f.trace_every) p.config.trace_every = *f.trace_every;
    parfix::validate_problem(p, opts);
    return p;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw parfix::config_error("", "cannot write '" + path + "'");
    out << text;
}

void write_trace(const std::string& path, const parfix::RunTrace& trace) {
    if (path.empty()) return;
    std::ostringstream ss;
    parfix::write_trace_csv(ss, trace);
    write_text(path, ss.str());
}

int exit_for(const RunResult& r) {
    switch (r.stop_reason) {
    case parfix::StopReason::ResidualMet: return exit_ok;
    case parfix::StopReason::MaxIters: return exit_not_met;
    case parfix::StopReason::NumericalFailure: return exit_numerical;
    }
    return exit_config;
}

int cmd_run(const RunFlags& f) {
    const Problem p = load(f);
    parfix::ThreadPool pool(f.threads);
    const RunResult r = parfix::solve(p, &pool);

    auto summary = parfix::summary_json(r);
    if (p.scheme == Scheme::Picard) {
        // Certificate for the Picard limit: distance of the final iterate to F.
        if (const auto sets = parfix::oracle_sets(p)) {
            try {
                const auto proj = parfix::oracle::project_intersection(*sets, r.final_iterate);
                summary["oracle_certificate"] = parfix::distance(r.final_iterate, proj);
            } catch (const parfix::oracle_error&) {
                summary["oracle_certificate"] = nullptr;
            }
        }
    }
    write_trace(f.trace_out, r.trace);
    write_text(f.summary_out, summary.dump(2) + "\n");
    return exit_for(r);
}

int cmd_verify(const RunFlags& f) {
    Problem p = load(f);
    const auto sets = parfix::oracle_sets(p);
    if (!sets) {
        std::cerr << "parfix verify: oracle unavailable: the fixed point set of this operator "
                     "family is not described by projectable sets\n";
        return exit_oracle_unavailable;
    }

    nlohmann::json report;
    report["scheme"] = parfix::to_string(p.scheme);
    const bool halpern_like = p.scheme != Scheme::Picard;
    const double tol = f.verify_tol.value_or(halpern_like ? 1e-3 : 1e-6);
    report["verify_tol"] = tol;

    std::optional<parfix::Vector> target;
    try {
        if (halpern_like) {
            target = parfix::oracle::project_intersection(*sets, *p.config.anchor);
            const parfix::Vector t = *target;
            p.config.trace_distance = [t](const parfix::Vector& x) { return parfix::distance(x, t); };
        } else {
            const auto s = *sets;
            p.config.trace_distance = [s](const parfix::Vector& x) {
                return parfix::distance(x, parfix::oracle::project_intersection(s, x));
            };
            p.config.snapshots = parfix::SnapshotPolicy::every(p.config.trace_every);
        }
    } catch (const parfix::oracle_error& e) {
        std::cerr << "parfix verify: oracle unavailable: " << e.what() << '\n';
        return exit_oracle_unavailable;
    }

    parfix::ThreadPool pool(f.threads);
    RunResult r;
    try {
        r = parfix::solve(p, &pool);
    } catch (const parfix::oracle_error& e) {
        std::cerr << "parfix verify: oracle unavailable: " << e.what() << '\n';
        return exit_oracle_unavailable;
    }
    if (r.stop_reason == parfix::StopReason::NumericalFailure) {
        std::cerr << "parfix verify: numerical failure at iteration " << r.iterations_used << '\n';
        write_trace(f.trace_out, r.trace);
        return exit_numerical;
    }

    double gap = 0.0;
    try {
        if (halpern_like) {
            gap = parfix::distance(r.final_iterate, *target);
            report["target"] = target->values();
        } else {
            const auto proj = parfix::oracle::project_intersection(*sets, r.final_iterate);
            gap = parfix::distance(r.final_iterate, proj);
            // Diagnostic only: how much P_F(x_n) still moves over the sampled tail.
            const auto& snaps = r.trace.snapshots;
            const std::size_t tail = std::min<std::size_t>(snaps.size(), 5);
            double spread = 0.0;
            for (std::size_t i = snaps.size() - tail; i < snaps.size(); ++i) {
                const auto pi = parfix::oracle::project_intersection(*sets, snaps[i].x);
                spread = std::max(spread, parfix::distance(pi, proj));
            }
            report["projection_tail_spread"] = spread;
            report["limit_projection"] = proj.values();
        }
    } catch (const parfix::oracle_error& e) {
        std::cerr << "parfix verify: oracle unavailable: " << e.what() << '\n';
        return exit_oracle_unavailable;
    }

    report["gap"] = gap;
    report["passed"] = gap <= tol;
    report["run"] = parfix::summary_json(r);
    write_trace(f.trace_out, r.trace);
    write_text(f.summary_out, report.dump(2) + "\n");
    return gap <= tol ? exit_ok : exit_not_met;
}

int cmd_schedule_check(const RunFlags& f) {
    const Problem p = load(f, parfix::LoadOptions{.enforce_schedule = false});
    const parfix::Schedule sched = p.schedule.value_or(parfix::Schedule{});
    const auto report = parfix::validate_schedule(sched, p.scheme);
    std::ostringstream out;
    out << "scheme: " << parfix::to_string(p.scheme) << '\n';
    for (const auto& c : report.checks) {
        out << c.condition << ": " << parfix::to_string(c.status) << " (" << c.detail << ")\n";
    }
    out << "overall: " << (report.ok() ? "pass" : "fail") << '\n';
    write_text(f.summary_out, out.str());
    return report.ok() ? exit_ok : exit_config;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parallel selection fixed point solver"};
    app.require_subcommand(1);

    RunFlags flags;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("problem", flags.problem_path, "Problem file (JSON)")->required();
        sub->add_option("--summary-out", flags.summary_out, "Summary/report file (default stdout)");
        sub->add_option("--threads", flags.threads, "Worker threads for operator evaluation")
            ->check(CLI::PositiveNumber);
    };
    auto add_run_flags = [&](CLI::App* sub) {
        sub->add_option("--max-iters", flags.max_iters, "Override run.max_iters");
        sub->add_option("--tol", flags.tol, "Override run.residual_tol");
        sub->add_option("--trace-every", flags.trace_every, "Override run.trace_every");
        sub->add_option("--trace-out", flags.trace_out, "Trace CSV file ('-' for stdout)");
    };

    auto* run = app.add_subcommand("run", "Run the configured scheme");
    add_common(run);
    add_run_flags(run);

    auto* verify = app.add_subcommand("verify", "Run and compare the limit against the oracle");
    add_common(verify);
    add_run_flags(verify);
    verify->add_option("--verify-tol", flags.verify_tol,
                       "Gap tolerance (default 1e-3 for Halpern schemes, 1e-6 for Picard)");

    auto* sched = app.add_subcommand("schedule-check", "Report schedule validity per condition");
    add_common(sched);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : exit_config;
    }

    try {
        if (run->parsed()) return cmd_run(flags);
        if (verify->parsed()) return cmd_verify(flags);
        return cmd_schedule_check(flags);
    } catch (const parfix::config_error& e) {
        std::cerr << "parfix: configuration error: " << e.what() << '\n';
        return exit_config;
    } catch (const parfix::error& e) {
        std::cerr << "parfix: " << e.what() << '\n';
        return exit_config;
    }
}
