// Command-line front end: solve | check-subsolution | subslope | verify.
//
// Exit codes: 0 success, 1 verdict/check failed, 2 usage or config error,
// 3 monitor breach or path failure, 4 subsolution precondition rejected.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "subslope/acceptance.hpp"
#include "subslope/config.hpp"
#include "subslope/errors.hpp"
#include "subslope/field_io.hpp"
#include "subslope/parallel.hpp"

namespace fs = std::filesystem;
using namespace subslope;

namespace {

constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitPath = 3;
constexpr int kExitNotSubsolution = 4;

struct Common {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
};

constexpr std::string_view kBuiltinPrefix = "builtin:";

ProblemSpec load(const Common& c) {
    ProblemSpec spec;
    if (std::string_view(c.config).starts_with(kBuiltinPrefix)) {
        const std::string name = c.config.substr(kBuiltinPrefix.size());
        const auto& all = builtin_configs();
        const auto it = all.find(name);
        if (it == all.end()) throw ConfigError("no builtin config named '" + name + "'");
        spec = parse_config(it->second, ".", name);
    } else {
        spec = load_config(c.config);
    }
    if (c.seed) spec.trials.seed = c.seed;
    return spec;
}

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
}

double active_spacing(const GridGeometry& g) {
    double dx = 0.0;
    for (int c = 0; c < g.real_dims(); ++c)
        if (g.active(c)) dx = std::max(dx, g.spacing(c));
    return dx;
}

int cmd_solve(const Common& c) {
    const ProblemSpec spec = load(c);
    const Problem p = instantiate(spec);
    if (!c.out.empty()) fs::create_directories(c.out);

    PathResult res = [&] {
        try {
            return run_path(p.op, p.omega, p.chi, p.h, p.u_bar, p.u_sub, p.path);
        } catch (const MonitorBreach& e) {
            if (!c.out.empty()) write_text(fs::path(c.out) / "monitor.csv", e.log());
            throw;
        }
    }();

    const std::vector<ScalarField> trials = make_trials(p);
    const AttainedSlopeReport rep =
        verify_attained_slope(res, p.op, p.omega, p.chi, p.h, trials, p.path.newton_tol, 1e-6);
    const double sigma_trial = std::min(rep.min_trial_slope, max_slope(p.op, p.omega, p.chi, p.h, res.solution()));

    int total_newton = 0;
    for (const MonitorRow& row : res.log) total_newton += row.newton_iters;

    std::ostringstream s;
    s << "problem " << spec.name << "\n"
      << "operator " << p.op.name() << "\n"
      << "grid";
    for (int n : p.geometry->shape()) s << ' ' << n;
    s << "\n"
      << "c_bar " << g17(res.c_bar) << "\n"
      << "delta " << g17(res.delta) << "\n"
      << "sigma_lower " << g17(res.sigma_lower) << "\n"
      << "sigma_trial " << g17(sigma_trial) << "\n"
      << "c_1 " << g17(res.final_state.c) << "\n"
      << "residual " << g17(res.final_state.diagnostics.residual) << "\n"
      << "steps " << res.log.size() << "\n"
      << "newton_iters " << total_newton << "\n"
      << "xi_min " << g17(res.final_state.diagnostics.xi_min) << "\n"
      << "oscillation " << g17(rep.oscillation) << "\n"
      << "trials " << rep.admissible_trials << " admissible of " << trials.size() << "\n"
      << "attained_slope " << (rep.all_pass() ? "pass" : "FAIL") << "\n";

    bool ok = rep.all_pass();
    if (p.c_expected) {
        const double dx = active_spacing(*p.geometry);
        const double tol = 1e-6 + 5.0 * dx * dx;
        const double diff = std::abs(res.final_state.c - *p.c_expected);
        s << "c_expected " << g17(*p.c_expected) << " |diff| " << g17(diff) << " tol " << g17(tol)
          << (diff <= tol ? " pass" : " FAIL") << "\n";
        ok = ok && diff <= tol;
    }
    std::cout << s.str();

    if (!c.out.empty()) {
        const fs::path dir(c.out);
        write_text(dir / "summary.txt", s.str());
        write_text(dir / "monitor.csv", monitor_csv(res.log));
        const ScalarField phi = sup_normalized(res.final_state.phi);
        write_scalar_raw(dir / "phi.bin", phi);
        write_scalar_csv(dir / "phi.csv", phi);
        write_scalar_raw(dir / "u.bin", res.solution());
    }
    return ok ? 0 : kExitCheckFailed;
}

int cmd_check(const Common& c, std::optional<double> shift) {
    const ProblemSpec spec = load(c);
    const Problem p = instantiate(spec);
    const LambdaField lambda = lambda_of(p.omega, p.chi, p.u_sub);
    const double c_bar =
        (operator_field(p.op, lambda_of(p.omega, p.chi, p.u_bar), p.geometry) - p.h).max();
    const double used = shift.value_or(0.0);

    const SubsolutionCheck chk = is_c_subsolution(p.op, lambda, p.h, used);
    std::cout << "operator " << p.op.name() << "\n"
              << "shift " << g17(used) << "\n"
              << "margin_min " << g17(chk.min_margin) << " at grid point " << chk.argmin << "\n"
              << "margin_mean " << g17(chk.mean_margin) << "\n"
              << "verdict " << (chk.is_subsolution ? "subsolution" : "not a subsolution") << "\n";

    const SubsolutionCheck path_chk = is_c_subsolution(p.op, lambda, p.h, c_bar);
    std::cout << "c_bar " << g17(c_bar) << "\n"
              << "path_margin " << g17(path_chk.min_margin) << " at grid point " << path_chk.argmin << "\n";

    if (p.op.kind() == OperatorSpec::Kind::Dhym) {
        ScalarField shifted = p.h;
        shifted += used;
        const bool direct = dhym_subsolution_criterion(lambda, shifted);
        std::cout << "dhym_criterion " << (direct ? "subsolution" : "not a subsolution") << "\n"
                  << "routes " << (direct == chk.is_subsolution ? "agree" : "DISAGREE") << "\n";
        if (direct != chk.is_subsolution) return kExitCheckFailed;
    }
    return chk.is_subsolution ? 0 : kExitCheckFailed;
}

int cmd_subslope(const Common& c) {
    const ProblemSpec spec = load(c);
    const Problem p = instantiate(spec);
    std::vector<ScalarField> trials{ScalarField(p.geometry, 0.0)};
    for (ScalarField& t : make_trials(p)) trials.push_back(std::move(t));
    const SubslopeBracket b = subslope_bracket(p.op, p.omega, p.chi, p.h, trials);
    std::cout << "sigma_lower " << g17(b.lower) << "\n"
              << "sigma_trial " << g17(b.upper) << "\n"
              << "trials " << b.admissible << " admissible of " << b.trials << "\n";
    return 0;
}

std::vector<std::string> split_suite(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

int cmd_verify(const std::optional<std::string>& suite, std::optional<std::uint64_t> seed, bool corrupt) {
    std::vector<std::string> names = criterion_names();
    if (suite) {
        names = split_suite(*suite);
        if (names.empty()) {
            std::cerr << "verify: --suite selects nothing; choose from";
            for (const auto& n : criterion_names()) std::cerr << ' ' << n;
            std::cerr << "\n";
            return kExitUsage;
        }
        for (const auto& n : names) {
            if (std::find(criterion_names().begin(), criterion_names().end(), n) == criterion_names().end()) {
                std::cerr << "verify: unknown suite '" << n << "'\n";
                return kExitUsage;
            }
        }
    }
    SuiteOptions opts;
    if (seed) opts.seed = *seed;
    opts.corrupt_gradient = corrupt;
    bool ok = true;
    for (const auto& n : names) {
        const CriterionResult r = run_criterion(n, opts);
        std::cout << format_result(r) << std::endl;
        ok = ok && r.pass;
    }
    return ok ? 0 : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sub-slope and continuity solver for eigenvalue equations on flat tori"};
    app.require_subcommand(1);
    unsigned threads = 1;
    app.add_option("--threads", threads, "worker threads for per-point loops")->check(CLI::Range(1u, 256u));

    Common common;
    std::optional<std::uint64_t> seed;
    auto add_common = [&](CLI::App* sub, bool out) {
        sub->add_option("--config", common.config, "config file, or builtin:<name>")->required();
        sub->add_option("--seed", seed, "override the [trials] seed");
        if (out) sub->add_option("--out", common.out, "directory for CSV logs and raw fields");
    };

    CLI::App* solve = app.add_subcommand("solve", "run the continuity path and write phi, c_1 and the monitor log");
    add_common(solve, true);

    CLI::App* check = app.add_subcommand("check-subsolution", "test u_sub against f_inf > h + shift");
    add_common(check, false);
    std::optional<double> shift;
    check->add_option("--shift", shift, "constant added to h (default 0)");

    CLI::App* slope = app.add_subcommand("subslope", "bracket the sub-slope with the trial ensemble");
    add_common(slope, false);

    CLI::App* verify = app.add_subcommand("verify", "run the oracle and property suite");
    std::optional<std::string> suite;
    bool corrupt = false;
    verify->add_option("--suite", suite, "comma-separated criteria (default: all)");
    verify->add_option("--seed", seed, "seed for random samples");
    verify->add_flag("--corrupt-gradient", corrupt)->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }
    set_thread_count(threads);
    common.seed = seed;

    try {
        if (*solve) return cmd_solve(common);
        if (*check) return cmd_check(common, shift);
        if (*slope) return cmd_subslope(common);
        if (*verify) return cmd_verify(suite, seed, corrupt);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NotSubsolution& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNotSubsolution;
    } catch (const MonitorBreach& e) {
        std::cerr << "error: " << e.what() << "\n" << e.log();
        return kExitPath;
    } catch (const PathFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPath;
    } catch (const NoAdmissibleTrial& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCheckFailed;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCheckFailed;
    }
    return 0;
}
