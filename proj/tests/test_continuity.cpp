#include <doctest.h>

#include <cmath>
#include <random>

#include "subslope/config.hpp"
#include "subslope/continuity.hpp"
#include "subslope/errors.hpp"
#include "subslope/parallel.hpp"
#include "subslope/verification.hpp"

using namespace subslope;

namespace {

Problem builtin(const std::string& name) {
    return instantiate(parse_config(builtin_configs().at(name), ".", name));
}

PathContext context(const Problem& p) {
    return PathContext(p.op, p.omega, p.chi, p.h, p.u_bar, p.u_sub, p.path);
}

}  // namespace

TEST_CASE("linearization vanishes on zero and constants") {
    for (const char* name : {"quotient21_n2", "gradient_term_n1", "manufactured_dhym_n2"}) {
        const Problem p = builtin(name);
        const ScalarField u = random_admissible_trials(p.op, p.omega, p.chi, 1, 3).front();
        const HermitianField base = assemble_omega_u(p.omega, u, *p.geometry);
        for (double c : {0.0, 1.0, 42.5}) {
            const ScalarField l = linearized_apply(p.op, *p.geometry, p.chi, base, ScalarField(p.geometry, c));
            for (double v : l.values()) CHECK(v == 0.0);
        }
    }
}

TEST_CASE("linearization matches directional finite differences") {
    for (const char* name : {"generic_quotient_n1", "gradient_term_n1", "quotient21_n2", "manufactured_dhym_n2"}) {
        const Problem p = builtin(name);
        const auto fields = random_admissible_trials(p.op, p.omega, p.chi, 2, 17, 3, 0.5);
        CHECK(fd_directional_check(p.op, p.omega, p.chi, fields[0], fields[1], 1e-6) <= 1e-5);
        CHECK(fd_directional_check(p.op, p.omega, p.chi, fields[0], ScalarField(p.geometry, 0.0)) == 0.0);
        CHECK(fd_directional_check(p.op, p.omega, p.chi, fields[0], ScalarField(p.geometry, 2.0)) < 1e-6);
    }
}

TEST_CASE("sparse assembly agrees with the matrix-free apply") {
    const Problem p = builtin("quotient21_n2");
    const auto f = random_admissible_trials(p.op, p.omega, p.chi, 2, 23);
    const HermitianField base = assemble_omega_u(p.omega, f[0], *p.geometry);
    const auto l = assemble_linearization(linearization_coefficients(p.op, base, p.chi), p.geometry,
                                          form_stencil(p.geometry));
    const ScalarField direct = linearized_apply(p.op, *p.geometry, p.chi, base, f[1]);
    Eigen::VectorXd psi(static_cast<Eigen::Index>(f[1].size()));
    for (std::size_t i = 0; i < f[1].size(); ++i) psi[static_cast<Eigen::Index>(i)] = f[1][i];
    const Eigen::VectorXd lp = l * psi;
    for (std::size_t i = 0; i < direct.size(); ++i)
        CHECK(std::abs(lp[static_cast<Eigen::Index>(i)] - direct[i]) <= 1e-10 * (1 + std::abs(direct[i])));
}

TEST_CASE("Newton step structure") {
    const Problem p = builtin("generic_quotient_n1");
    const PathContext ctx = context(p);
    ContinuityState st{0.0, ScalarField(p.geometry, 0.0), 0.0, 0, {}, {}};

    // zero residual: h_t equal to F(u_bar + phi) - c
    const ScalarField f0 = operator_field(p.op, lambda_of(p.omega, p.chi, p.u_bar), p.geometry);
    auto [d0, c0] = newton_step(ctx, st, f0);
    CHECK(c0 == 0.0);
    for (double v : d0.values()) CHECK(v == 0.0);

    // constant residual r is absorbed entirely by the constant
    const double r = 0.125;
    ScalarField shifted = f0;
    shifted += -r;
    auto [d1, c1] = newton_step(ctx, st, shifted);
    CHECK(c1 == doctest::Approx(r).epsilon(1e-12));
    for (double v : d1.values()) CHECK(std::abs(v) <= 1e-12);
}

TEST_CASE("Newton converges quadratically on the manufactured problem") {
    const Problem p = builtin("manufactured_quotient_n1");
    const PathContext ctx = context(p);
    const ContinuityState start{0.0, ScalarField(p.geometry, 0.0), 0.0, 0, {}, {}};
    const ContinuityState done = solve_at_t(ctx, start, 1.0);
    const auto& r = done.residual_history;
    REQUIRE(r.size() >= 4);
    CHECK(done.diagnostics.residual <= p.path.newton_tol);
    int checked = 0;
    for (std::size_t k = r.size() - 1; k >= 1 && checked < 3; --k) {
        if (r[k] < 1e-13) continue;  // at the rounding floor
        CHECK(r[k] <= 10.0 * r[k - 1] * r[k - 1]);
        ++checked;
    }
    CHECK(checked >= 1);
}

TEST_CASE("path anchor at t = 0 needs no iterations") {
    const Problem p = builtin("generic_quotient_n1");
    const PathContext ctx = context(p);
    const ContinuityState s = solve_at_t(ctx, ContinuityState{0.0, ScalarField(p.geometry, 0.0), 0.0, 0, {}, {}}, 0.0);
    CHECK(s.newton_iters == 0);
    CHECK(s.diagnostics.residual == 0.0);
    CHECK(s.c == 0.0);
}

TEST_CASE("warm and cold starts converge to the same state") {
    const Problem p = builtin("quotient21_n2");
    const PathContext ctx = context(p);
    const ContinuityState zero{0.0, ScalarField(p.geometry, 0.0), 0.0, 0, {}, {}};
    const ContinuityState warm_from = solve_at_t(ctx, zero, 0.4);
    const ContinuityState warm = solve_at_t(ctx, warm_from, 0.5);
    const ContinuityState cold = solve_at_t(ctx, zero, 0.5);
    CHECK(std::abs(warm.c - cold.c) <= 1e-8);
    CHECK(max_abs_diff(warm.phi, cold.phi) <= 1e-8);
}

TEST_CASE("run_path on the manufactured problem") {
    const Problem p = builtin("manufactured_quotient_n1");
    std::vector<double> ts;
    const PathResult res = run_path(p.op, p.omega, p.chi, p.h, p.u_bar, p.u_sub, p.path,
                                    [&](const ContinuityState& s) { ts.push_back(s.t); });
    CHECK(ts.front() == 0.0);
    CHECK(ts.back() == 1.0);
    CHECK(res.log.front().c == 0.0);
    CHECK(res.log.front().c <= res.log.front().c_upper);
    const double dx = p.geometry->spacing(0);
    CHECK(std::abs(res.final_state.c - *p.c_expected) <= 1e-6 + 5 * dx * dx);
    CHECK(res.final_state.diagnostics.xi_min > 0.0);

    const ScalarField gap = operator_field(p.op, lambda_of(p.omega, p.chi, res.solution()), p.geometry) - p.h;
    CHECK(gap.max() - gap.min() <= 10 * p.path.newton_tol);
    CHECK(std::abs(gap.max() - res.final_state.c) <= p.path.newton_tol);

    // the solution itself is a trial attaining c_1
    const AttainedSlopeReport self =
        verify_attained_slope(res, p.op, p.omega, p.chi, p.h, {res.solution()}, p.path.newton_tol);
    CHECK(self.all_pass());
    CHECK(std::abs(self.min_trial_slope - self.c1) <= p.path.newton_tol);

    const ScalarField sup = sup_normalized(res.final_state.phi);
    CHECK(sup.max() == 0.0);
}

TEST_CASE("sampled manufactured solution is recovered to solver precision") {
    const Problem p = builtin("gradient_term_n1");
    const ScalarField u_star = TrigSeries::parse("0.2*cos(x1) + 0.1*sin(2*x1)", 1).sample(p.geometry);
    const ManufacturedProblem m = manufactured_problem(p.op, p.omega, p.chi, u_star, 0.3);
    const ScalarField zero(p.geometry, 0.0);
    const PathResult res = run_path(p.op, p.omega, p.chi, m.h, zero, zero, p.path);
    CHECK(std::abs(res.final_state.c - 0.3) <= 1e-9);
    ScalarField diff = res.solution() - u_star;
    diff += -diff.mean();
    for (double v : diff.values()) CHECK(std::abs(v) <= 1e-8);
}

TEST_CASE("stationary path stays at zero") {
    const Problem p = builtin("stationary");
    const PathResult res = run_path(p.op, p.omega, p.chi, p.h, p.u_bar, p.u_sub, p.path, [](const ContinuityState& s) {
        CHECK(s.c == 0.0);
        for (double v : s.phi.values()) CHECK(v == 0.0);
    });
    const AttainedSlopeReport rep =
        verify_attained_slope(res, p.op, p.omega, p.chi, p.h, {ScalarField(p.geometry, 0.0)}, p.path.newton_tol);
    CHECK(rep.c1 == 0.0);
    CHECK(rep.min_trial_slope == 0.0);
}

TEST_CASE("adjoint kernel is positive and normalized") {
    for (const char* name : {"generic_quotient_n1", "gradient_term_n1", "quotient21_n2"}) {
        const Problem p = builtin(name);
        const ScalarField u = random_admissible_trials(p.op, p.omega, p.chi, 1, 31).front();
        const AdjointKernel k = adjoint_kernel(p.op, p.omega, p.chi, u);
        CHECK(k.xi_min > 0.0);
        CHECK(k.residual < 1e-10);
        const std::vector<double> w = volume_weights(p.chi);
        double total = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) total += k.xi[i] * w[i];
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("constant chi gives a constant kernel for the self-adjoint case") {
    const Problem p = builtin("stationary");
    const AdjointKernel k = adjoint_kernel(p.op, p.omega, p.chi, ScalarField(p.geometry, 0.0));
    for (double v : k.xi.values()) CHECK(v == doctest::Approx(k.xi[0]).epsilon(1e-12));
    CHECK(k.xi_min == doctest::Approx(k.xi[0]).epsilon(1e-12));
}

TEST_CASE("non-subsolution is rejected with the failing point") {
    const Problem p = builtin("reject_not_subsolution");
    try {
        run_path(p.op, p.omega, p.chi, p.h, p.u_bar, p.u_sub, p.path);
        FAIL("expected NotSubsolution");
    } catch (const NotSubsolution& e) {
        const std::string msg = e.what();
        CHECK(msg.find("grid point 0") != std::string::npos);
        CHECK(msg.find("margin") != std::string::npos);
    }

}

TEST_CASE("path configuration is validated") {
    PathConfig c;
    c.t_step_min = 0.5;
    c.t_step_init = 0.1;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = PathConfig{};
    c.damping = 1.0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
    c = PathConfig{};
    c.newton_tol = 0.0;
    CHECK_THROWS_AS(c.validate(), InvalidArgument);
}

TEST_CASE("monitor logs are identical across runs and thread counts") {
    const Problem p = builtin("quotient21_n2");
    set_thread_count(1);
    const std::string a = monitor_csv(run_path(p.op, p.omega, p.chi, p.h, p.u_bar, p.u_sub, p.path).log);
    set_thread_count(3);
    const std::string b = monitor_csv(run_path(p.op, p.omega, p.chi, p.h, p.u_bar, p.u_sub, p.path).log);
    set_thread_count(1);
    CHECK(a == b);
    CHECK(a.rfind("t,c_t,residual,newton_iters,min_cone_margin,subsolution_margin,c_upper_bound\n", 0) == 0);
}
