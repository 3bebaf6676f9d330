#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "subslope/errors.hpp"
#include "subslope/forms.hpp"
#include "subslope/verification.hpp"

using namespace subslope;
using std::numbers::pi;

TEST_CASE("manufactured right-hand sides") {
    SUBCASE("zero potential gives F(omega)") {
        const GeometryPtr g = make_geometry(2, {8, 8, 1, 1});
        CMatrix w(2, 2);
        w << 2.0, Complex(0.3, 0.1), Complex(0.3, -0.1), 1.5;
        const HermitianField omega = HermitianField::constant(g, w);
        const HermitianField chi = HermitianField::identity(g);
        const OperatorSpec op = OperatorSpec::quotient(2, 2, 1);
        const ManufacturedProblem m = manufactured_problem(op, omega, chi, TrigSeries::parse("0", 2), 0.0);
        const double expected = operator_field(op, lambda_of(omega, chi, ScalarField(g, 0.0)), g)[0];
        for (double v : m.h.values()) CHECK(v == doctest::Approx(expected).epsilon(1e-14));
    }
    SUBCASE("quotient n = 1") {
        const GeometryPtr g = make_geometry(1, {32, 1});
        const HermitianField id = HermitianField::identity(g);
        const ManufacturedProblem m = manufactured_problem(OperatorSpec::quotient(1, 1, 0), id, id,
                                                           TrigSeries::parse("0.5*cos(x1)", 1), 0.25);
        CHECK(m.c == 0.25);
        for (std::size_t p = 0; p < g->size(); ++p) {
            const double x = g->coordinate(p, 0);
            CHECK(m.h[p] == doctest::Approx(std::log(1.0 - std::cos(x) / 8.0) - 0.25).epsilon(1e-13));
        }
    }
    SUBCASE("dHYM n = 2") {
        const GeometryPtr g = make_geometry(2, {16, 16, 1, 1});
        const HermitianField id = HermitianField::identity(g);
        const ManufacturedProblem m =
            manufactured_problem(OperatorSpec::dhym(2), id, id, TrigSeries::parse("0.3*cos(x1)", 2));
        for (std::size_t p = 0; p < g->size(); ++p) {
            const double x = g->coordinate(p, 0);
            CHECK(m.h[p] == doctest::Approx(std::atan(1.0 - 0.075 * std::cos(x)) + pi / 4).epsilon(1e-13));
        }
    }
}

TEST_CASE("manufactured problem errors") {
    const GeometryPtr g = make_geometry(1, {16, 1});
    const HermitianField id = HermitianField::identity(g);
    const OperatorSpec op = OperatorSpec::quotient(1, 1, 0);
    CHECK_THROWS_AS(manufactured_problem(op, id, id, TrigSeries::parse("8*cos(x1)", 1)), DomainError);
    CHECK_THROWS_AS(manufactured_problem(op, id, id, TrigSeries::parse("0.1*cos(y1)", 1)), InvalidArgument);
    CHECK_THROWS_AS(manufactured_problem(op, id, id, ScalarField(g, std::vector<double>(16, 0.0)) +
                                                         TrigSeries::parse("8*cos(x1)", 1).sample(g)),
                    DomainError);
}

TEST_CASE("discrete manufactured problem is solved exactly by its potential") {
    const GeometryPtr g = make_geometry(1, {32, 1});
    const HermitianField id = HermitianField::identity(g);
    const OperatorSpec op = OperatorSpec::quotient(1, 1, 0);
    const ScalarField u = TrigSeries::parse("0.4*cos(x1) + 0.1*sin(3*x1)", 1).sample(g);
    const ManufacturedProblem m = manufactured_problem(op, id, id, u, 0.1);
    const ScalarField back = operator_field(op, lambda_of(id, id, u), g) - m.h;
    for (double v : back.values()) CHECK(v == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("finite-difference check on trivial directions") {
    const GeometryPtr g = make_geometry(2, {8, 1, 8, 1});
    const HermitianField id = HermitianField::identity(g);
    const OperatorSpec op = OperatorSpec::dhym(2);
    const ScalarField base = TrigSeries::parse("0.2*cos(x1 + x2)", 2).sample(g);
    CHECK(fd_directional_check(op, id, id, base, ScalarField(g, 0.0)) == 0.0);
    CHECK(fd_directional_check(op, id, id, base, ScalarField(g, 3.0)) < 1e-8);
    CHECK(fd_directional_check(op, id, id, base, TrigSeries::parse("sin(x1)", 2).sample(g)) < 1e-6);
}

TEST_CASE("closed-form 2x2 pencil") {
    CMatrix g(2, 2), chi(2, 2);
    g << 3.0, 0.0, 0.0, 1.0;
    chi = CMatrix::Identity(2, 2);
    auto r = eigen_oracle_2x2(g, chi);
    CHECK(r[0] == doctest::Approx(3.0));
    CHECK(r[1] == doctest::Approx(1.0));

    g << 2.0, Complex(0.0, 1.0), Complex(0.0, -1.0), 2.0;
    r = eigen_oracle_2x2(g, chi);
    CHECK(r[0] == doctest::Approx(3.0));
    CHECK(r[1] == doctest::Approx(1.0));

    chi << 2.0, 0.0, 0.0, 4.0;
    g << 2.0, 0.0, 0.0, 2.0;
    r = eigen_oracle_2x2(g, chi);
    CHECK(r[0] == doctest::Approx(1.0));
    CHECK(r[1] == doctest::Approx(0.5));

    chi << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(eigen_oracle_2x2(g, chi), InvalidMetric);
    CHECK_THROWS_AS(eigen_oracle_2x2(CMatrix::Identity(3, 3), CMatrix::Identity(3, 3)), InvalidArgument);
}

TEST_CASE("numeric f_infinity limits") {
    RVector l(2);
    l << 1.0, 2.0;
    const auto q = f_infinity_numeric(OperatorSpec::quotient(2, 2, 1), l);
    REQUIRE(q.size() == 4);
    CHECK(q.back() == doctest::Approx(std::log(2.0)).epsilon(1e-7));
    for (std::size_t i = 1; i < q.size(); ++i) CHECK(q[i] >= q[i - 1]);

    l << 1.0, 1.0;
    const auto d = f_infinity_numeric(OperatorSpec::dhym(2), l, {1e8});
    CHECK(d.front() == doctest::Approx(3 * pi / 4).epsilon(1e-7));
}

TEST_CASE("ray search verdicts") {
    RVector l(2);
    l << 1.0, 1.0;
    const OperatorSpec dhym = OperatorSpec::dhym(2);
    CHECK(ray_search(dhym, l, 2.0).verdict == RayVerdict::Bounded);
    CHECK(ray_search(dhym, l, 3.0).verdict == RayVerdict::Unbounded);
    const RaySearch at = ray_search(dhym, l, pi / 2);
    CHECK(at.crossings[0] == 0.0);
}

TEST_CASE("random samples and trials are deterministic") {
    std::mt19937_64 a(5), b(5);
    const ConeSpec cone = ConeSpec::garding(3, 2);
    const auto sa = random_cone_samples(cone, 50, a);
    const auto sb = random_cone_samples(cone, 50, b);
    for (std::size_t i = 0; i < sa.size(); ++i) {
        CHECK(sa[i] == sb[i]);
        CHECK(cone.margin(sa[i] / std::max(1.0, sa[i].cwiseAbs().maxCoeff())) >= 0.05);
    }

    const GeometryPtr g = make_geometry(1, {32, 1});
    const HermitianField id = HermitianField::identity(g);
    const OperatorSpec op = OperatorSpec::quotient(1, 1, 0);
    const auto ta = random_admissible_trials(op, id, id, 10, 99, 3, 4.0);
    const auto tb = random_admissible_trials(op, id, id, 10, 99, 3, 4.0);
    REQUIRE(ta.size() == 10);
    for (std::size_t i = 0; i < ta.size(); ++i) {
        CHECK(max_abs_diff(ta[i], tb[i]) == 0.0);
        const LambdaField lam = lambda_of(id, id, ta[i]);
        CHECK(first_cone_violation(op, lam) == lam.size());
    }
}
