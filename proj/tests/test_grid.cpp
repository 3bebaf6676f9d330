#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "subslope/errors.hpp"
#include "subslope/field_io.hpp"
#include "subslope/forms.hpp"
#include "subslope/trig_series.hpp"
#include "subslope/verification.hpp"

using namespace subslope;
using std::numbers::pi;

namespace {

ScalarField sample(const GeometryPtr& g, const char* expr) {
    return TrigSeries::parse(expr, g->n()).sample(g);
}

CMatrix random_hermitian(int n, std::mt19937_64& rng, bool positive) {
    std::normal_distribution<double> nd;
    CMatrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = Complex(nd(rng), nd(rng));
    if (positive) return a * a.adjoint() + 0.5 * CMatrix::Identity(n, n);
    return 0.5 * (a + a.adjoint());
}

}  // namespace

TEST_CASE("geometry validates counts and spacing") {
    CHECK_THROWS_AS(make_geometry(1, {3, 1}), InvalidArgument);
    CHECK_THROWS_AS(make_geometry(1, {8}), InvalidArgument);
    CHECK_THROWS_AS(make_geometry(0, {}), InvalidArgument);
    const GeometryPtr g = make_geometry(2, {8, 1, 12, 4});
    CHECK(g->size() == 8 * 12 * 4);
    for (int c : {0, 2, 3}) CHECK(g->spacing(c) * g->shape()[c] == doctest::Approx(2 * pi));
    CHECK_FALSE(g->active(1));
    CHECK(g->shifted(0, 0, -1) == g->shifted(0, 0, 7));
}

TEST_CASE("scalar fields reject bad data and mismatched grids") {
    const GeometryPtr g = make_geometry(1, {8, 1});
    CHECK_THROWS_AS(ScalarField(g, std::vector<double>(7, 0.0)), InvalidArgument);
    CHECK_THROWS_AS(ScalarField(g, std::vector<double>(8, NAN)), InvalidArgument);
    ScalarField a(g, 1.0);
    const ScalarField b(make_geometry(1, {16, 1}), 1.0);
    CHECK_THROWS_AS(a += b, GeometryMismatch);
}

TEST_CASE("complex hessian examples") {
    const GeometryPtr g1 = make_geometry(1, {64, 1});
    const HermitianField zero = complex_hessian(ScalarField(g1, 0.0));
    for (const Complex& z : zero.raw()) CHECK(z == Complex(0.0));

    const HermitianField h = complex_hessian(sample(g1, "cos(x1)"));
    const double dx = g1->spacing(0);
    CHECK(std::abs(h(0, 0, 0).real() + 0.25) < dx * dx);
    for (std::size_t p = 0; p < g1->size(); ++p)
        CHECK(std::abs(h(p, 0, 0).real() + std::cos(g1->coordinate(p, 0)) / 4) < dx * dx);

    const GeometryPtr g2 = make_geometry(2, {32, 8, 8, 8});
    const HermitianField s = complex_hessian(sample(g2, "sin(x1)"));
    for (std::size_t p = 0; p < g2->size(); ++p) {
        CHECK(std::abs(s(p, 0, 0).real() + std::sin(g2->coordinate(p, 0)) / 4) < g2->spacing(0) * g2->spacing(0));
        CHECK(std::abs(s(p, 0, 1)) < 1e-15);
        CHECK(std::abs(s(p, 1, 1)) < 1e-15);
    }
}

TEST_CASE("complex hessian converges at second order") {
    const char* expr = "0.7*cos(x1 + 2*y1) - 0.3*sin(3*x1)";
    const TrigSeries u = TrigSeries::parse(expr, 1);
    double prev = 0.0;
    for (int n : {16, 32, 64}) {
        const GeometryPtr g = make_geometry(1, {n, n});
        const HermitianField h = complex_hessian(u.sample(g));
        double err = 0.0;
        for (std::size_t p = 0; p < g->size(); ++p) {
            const Eigen::MatrixXd H = u.hessian(g->point(p));
            err = std::max(err, std::abs(h(p, 0, 0).real() - 0.25 * (H(0, 0) + H(1, 1))));
        }
        if (prev > 0.0) {
            CHECK(prev / err >= 3.0);
            CHECK(prev / err <= 5.0);
        }
        prev = err;
    }
}

TEST_CASE("gradient correction examples") {
    const GeometryPtr plain = make_geometry(1, {64, 1});
    const HermitianField none = gradient_correction(sample(plain, "sin(x1)"), *plain);
    for (const Complex& z : none.raw()) CHECK(z == Complex(0.0));

    ZTensor a(1);
    a(0, 0, 0) = 1.0;
    const GeometryPtr g = make_geometry(1, {64, 1}, a);
    const HermitianField z = gradient_correction(sample(g, "sin(x1)"), *g);
    CHECK(z(0, 0, 0).real() == doctest::Approx(1.0).epsilon(1e-2));
    for (std::size_t p = 0; p < g->size(); ++p)
        CHECK(std::abs(z(p, 0, 0).real() - std::cos(g->coordinate(p, 0))) < g->spacing(0) * g->spacing(0));

    ZTensor ai(1);
    ai(0, 0, 0) = Complex(0.0, 1.0);
    const GeometryPtr gi = make_geometry(1, {64, 1}, ai);
    const HermitianField zi = gradient_correction(sample(gi, "sin(x1)"), *gi);
    for (const Complex& v : zi.raw()) CHECK(std::abs(v) < 1e-15);
}

TEST_CASE("assemble omega_u examples") {
    const GeometryPtr g = make_geometry(1, {64, 1});
    const HermitianField omega = HermitianField::identity(g);
    const HermitianField same = assemble_omega_u(omega, ScalarField(g, 0.0), *g);
    for (std::size_t i = 0; i < same.raw().size(); ++i) CHECK(same.raw()[i] == omega.raw()[i]);

    const double tol = g->spacing(0) * g->spacing(0);
    const HermitianField w = assemble_omega_u(omega, sample(g, "cos(x1)"), *g);
    for (std::size_t p = 0; p < g->size(); ++p)
        CHECK(std::abs(w(p, 0, 0).real() - (1 - std::cos(g->coordinate(p, 0)) / 4)) < tol);

    ZTensor a(1);
    a(0, 0, 0) = 1.0;
    const GeometryPtr gz = make_geometry(1, {64, 1}, a);
    const HermitianField wz = assemble_omega_u(HermitianField::identity(gz), sample(gz, "cos(x1)"), *gz);
    for (std::size_t p = 0; p < gz->size(); ++p) {
        const double x = gz->coordinate(p, 0);
        CHECK(std::abs(wz(p, 0, 0).real() - (1 - std::cos(x) / 4 - std::sin(x))) < tol);
    }
}

TEST_CASE("assembled forms are Hermitian and linear in u") {
    ZTensor a(2);
    a(0, 1, 0) = Complex(0.3, -0.1);
    a(1, 1, 1) = Complex(0.2, 0.4);
    a(1, 0, 1) = Complex(-0.5, 0.0);
    const GeometryPtr g = make_geometry(2, {8, 8, 8, 8}, a);
    std::mt19937_64 rng(3);
    const ScalarField u = random_trig_series(*g, 2, 1.0, rng).sample(g);
    const ScalarField v = random_trig_series(*g, 2, 1.0, rng).sample(g);
    const HermitianField omega = HermitianField::identity(g);

    const HermitianField wu = assemble_omega_u(omega, u, *g);
    const HermitianField wv = assemble_omega_u(omega, v, *g);
    CHECK(wu.hermitian_defect() <= 1e-12);

    const double alpha = 0.7, beta = -1.3;
    const HermitianField wuv = assemble_omega_u(omega, alpha * u + beta * v, *g);
    double worst = 0.0;
    for (std::size_t i = 0; i < wuv.raw().size(); ++i) {
        const Complex lhs = wuv.raw()[i] - omega.raw()[i];
        const Complex rhs = alpha * (wu.raw()[i] - omega.raw()[i]) + beta * (wv.raw()[i] - omega.raw()[i]);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("eigenvalues with respect to chi") {
    const GeometryPtr g = make_geometry(2, {1, 1, 1, 1});
    CMatrix d(2, 2);
    d << 2.0, 0.0, 0.0, 3.0;
    LambdaField l = eigenvalues_wrt_chi(HermitianField::constant(g, d), HermitianField::identity(g));
    CHECK(l[0][0] == doctest::Approx(3.0));
    CHECK(l[0][1] == doctest::Approx(2.0));

    CMatrix gt(2, 2), chi(2, 2);
    gt << 2.0, 1.0, 1.0, 2.0;
    chi << 2.0, 0.0, 0.0, 1.0;
    l = eigenvalues_wrt_chi(HermitianField::constant(g, gt), HermitianField::constant(g, chi));
    CHECK(std::abs(l[0][0] - (3 + std::sqrt(3.0)) / 2) < 1e-12);
    CHECK(std::abs(l[0][1] - (3 - std::sqrt(3.0)) / 2) < 1e-12);

    std::mt19937_64 rng(5);
    const CMatrix c = random_hermitian(3, rng, true);
    const GeometryPtr g3 = make_geometry(3, {1, 1, 1, 1, 1, 1});
    l = eigenvalues_wrt_chi(HermitianField::constant(g3, c), HermitianField::constant(g3, c));
    for (int i = 0; i < 3; ++i) CHECK(std::abs(l[0][i] - 1.0) < 1e-12);

    CMatrix bad(2, 2);
    bad << 1.0, 0.0, 0.0, -1.0;
    CHECK_THROWS_AS(eigenvalues_wrt_chi(HermitianField::identity(g), HermitianField::constant(g, bad)),
                    InvalidMetric);
}

TEST_CASE("pencil eigenvalues agree with the 2x2 quadratic oracle") {
    std::mt19937_64 rng(11);
    const GeometryPtr g = make_geometry(2, {1, 1, 1, 1});
    for (int k = 0; k < 500; ++k) {
        const CMatrix gt = random_hermitian(2, rng, false);
        const CMatrix chi = random_hermitian(2, rng, true);
        const LambdaField l = eigenvalues_wrt_chi(HermitianField::constant(g, gt), HermitianField::constant(g, chi));
        const auto o = eigen_oracle_2x2(gt, chi);
        const double scale = 1.0 + std::abs(o[0]) + std::abs(o[1]);
        CHECK(std::abs(l[0][0] - o[0]) <= 1e-10 * scale);
        CHECK(std::abs(l[0][1] - o[1]) <= 1e-10 * scale);
    }
}

TEST_CASE("raw field files round-trip") {
    const auto dir = std::filesystem::temp_directory_path() / "subslope_io_test";
    std::filesystem::create_directories(dir);
    const GeometryPtr g = make_geometry(2, {4, 1, 6, 1});
    std::mt19937_64 rng(2);
    const ScalarField u = random_trig_series(*g, 2, 1.0, rng).sample(g);
    write_scalar_raw(dir / "u.bin", u);
    const ScalarField back = read_scalar_raw(dir / "u.bin", g);
    for (std::size_t p = 0; p < g->size(); ++p) CHECK(back[p] == u[p]);
    CHECK(std::filesystem::file_size(dir / "u.bin") == 8 * g->size());

    const HermitianField w = assemble_omega_u(HermitianField::identity(g), u, *g);
    write_hermitian_raw(dir / "w.bin", w);
    const HermitianField wb = read_hermitian_raw(dir / "w.bin", g);
    for (std::size_t i = 0; i < w.raw().size(); ++i) CHECK(wb.raw()[i] == w.raw()[i]);

    CHECK_THROWS_AS(read_scalar_raw(dir / "u.bin", make_geometry(2, {4, 1, 8, 1})), GeometryMismatch);
    CHECK_THROWS_AS(read_scalar_raw(dir / "w.bin", g), IoError);
    write_scalar_csv(dir / "u.csv", u);
    CHECK(std::filesystem::file_size(dir / "u.csv") > 0);
    std::filesystem::remove_all(dir);
}
