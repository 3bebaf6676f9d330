#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "subslope/errors.hpp"
#include "subslope/symmetric.hpp"
#include "subslope/verification.hpp"

using namespace subslope;
using std::numbers::pi;

namespace {

RVector vec(std::initializer_list<double> v) {
    RVector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

// sum over k-subsets, long double
long double brute_sigma(int k, const RVector& l) {
    const int n = static_cast<int>(l.size());
    long double total = 0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (__builtin_popcount(mask) != k) continue;
        long double prod = 1;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) prod *= l[i];
        total += prod;
    }
    return total;
}

}  // namespace

TEST_CASE("sigma_k examples") {
    CHECK(sigma(2, vec({1, 1, 1})) == 3.0);
    CHECK(sigma(2, vec({3, 1, -0.5})) == 1.0);
    CHECK(sigma(0, vec({7, -2})) == 1.0);
    CHECK_THROWS_AS(sigma(3, vec({1, 2})), DomainError);
    CHECK_THROWS_AS(sigma(-1, vec({1, 2})), DomainError);
}

TEST_CASE("sigma_k matches subset expansion on mixed signs") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int t = 0; t < 200; ++t) {
        RVector l(6);
        for (int i = 0; i < 6; ++i) l[i] = u(rng);
        for (int k = 0; k <= 6; ++k) {
            const long double exact = brute_sigma(k, l);
            CHECK(std::abs(sigma(k, l) - static_cast<double>(exact)) <= 1e-13 * (1 + std::abs(static_cast<double>(exact))) * std::pow(5.0, k));
        }
        CHECK(sigma_excluding(2, l, 3) == doctest::Approx(static_cast<double>(brute_sigma(2, vec({l[0], l[1], l[2], l[4], l[5]})))));
    }
}

TEST_CASE("cone membership examples") {
    CHECK(cone_contains(ConeSpec::garding(3, 2), vec({3, 1, -0.5})));
    CHECK_FALSE(cone_contains(ConeSpec::garding(3, 3), vec({3, 1, -0.5})));
    CHECK(cone_contains(ConeSpec::garding(4, 4), vec({1, 1, 1, 1})));
    CHECK_THROWS_AS(ConeSpec::garding(3, 0), InvalidArgument);
    CHECK_THROWS_AS(ConeSpec::garding(3, 4), InvalidArgument);
    CHECK(cone_contains(ConeSpec::dhym_branch(2, DhymBranch::Hypercritical), vec({2, 2})));
    CHECK_FALSE(cone_contains(ConeSpec::dhym_branch(2, DhymBranch::Hypercritical), vec({1, 0.5})));
    CHECK(cone_contains(ConeSpec::dhym_branch(2, DhymBranch::Unrestricted), vec({-5, -5})));
}

TEST_CASE("f_eval examples") {
    CHECK(f_eval(OperatorSpec::quotient(2, 2, 1), vec({1, 1})) == doctest::Approx(0.0));
    CHECK(f_eval(OperatorSpec::dhym(2), vec({1, 1})) == doctest::Approx(pi / 2));
    CHECK(f_eval(OperatorSpec::quotient(2, 2, 0), vec({2, 2})) == doctest::Approx(std::log(4.0)));
    CHECK_THROWS_AS(f_eval(OperatorSpec::quotient(2, 2, 1), vec({1, -2})), DomainError);
    CHECK_THROWS_AS(OperatorSpec::quotient(2, 1, 1), InvalidArgument);
    CHECK_THROWS_AS(OperatorSpec::quotient(2, 3, 1), InvalidArgument);
}

TEST_CASE("f_grad examples") {
    const RVector g = f_grad(OperatorSpec::quotient(2, 2, 1), vec({1, 1}));
    CHECK(g[0] == doctest::Approx(0.5));
    CHECK(g[1] == doctest::Approx(0.5));
    const RVector d = f_grad(OperatorSpec::dhym(2, DhymBranch::Unrestricted), vec({0, 0}));
    CHECK(d[0] == 1.0);
    CHECK(d[1] == 1.0);
}

TEST_CASE("f_grad matches finite differences on random cone points") {
    std::mt19937_64 rng(8);
    for (const OperatorSpec& op : {OperatorSpec::quotient(2, 2, 1), OperatorSpec::quotient(3, 3, 1),
                                   OperatorSpec::quotient(3, 2, 1), OperatorSpec::quotient(2, 2, 0),
                                   OperatorSpec::dhym(2), OperatorSpec::dhym(3)}) {
        for (const RVector& l : random_cone_samples(op.cone(), 100, rng)) {
            const RVector g = f_grad(op, l);
            const double step = 1e-6 * (1 + l.cwiseAbs().maxCoeff());
            for (Eigen::Index i = 0; i < l.size(); ++i) {
                RVector up = l, dn = l;
                up[i] += step;
                dn[i] -= step;
                const double fd = (f_eval(op, up) - f_eval(op, dn)) / (2 * step);
                CHECK(std::abs(fd - g[i]) <= 1e-6 * std::max(1.0, std::abs(g[i])));
            }
        }
    }
}

TEST_CASE("f_infinity closed forms") {
    CHECK(f_infinity(OperatorSpec::quotient(3, 3, 1), vec({2, 2, 2})) == doctest::Approx(std::log(12.0)));
    CHECK(f_infinity(OperatorSpec::quotient(2, 2, 0), vec({0.3, 5})) == kInfinity);
    CHECK(f_infinity(OperatorSpec::dhym(2), vec({1, 1})) == doctest::Approx(3 * pi / 4));
    CHECK(f_infinity_i(OperatorSpec::dhym(2), vec({2, -0.5}), 0) == doctest::Approx(pi / 2 + std::atan(-0.5)));
    CHECK(OperatorSpec::quotient(2, 2, 0).unbounded_at_infinity());
    CHECK_FALSE(OperatorSpec::quotient(2, 2, 1).unbounded_at_infinity());
}

TEST_CASE("operators are permutation symmetric") {
    std::mt19937_64 rng(9);
    for (const OperatorSpec& op : {OperatorSpec::quotient(3, 2, 1), OperatorSpec::dhym(3)}) {
        for (const RVector& l : random_cone_samples(op.cone(), 50, rng)) {
            RVector p = l;
            std::vector<int> idx{0, 1, 2};
            while (std::next_permutation(idx.begin(), idx.end())) {
                for (int i = 0; i < 3; ++i) p[i] = l[idx[i]];
                CHECK(f_eval(op, p) == doctest::Approx(f_eval(op, l)).epsilon(1e-14));
                CHECK(f_infinity(op, p) == doctest::Approx(f_infinity(op, l)).epsilon(1e-14));
                const RVector gp = f_grad(op, p), gl = f_grad(op, l);
                for (int i = 0; i < 3; ++i) CHECK(gp[i] == doctest::Approx(gl[idx[i]]).epsilon(1e-13));
            }
        }
    }
}

TEST_CASE("gradient entries ascend along sorted eigenvalues") {
    std::mt19937_64 rng(10);
    for (const OperatorSpec& op : {OperatorSpec::quotient(3, 2, 1), OperatorSpec::quotient(3, 3, 0),
                                   OperatorSpec::dhym(3)}) {
        for (RVector l : random_cone_samples(op.cone(), 200, rng)) {
            std::sort(l.data(), l.data() + l.size(), std::greater<>());
            const RVector g = f_grad(op, l);
            for (Eigen::Index i = 0; i + 1 < g.size(); ++i) CHECK(g[i] <= g[i + 1] + 1e-12);
        }
    }
}

TEST_CASE("midpoint concavity on quotient cones and the hypercritical branch") {
    std::mt19937_64 rng(12);
    const OperatorSpec hyper = OperatorSpec::dhym(2, DhymBranch::Hypercritical);
    for (const OperatorSpec& op : {OperatorSpec::quotient(3, 2, 1), OperatorSpec::quotient(3, 3, 1), hyper}) {
        const auto s = random_cone_samples(op.cone(), 200, rng);
        for (std::size_t i = 0; i + 1 < s.size(); ++i) {
            const RVector mid = 0.5 * (s[i] + s[i + 1]);
            CHECK(f_eval(op, mid) >= 0.5 * f_eval(op, s[i]) + 0.5 * f_eval(op, s[i + 1]) - 1e-10);
        }
    }
}

TEST_CASE("Garding cones are star-shaped") {
    std::mt19937_64 rng(13);
    for (int k = 1; k <= 3; ++k) {
        const ConeSpec cone = ConeSpec::garding(3, k);
        for (const RVector& l : random_cone_samples(cone, 100, rng)) {
            CHECK(cone.contains(0.1 * l));
            CHECK(cone.contains(10.0 * l));
        }
    }
}

TEST_CASE("condition report") {
    std::mt19937_64 rng(14);
    const OperatorSpec q = OperatorSpec::quotient(3, 2, 1);
    const ConditionReport rq = check_conditions(q, random_cone_samples(q.cone(), 50, rng));
    CHECK(rq.all_pass());
    CHECK(rq.condition_iii_applicable);

    const OperatorSpec d = OperatorSpec::dhym(2);
    const ConditionReport rd = check_conditions(d, random_cone_samples(d.cone(), 50, rng));
    CHECK(rd.ellipticity_ok);
    CHECK(rd.concavity_ok);
    CHECK_FALSE(rd.condition_iii_applicable);
}
