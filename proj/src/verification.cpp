#include "subslope/verification.hpp"

#include <algorithm>
#include <cmath>

#include "subslope/continuity.hpp"
#include "subslope/errors.hpp"
#include "subslope/linalg.hpp"
#include "subslope/parallel.hpp"

namespace subslope {

namespace {

CMatrix exact_form(const HermitianField& omega, const TrigSeries& u, std::size_t p) {
    const GridGeometry& g = *omega.geometry();
    const int n = g.n();
    const std::vector<double> x = g.point(p);
    const RVector grad = u.gradient(x);
    const Eigen::MatrixXd hess = u.hessian(x);

    CMatrix m = omega.at(p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            m(i, j) += 0.25 * Complex(hess(2 * i, 2 * j) + hess(2 * i + 1, 2 * j + 1),
                                      hess(2 * i, 2 * j + 1) - hess(2 * i + 1, 2 * j));
    if (g.has_z()) {
        const ZTensor& a = g.z_tensor();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    const Complex dk(0.5 * grad[2 * k], -0.5 * grad[2 * k + 1]);
                    m(i, j) += a(i, j, k) * dk + std::conj(a(j, i, k) * dk);
                }
    }
    return m;
}

ManufacturedProblem finish_manufactured(const OperatorSpec& op, const LambdaField& lambda,
                                        const GeometryPtr& geom, double c) {
    if (const std::size_t bad = first_cone_violation(op, lambda); bad < lambda.size())
        throw DomainError("manufactured solution is inadmissible: its form leaves the cone " +
                          op.cone().name() + " at grid point " + std::to_string(bad));
    ScalarField h = operator_field(op, lambda, geom);
    h += -c;
    return {std::move(h), c};
}

}  // namespace

ManufacturedProblem manufactured_problem(const OperatorSpec& op, const HermitianField& omega,
                                         const HermitianField& chi, const TrigSeries& u_star,
                                         double c) {
    const GeometryPtr& geom = omega.geometry();
    if (u_star.real_dims() != geom->real_dims())
        throw InvalidArgument("manufactured solution has the wrong number of coordinates");
    if (u_star.depends_on_inactive(*geom))
        throw InvalidArgument("manufactured solution varies along an inactive coordinate");
    require_same_grid(*geom, *chi.geometry(), "manufactured_problem");

    LambdaField lambda(geom->size());
    parallel_for(geom->size(), [&](std::size_t p) {
        lambda[p] = pencil_eigenvalues(exact_form(omega, u_star, p), chi.at(p));
    });
    return finish_manufactured(op, lambda, geom, c);
}

ManufacturedProblem manufactured_problem(const OperatorSpec& op, const HermitianField& omega,
                                         const HermitianField& chi, const ScalarField& u_star,
                                         double c) {
    return finish_manufactured(op, lambda_of(omega, chi, u_star), omega.geometry(), c);
}

double fd_directional_check(const OperatorSpec& op, const HermitianField& omega,
                            const HermitianField& chi, const ScalarField& base_u,
                            const ScalarField& psi, double s) {
    const GeometryPtr& geom = omega.geometry();
    const HermitianField base = assemble_omega_u(omega, base_u, *geom);
    const ScalarField lin = linearized_apply(op, *geom, chi, base, psi);
    double lin_norm = 0.0;
    for (double v : lin.values()) lin_norm = std::max(lin_norm, std::abs(v));

    for (int attempt = 0; attempt <= 3; ++attempt, s *= 0.5) {
        const ScalarField up = base_u + s * psi;
        const ScalarField dn = base_u - s * psi;
        const LambdaField lu = lambda_of(omega, chi, up);
        const LambdaField ld = lambda_of(omega, chi, dn);
        if (first_cone_violation(op, lu) < lu.size() || first_cone_violation(op, ld) < ld.size())
            continue;
        const ScalarField fu = operator_field(op, lu, geom);
        const ScalarField fd = operator_field(op, ld, geom);
        double err = 0.0;
        for (std::size_t p = 0; p < geom->size(); ++p)
            err = std::max(err, std::abs((fu[p] - fd[p]) / (2.0 * s) - lin[p]));
        return err / (1.0 + lin_norm);
    }
    throw DomainError("fd_directional_check: perturbed states leave the cone after 3 halvings of s");
}

std::array<double, 2> eigen_oracle_2x2(const CMatrix& g, const CMatrix& chi) {
    if (g.rows() != 2 || g.cols() != 2 || chi.rows() != 2 || chi.cols() != 2)
        throw InvalidArgument("eigen_oracle_2x2 needs 2x2 matrices");
    const double g11 = g(0, 0).real(), g22 = g(1, 1).real();
    const double c11 = chi(0, 0).real(), c22 = chi(1, 1).real();
    const Complex g12 = g(0, 1), c12 = chi(0, 1);

    // det(g - lambda chi) = a lambda^2 + b lambda + c
    const double a = c11 * c22 - std::norm(c12);
    const double b = -(g11 * c22 + g22 * c11 - 2.0 * (g12 * std::conj(c12)).real());
    const double c = g11 * g22 - std::norm(g12);
    if (!(a > 0.0) || !(c11 > 0.0)) throw InvalidMetric("eigen_oracle_2x2: chi is not positive definite");

    const double disc = std::max(0.0, b * b - 4.0 * a * c);
    const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    double r1 = q / a;
    double r2 = q != 0.0 ? c / q : 0.0;
    if (r1 < r2) std::swap(r1, r2);
    return {r1, r2};
}

std::vector<double> f_infinity_numeric(const OperatorSpec& op, const RVector& lambda,
                                       const std::vector<double>& radii) {
    std::vector<double> out;
    out.reserve(radii.size());
    for (double r : radii) {
        double best = kInfinity;
        for (Eigen::Index i = 0; i < lambda.size(); ++i) {
            RVector mu = lambda;
            mu[i] = r;
            best = std::min(best, f_eval(op, mu));
        }
        out.push_back(best);
    }
    return out;
}

RaySearch ray_search(const OperatorSpec& op, const RVector& lambda, double h, double t_max) {
    constexpr double kUndecidedGap = 1e-6;
    RaySearch out;
    bool any_unbounded = false;
    bool any_undecided = false;
    const auto along = [&](Eigen::Index i, double t) {
        RVector mu = lambda;
        mu[i] += t;
        return f_eval(op, mu);
    };

    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (along(i, 0.0) >= h) {
            out.crossings.push_back(0.0);
            continue;
        }
        double lo = 0.0;
        double hi = 1.0;
        while (hi <= t_max && along(i, hi) < h) {
            lo = hi;
            hi *= 2.0;
        }
        if (hi > t_max) {
            out.crossings.push_back(kInfinity);
            if (h - along(i, t_max) > kUndecidedGap)
                any_unbounded = true;
            else
                any_undecided = true;
            continue;
        }
        for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (along(i, mid) < h ? lo : hi) = mid;
        }
        out.crossings.push_back(hi);
    }
    out.verdict = any_unbounded ? RayVerdict::Unbounded
                  : any_undecided ? RayVerdict::Undecided
                                  : RayVerdict::Bounded;
    return out;
}

std::vector<RVector> random_cone_samples(const ConeSpec& cone, std::size_t count, std::mt19937_64& rng,
                                         double lo, double hi, double min_margin) {
    std::uniform_real_distribution<double> uni(lo, hi);
    std::vector<RVector> out;
    out.reserve(count);
    const std::size_t max_attempts = 100000 * std::max<std::size_t>(count, 1);
    for (std::size_t attempt = 0; out.size() < count && attempt < max_attempts; ++attempt) {
        RVector l(cone.n());
        for (int i = 0; i < cone.n(); ++i) l[i] = uni(rng);
        // Garding margins grow with |lambda|; the dHYM phase margin does not
        const double scale =
            cone.kind() == ConeSpec::Kind::DhymBranch ? 1.0 : std::max(1.0, l.cwiseAbs().maxCoeff());
        if (cone.margin(l / scale) >= min_margin) out.push_back(l);
    }
    if (out.size() < count)
        throw InvalidArgument("random_cone_samples: box rarely meets the cone " + cone.name());
    return out;
}

std::vector<ScalarField> random_admissible_trials(const OperatorSpec& op, const HermitianField& omega,
                                                  const HermitianField& chi, std::size_t count,
                                                  std::uint64_t seed, int max_mode, double amplitude) {
    const GeometryPtr& geom = omega.geometry();
    std::mt19937_64 rng(seed);
    std::vector<ScalarField> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        ScalarField u = random_trig_series(*geom, max_mode, amplitude, rng).sample(geom);
        for (int halving = 0; halving < 40; ++halving) {
            const LambdaField lambda = lambda_of(omega, chi, u);
            if (first_cone_violation(op, lambda) == lambda.size()) {
                out.push_back(std::move(u));
                break;
            }
            u *= 0.5;
        }
    }
    return out;
}

}  // namespace subslope
