#pragma once

// Independent oracles: manufactured right-hand sides, finite-difference checks
// of the linearization, a closed-form 2x2 pencil solver, numeric f_infinity
// limits, and a ray search for the boundedness set of a subsolution.

#include <array>
#include <random>
#include <utility>
#include <vector>

#include "subslope/pointwise.hpp"
#include "subslope/trig_series.hpp"

namespace subslope {

struct ManufacturedProblem {
    ScalarField h;
    double c = 0.0;
};

/// h = F(omega_{u*}) - c with omega_{u*} built from exact derivatives of u*.
/// The discrete solution then differs from u* by O(dx^2). Throws DomainError if
/// u* leaves the cone and InvalidArgument if u* varies along an inactive coordinate.
ManufacturedProblem manufactured_problem(const OperatorSpec& op, const HermitianField& omega,
                                         const HermitianField& chi, const TrigSeries& u_star,
                                         double c = 0.0);

/// Same with a sampled u*: h is built from the discrete form, so the discrete
/// problem is solved by u* exactly.
ManufacturedProblem manufactured_problem(const OperatorSpec& op, const HermitianField& omega,
                                         const HermitianField& chi, const ScalarField& u_star,
                                         double c = 0.0);

/// || [F(base + s psi) - F(base - s psi)] / 2s - L(psi) ||_inf / (1 + ||L(psi)||_inf).
/// Halves s (at most 3 times) if a perturbed state leaves the cone.
double fd_directional_check(const OperatorSpec& op, const HermitianField& omega,
                            const HermitianField& chi, const ScalarField& base_u,
                            const ScalarField& psi, double s = 1e-6);

/// Roots of det(g - lambda chi) = 0, descending.
std::array<double, 2> eigen_oracle_2x2(const CMatrix& g, const CMatrix& chi);

/// min_i f(lambda with lambda_i -> R) for each R.
std::vector<double> f_infinity_numeric(const OperatorSpec& op, const RVector& lambda,
                                       const std::vector<double>& radii = {1e2, 1e4, 1e6, 1e8});

enum class RayVerdict { Bounded, Unbounded, Undecided };

struct RaySearch {
    RayVerdict verdict = RayVerdict::Undecided;
    std::vector<double> crossings;  // per direction: T with f(lambda + T e_i) = h, or +inf
};

/// Probes {mu : f(mu) = h, mu - lambda in Gamma_n} along lambda + T e_i. Every
/// ray crossing level h (bisected) gives Bounded; a ray whose value stays more
/// than 1e-6 below h out to T = t_max gives Unbounded; otherwise Undecided.
RaySearch ray_search(const OperatorSpec& op, const RVector& lambda, double h, double t_max = 1e12);

/// Uniform samples from [lo, hi]^n kept when the cone margin is at least
/// min_margin. Garding margins are taken at lambda / max(1, |lambda|_inf).
std::vector<RVector> random_cone_samples(const ConeSpec& cone, std::size_t count, std::mt19937_64& rng,
                                         double lo = -1.0, double hi = 3.0, double min_margin = 0.05);

/// Random band-limited potentials (see random_trig_series) whose forms stay in
/// the cone; the amplitude is halved until the sample is admissible.
std::vector<ScalarField> random_admissible_trials(const OperatorSpec& op, const HermitianField& omega,
                                                  const HermitianField& chi, std::size_t count,
                                                  std::uint64_t seed, int max_mode = 3,
                                                  double amplitude = 0.5);

}  // namespace subslope
