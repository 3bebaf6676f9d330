#pragma once

// C-subsolution tests and the sub-slope bracket
//   inf_M F(omega) - sup_M h  <=  sigma  <=  min over trials of max_M (F(u) - h).

#include <vector>

#include "subslope/pointwise.hpp"

namespace subslope {

struct SubsolutionCheck {
    bool is_subsolution = false;
    std::vector<double> margin;  // f_inf(lambda) - h - shift per point (may be +inf)
    double min_margin = 0.0;
    double mean_margin = 0.0;    // +inf when f_inf is unbounded
    std::size_t argmin = 0;
};

/// Strict test min_x [f_inf(lambda(x)) - h(x) - shift] > 0. A zero margin is
/// not a subsolution. Throws DomainError naming a point outside the cone.
SubsolutionCheck is_c_subsolution(const OperatorSpec& op, const LambdaField& lambda,
                                  const ScalarField& h, double shift = 0.0);

/// Direct dHYM criterion: sum_{i != k} arctan lambda_i(x) > h(x) - pi/2 for
/// all x and k.
bool dhym_subsolution_criterion(const LambdaField& lambda, const ScalarField& h);

/// inf_M F(omega) - sup_M h.
double subslope_lower_bound(const OperatorSpec& op, const HermitianField& omega,
                            const HermitianField& chi, const ScalarField& h);

struct SubslopeEstimate {
    double value = kInfinity;                   // min over admissible trials
    std::size_t best_trial = 0;
    std::vector<double> trial_values;           // max_M (F(u) - h), NaN if skipped
    std::vector<std::size_t> skipped;           // trials leaving the cone
};

/// Upper bound on the sub-slope from trial potentials. Trials whose
/// eigenvalues leave the cone are skipped; throws NoAdmissibleTrial when none
/// remain.
SubslopeEstimate subslope_estimate(const OperatorSpec& op, const HermitianField& omega,
                                   const HermitianField& chi, const ScalarField& h,
                                   const std::vector<ScalarField>& trials);

/// max_M (F(u) - h) for a single admissible potential.
double max_slope(const OperatorSpec& op, const HermitianField& omega, const HermitianField& chi,
                 const ScalarField& h, const ScalarField& u);

struct SubslopeBracket {
    double lower = 0.0;
    double upper = 0.0;
    std::size_t trials = 0;
    std::size_t admissible = 0;
};

SubslopeBracket subslope_bracket(const OperatorSpec& op, const HermitianField& omega,
                                 const HermitianField& chi, const ScalarField& h,
                                 const std::vector<ScalarField>& trials);

}  // namespace subslope
