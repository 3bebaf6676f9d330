#pragma once

// Pointwise evaluation of an operator on eigenvalue fields.

#include "subslope/forms.hpp"
#include "subslope/symmetric.hpp"

namespace subslope {

/// lambda(omega_u) w.r.t. chi; geometry (and Z) taken from omega.
LambdaField lambda_of(const HermitianField& omega, const HermitianField& chi, const ScalarField& u);

/// F = f(lambda) per point. Throws DomainError naming the first bad point.
ScalarField operator_field(const OperatorSpec& op, const LambdaField& lambda, const GeometryPtr& geom);

/// f_infinity(lambda) per point (entries may be +infinity).
std::vector<double> f_infinity_field(const OperatorSpec& op, const LambdaField& lambda);

/// min over points of the cone margin (> 0 iff every point is admissible).
double min_cone_margin(const OperatorSpec& op, const LambdaField& lambda);

/// Index of the first point outside the cone, or size() if none.
std::size_t first_cone_violation(const OperatorSpec& op, const LambdaField& lambda);

}  // namespace subslope
