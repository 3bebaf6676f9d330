#pragma once

// Discrete (1,1)-forms on the flat torus:
//   omega_u = omega + i dd-bar u + Z(du)
// with second-order central differences on the periodic grid.

#include <vector>

#include "subslope/grid.hpp"

namespace subslope {

/// Per-point eigenvalue vectors, each sorted descending.
using LambdaField = std::vector<RVector>;

/// Central-difference derivatives at grid point p. Derivatives along inactive
/// coordinates are zero.
double d1(const ScalarField& u, std::size_t p, int coord);
double d2(const ScalarField& u, std::size_t p, int a, int b);

/// (dd-bar u)_{ij} = 1/4 [(u_{x^i x^j} + u_{y^i y^j}) + i (u_{x^i y^j} - u_{y^i x^j})].
HermitianField complex_hessian(const ScalarField& u);

/// Z(du)_{ij} = sum_k A_{ijk} u_k + conj(A_{jik} u_k) with u_k = (u_{x^k} - i u_{y^k}) / 2.
HermitianField gradient_correction(const ScalarField& u, const GridGeometry& geom);

/// omega + complex_hessian(u) + gradient_correction(u).
HermitianField assemble_omega_u(const HermitianField& omega, const ScalarField& u,
                                const GridGeometry& geom);

/// Eigenvalues of gt with respect to chi at every point, descending.
/// Throws InvalidMetric if chi is not positive definite somewhere.
LambdaField eigenvalues_wrt_chi(const HermitianField& gt, const HermitianField& chi);

/// Quadrature weights realizing dvol = chi^n: cell volume times det(chi).
std::vector<double> volume_weights(const HermitianField& chi);

}  // namespace subslope
