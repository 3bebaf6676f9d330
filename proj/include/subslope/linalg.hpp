#pragma once

// Small dense Hermitian kernels (n <= 4 in practice) used per grid point.

#include "subslope/grid.hpp"

namespace subslope {

/// Off-diagonal Frobenius mass at which a Jacobi sweep counts as converged,
/// relative to the matrix Frobenius norm.
inline constexpr double kJacobiTolerance = 1e-12;

struct EigenDecomposition {
    RVector values;   // descending
    CMatrix vectors;  // column j pairs with values[j]
};

/// Lower-triangular L with chi = L L^*. Throws InvalidMetric when chi is not
/// positive definite.
CMatrix cholesky_lower(const CMatrix& chi);

/// Cyclic Jacobi for a Hermitian matrix. The input is symmetrized first.
EigenDecomposition jacobi_eigh(CMatrix a);

/// Generalized eigenpairs of the pencil (g, chi): g v = lambda chi v.
/// Vectors are chi-orthonormal (V^* chi V = I), values descending.
EigenDecomposition pencil_eigh(const CMatrix& g, const CMatrix& chi);

/// Eigenvalues only.
RVector pencil_eigenvalues(const CMatrix& g, const CMatrix& chi);

}  // namespace subslope
