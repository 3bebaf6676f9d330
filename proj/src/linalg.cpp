#include "subslope/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "subslope/errors.hpp"

namespace subslope {

CMatrix cholesky_lower(const CMatrix& chi) {
    const Eigen::Index n = chi.rows();
    CMatrix l = CMatrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double d = chi(j, j).real();
        for (Eigen::Index k = 0; k < j; ++k) d -= std::norm(l(j, k));
        if (!(d > 0.0) || !std::isfinite(d))
            throw InvalidMetric("reference metric is not positive definite");
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            Complex s = chi(i, j);
            for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
            l(i, j) = s / ljj;
        }
    }
    return l;
}

namespace {

double off_diagonal_mass(const CMatrix& a) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
}

// One unitary rotation G in the (p, q) plane that annihilates a(p, q):
// a <- G^* a G, v <- v G.
void rotate(CMatrix& a, CMatrix& v, Eigen::Index p, Eigen::Index q) {
    const Complex apq = a(p, q);
    const double mag = std::abs(apq);
    if (mag == 0.0) return;
    const Complex phase = apq / mag;

    const double app = a(p, p).real();
    const double aqq = a(q, q).real();
    const double theta = (aqq - app) / (2.0 * mag);
    const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
    const double c = 1.0 / std::sqrt(t * t + 1.0);
    const double s = t * c;

    // G = D R with D = diag(.., conj(phase) at q, ..) and R the real rotation.
    const Complex gpp = c;
    const Complex gpq = s;
    const Complex gqp = -s * std::conj(phase);
    const Complex gqq = c * std::conj(phase);

    const Eigen::Index n = a.rows();
    for (Eigen::Index k = 0; k < n; ++k) {
        const Complex akp = a(k, p);
        const Complex akq = a(k, q);
        a(k, p) = akp * gpp + akq * gqp;
        a(k, q) = akp * gpq + akq * gqq;
    }
    for (Eigen::Index k = 0; k < n; ++k) {
        const Complex apk = a(p, k);
        const Complex aqk = a(q, k);
        a(p, k) = std::conj(gpp) * apk + std::conj(gqp) * aqk;
        a(q, k) = std::conj(gpq) * apk + std::conj(gqq) * aqk;
    }
    a(p, q) = 0.0;
    a(q, p) = 0.0;
    a(p, p) = a(p, p).real();
    a(q, q) = a(q, q).real();

    for (Eigen::Index k = 0; k < n; ++k) {
        const Complex vkp = v(k, p);
        const Complex vkq = v(k, q);
        v(k, p) = vkp * gpp + vkq * gqp;
        v(k, q) = vkp * gpq + vkq * gqq;
    }
}

}  // namespace

EigenDecomposition jacobi_eigh(CMatrix a) {
    const Eigen::Index n = a.rows();
    a = (0.5 * (a + a.adjoint())).eval();
    CMatrix v = CMatrix::Identity(n, n);

    const double scale = std::max(a.norm(), 1e-300);
    // Once the tolerance is met one more sweep is taken; convergence is
    // quadratic, so that sweep leaves the off-diagonal at rounding level.
    int sweeps_after_tolerance = 0;
    for (int sweep = 0; sweep < 64; ++sweep) {
        if (off_diagonal_mass(a) <= kJacobiTolerance * scale && ++sweeps_after_tolerance > 1) break;
        for (Eigen::Index p = 0; p < n - 1; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) rotate(a, v, p, q);
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index i, Eigen::Index j) { return a(i, i).real() > a(j, j).real(); });

    EigenDecomposition out{RVector(n), CMatrix(n, n)};
    for (Eigen::Index j = 0; j < n; ++j) {
        out.values[j] = a(order[j], order[j]).real();
        out.vectors.col(j) = v.col(order[j]);
    }
    return out;
}

EigenDecomposition pencil_eigh(const CMatrix& g, const CMatrix& chi) {
    const CMatrix l = cholesky_lower(chi);
    // B = L^{-1} g L^{-*}
    const auto lower = l.triangularView<Eigen::Lower>();
    CMatrix tmp = lower.solve(g);
    CMatrix b = lower.solve(tmp.adjoint()).adjoint();
    EigenDecomposition eig = jacobi_eigh(std::move(b));
    // V = L^{-*} U is chi-orthonormal.
    eig.vectors = l.adjoint().triangularView<Eigen::Upper>().solve(eig.vectors);
    return eig;
}

RVector pencil_eigenvalues(const CMatrix& g, const CMatrix& chi) {
    return pencil_eigh(g, chi).values;
}

}  // namespace subslope
