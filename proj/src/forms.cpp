#include "subslope/forms.hpp"

#include "subslope/errors.hpp"
#include "subslope/linalg.hpp"
#include "subslope/parallel.hpp"

namespace subslope {

double d1(const ScalarField& u, std::size_t p, int coord) {
    const GridGeometry& g = *u.geometry();
    if (!g.active(coord)) return 0.0;
    return (u[g.shifted(p, coord, 1)] - u[g.shifted(p, coord, -1)]) / (2.0 * g.spacing(coord));
}

double d2(const ScalarField& u, std::size_t p, int a, int b) {
    const GridGeometry& g = *u.geometry();
    if (!g.active(a) || !g.active(b)) return 0.0;
    if (a == b) {
        const double h = g.spacing(a);
        return (u[g.shifted(p, a, 1)] - 2.0 * u[p] + u[g.shifted(p, a, -1)]) / (h * h);
    }
    const std::size_t pa = g.shifted(p, a, 1);
    const std::size_t ma = g.shifted(p, a, -1);
    return (u[g.shifted(pa, b, 1)] - u[g.shifted(pa, b, -1)] - u[g.shifted(ma, b, 1)] +
            u[g.shifted(ma, b, -1)]) /
           (4.0 * g.spacing(a) * g.spacing(b));
}

HermitianField complex_hessian(const ScalarField& u) {
    const GeometryPtr& geom = u.geometry();
    const int n = geom->n();
    HermitianField out(geom);
    parallel_for(geom->size(), [&](std::size_t p) {
        for (int i = 0; i < n; ++i) {
            const int xi = 2 * i, yi = 2 * i + 1;
            out(p, i, i) = 0.25 * (d2(u, p, xi, xi) + d2(u, p, yi, yi));
            for (int j = i + 1; j < n; ++j) {
                const int xj = 2 * j, yj = 2 * j + 1;
                const Complex upper(0.25 * (d2(u, p, xi, xj) + d2(u, p, yi, yj)),
                                    0.25 * (d2(u, p, xi, yj) - d2(u, p, yi, xj)));
                const Complex lower(0.25 * (d2(u, p, xj, xi) + d2(u, p, yj, yi)),
                                    0.25 * (d2(u, p, xj, yi) - d2(u, p, yj, xi)));
                // exact Hermitian symmetry
                const Complex sym = 0.5 * (upper + std::conj(lower));
                out(p, i, j) = sym;
                out(p, j, i) = std::conj(sym);
            }
        }
    });
    return out;
}

HermitianField gradient_correction(const ScalarField& u, const GridGeometry& geom) {
    require_same_grid(*u.geometry(), geom, "gradient_correction");
    HermitianField out(u.geometry());
    if (!geom.has_z()) return out;

    const int n = geom.n();
    const ZTensor& a = geom.z_tensor();
    parallel_for(geom.size(), [&](std::size_t p) {
        std::vector<Complex> dz(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k)
            dz[k] = 0.5 * Complex(d1(u, p, 2 * k), -d1(u, p, 2 * k + 1));
        for (int i = 0; i < n; ++i) {
            for (int j = i; j < n; ++j) {
                Complex z{};
                for (int k = 0; k < n; ++k) z += a(i, j, k) * dz[k] + std::conj(a(j, i, k) * dz[k]);
                if (i == j) z = z.real();
                out(p, i, j) = z;
                out(p, j, i) = std::conj(z);
            }
        }
    });
    return out;
}

HermitianField assemble_omega_u(const HermitianField& omega, const ScalarField& u,
                                const GridGeometry& geom) {
    require_same_grid(*omega.geometry(), geom, "assemble_omega_u (omega)");
    require_same_grid(*u.geometry(), geom, "assemble_omega_u (u)");
    HermitianField out = omega;
    out += complex_hessian(u);
    if (geom.has_z()) out += gradient_correction(u, geom);
    return out;
}

LambdaField eigenvalues_wrt_chi(const HermitianField& gt, const HermitianField& chi) {
    require_same_grid(*gt.geometry(), *chi.geometry(), "eigenvalues_wrt_chi");
    LambdaField out(gt.size());
    parallel_for(gt.size(), [&](std::size_t p) {
        try {
            out[p] = pencil_eigenvalues(gt.at(p), chi.at(p));
        } catch (const InvalidMetric&) {
            throw InvalidMetric("reference metric chi is not positive definite at grid point " +
                                std::to_string(p));
        }
    });
    return out;
}

std::vector<double> volume_weights(const HermitianField& chi) {
    const double cell = chi.geometry()->cell_volume();
    std::vector<double> w(chi.size());
    for (std::size_t p = 0; p < chi.size(); ++p) {
        const CMatrix l = cholesky_lower(chi.at(p));
        double det = 1.0;
        for (Eigen::Index i = 0; i < l.rows(); ++i) det *= std::norm(l(i, i));
        w[p] = cell * det;
    }
    return w;
}

}  // namespace subslope
