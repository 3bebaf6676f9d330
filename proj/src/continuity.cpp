#include "subslope/continuity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <Eigen/SparseLU>

#include "subslope/errors.hpp"
#include "subslope/linalg.hpp"
#include "subslope/parallel.hpp"

namespace subslope {

namespace {

constexpr double kLinearSolveTarget = 1e-12;  // relative residual aimed for
constexpr double kLinearSolveAccept = 1e-8;   // beyond this the solve counts as stagnated

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double inf_norm(const ScalarField& f) {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

// Solves A x = b with sparse LU plus iterative refinement; returns x.
Eigen::VectorXd solve_refined(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(a);
    lu.factorize(a);
    if (lu.info() != Eigen::Success)
        throw SingularLinearization("sparse LU factorization failed: " + lu.lastErrorMessage());

    const double bnorm = b.lpNorm<Eigen::Infinity>();
    Eigen::VectorXd x = lu.solve(b);
    if (bnorm == 0.0) return Eigen::VectorXd::Zero(b.size());
    Eigen::VectorXd r = b - a * x;
    double rel = r.lpNorm<Eigen::Infinity>() / bnorm;
    for (int it = 0; it < 5 && rel > kLinearSolveTarget; ++it) {
        Eigen::VectorXd x_new = x + lu.solve(r);
        Eigen::VectorXd r_new = b - a * x_new;
        const double rel_new = r_new.lpNorm<Eigen::Infinity>() / bnorm;
        if (!(rel_new < rel)) break;
        x = std::move(x_new);
        r = std::move(r_new);
        rel = rel_new;
    }
    if (!(rel <= kLinearSolveAccept) || !x.allFinite()) {
        std::ostringstream msg;
        msg << "linear solve stagnated at relative residual " << rel;
        throw SingularLinearization(msg.str());
    }
    return x;
}

// [[L, -1], [1^T, 0]]
Eigen::SparseMatrix<double> augmented_matrix(const Eigen::SparseMatrix<double>& l) {
    const Eigen::Index n = l.rows();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(l.nonZeros() + 2 * n));
    for (Eigen::Index col = 0; col < l.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(l, col); it; ++it)
            trip.emplace_back(it.row(), it.col(), it.value());
    for (Eigen::Index i = 0; i < n; ++i) {
        trip.emplace_back(i, n, -1.0);
        trip.emplace_back(n, i, 1.0);
    }
    Eigen::SparseMatrix<double> j(n + 1, n + 1);
    j.setFromTriplets(trip.begin(), trip.end());
    j.makeCompressed();
    return j;
}

std::size_t shift_by(const GridGeometry& g, std::size_t idx, const std::vector<int>& offset, int sign) {
    for (int c = 0; c < g.real_dims(); ++c)
        if (offset[c] != 0) idx = g.shifted(idx, c, sign * offset[c]);
    return idx;
}

}  // namespace

void PathConfig::validate() const {
    if (!(0.0 < t_step_min && t_step_min <= t_step_init && t_step_init <= 1.0))
        throw InvalidArgument("path config needs 0 < t_step_min <= t_step_init <= 1");
    if (!(newton_tol > 0.0)) throw InvalidArgument("newton_tol must be positive");
    if (max_newton < 1) throw InvalidArgument("max_newton must be >= 1");
    if (!(damping > 0.0 && damping < 1.0)) throw InvalidArgument("damping must lie in (0, 1)");
    if (!(delta_margin >= 0.0)) throw InvalidArgument("delta_margin must be >= 0");
}

std::string monitor_csv(const std::vector<MonitorRow>& rows) {
    std::string out =
        "t,c_t,residual,newton_iters,min_cone_margin,subsolution_margin,c_upper_bound\n";
    for (const MonitorRow& r : rows) {
        out += format_double(r.t) + "," + format_double(r.c) + "," + format_double(r.residual) + "," +
               std::to_string(r.newton_iters) + "," + format_double(r.min_cone_margin) + "," +
               format_double(r.subsolution_margin) + "," + format_double(r.c_upper) + "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// Linearization

FormStencil form_stencil(const GeometryPtr& geom) {
    ScalarField delta(geom, 0.0);
    delta[0] = 1.0;
    HermitianField k = complex_hessian(delta);
    if (geom->has_z()) k += gradient_correction(delta, *geom);

    FormStencil s;
    for (std::size_t x = 0; x < geom->size(); ++x) {
        const CMatrix w = k.at(x);
        if (w.cwiseAbs().maxCoeff() == 0.0) continue;
        std::vector<int> off(static_cast<std::size_t>(geom->real_dims()));
        for (int c = 0; c < geom->real_dims(); ++c) {
            const int count = geom->shape()[c];
            int comp = geom->component(x, c);
            if (comp > count / 2) comp -= count;
            off[c] = comp;
        }
        s.offsets.push_back(std::move(off));
        s.weights.push_back(w);
    }
    return s;
}

std::vector<CMatrix> linearization_coefficients(const OperatorSpec& op, const HermitianField& base,
                                                const HermitianField& chi) {
    require_same_grid(*base.geometry(), *chi.geometry(), "linearization");
    std::vector<CMatrix> p(base.size());
    parallel_for(base.size(), [&](std::size_t x) {
        const EigenDecomposition eig = pencil_eigh(base.at(x), chi.at(x));
        RVector grad;
        try {
            grad = f_grad(op, eig.values);
        } catch (const DomainError& e) {
            throw DomainError("linearization base leaves the cone at grid point " + std::to_string(x) +
                              ": " + e.what());
        }
        p[x] = eig.vectors * grad.cast<Complex>().asDiagonal() * eig.vectors.adjoint();
    });
    return p;
}

ScalarField linearized_apply(const OperatorSpec& op, const GridGeometry& geom,
                             const HermitianField& chi, const HermitianField& base,
                             const ScalarField& psi) {
    require_same_grid(*psi.geometry(), geom, "linearized_apply (psi)");
    require_same_grid(*base.geometry(), geom, "linearized_apply (base)");
    const std::vector<CMatrix> coeffs = linearization_coefficients(op, base, chi);
    HermitianField dg = complex_hessian(psi);
    if (geom.has_z()) dg += gradient_correction(psi, geom);

    const int n = geom.n();
    ScalarField out(psi.geometry(), 0.0);
    parallel_for(geom.size(), [&](std::size_t x) {
        double v = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) v += (coeffs[x](i, j) * dg(x, j, i)).real();
        out[x] = v;
    });
    return out;
}

Eigen::SparseMatrix<double> assemble_linearization(const std::vector<CMatrix>& coeffs,
                                                   const GeometryPtr& geom,
                                                   const FormStencil& stencil) {
    const std::size_t npts = geom->size();
    const int n = geom->n();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(npts * stencil.weights.size());
    for (std::size_t y = 0; y < npts; ++y) {
        for (std::size_t s = 0; s < stencil.weights.size(); ++s) {
            const CMatrix& w = stencil.weights[s];
            double v = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) v += (coeffs[y](i, j) * w(j, i)).real();
            if (v == 0.0) continue;
            const std::size_t col = shift_by(*geom, y, stencil.offsets[s], -1);
            trip.emplace_back(static_cast<int>(y), static_cast<int>(col), v);
        }
    }
    Eigen::SparseMatrix<double> l(static_cast<Eigen::Index>(npts), static_cast<Eigen::Index>(npts));
    l.setFromTriplets(trip.begin(), trip.end());
    l.makeCompressed();
    return l;
}

// ---------------------------------------------------------------------------
// Path context

PathContext::PathContext(OperatorSpec op, HermitianField omega, HermitianField chi, ScalarField h,
                         ScalarField u_bar, ScalarField u_sub, PathConfig cfg)
    : op_(std::move(op)), omega_(std::move(omega)), chi_(std::move(chi)), h_(std::move(h)),
      u_bar_(std::move(u_bar)), u_sub_(std::move(u_sub)), h_bar_(omega_.geometry()),
      cfg_(cfg) {
    cfg_.validate();
    const GridGeometry& g = *omega_.geometry();
    if (op_.n() != g.n()) throw InvalidArgument("operator dimension does not match the grid");
    require_same_grid(g, *chi_.geometry(), "path (chi)");
    require_same_grid(g, *h_.geometry(), "path (h)");
    require_same_grid(g, *u_bar_.geometry(), "path (u_bar)");
    require_same_grid(g, *u_sub_.geometry(), "path (u_sub)");

    stencil_ = form_stencil(omega_.geometry());

    const LambdaField lambda_bar = lambda_of(omega_, chi_, u_bar_);
    if (const std::size_t bad = first_cone_violation(op_, lambda_bar); bad < lambda_bar.size())
        throw DomainError("starting potential u_bar leaves the cone at grid point " + std::to_string(bad));
    h_bar_ = operator_field(op_, lambda_bar, omega_.geometry());
    c_bar_ = (h_bar_ - h_).max();

    const LambdaField lambda_sub = lambda_of(omega_, chi_, u_sub_);
    if (const std::size_t bad = first_cone_violation(op_, lambda_sub); bad < lambda_sub.size())
        throw NotSubsolution("subsolution candidate leaves the cone at grid point " + std::to_string(bad));
    f_inf_sub_ = f_infinity_field(op_, lambda_sub);
    const SubsolutionCheck sub = is_c_subsolution(op_, lambda_sub, h_, c_bar_);
    delta_ = sub.min_margin;
    if (!sub.is_subsolution || delta_ < cfg_.delta_margin) {
        std::ostringstream msg;
        const std::vector<double> x = g.point(sub.argmin);
        msg << "u_sub is not a C-subsolution of F = h + c_bar (c_bar = " << c_bar_
            << "): margin f_inf - h - c_bar = " << sub.min_margin << " at grid point " << sub.argmin
            << " (x = ";
        for (std::size_t c = 0; c < x.size(); ++c) msg << (c ? ", " : "") << x[c];
        msg << ")";
        if (sub.is_subsolution) msg << "; required delta_margin " << cfg_.delta_margin;
        throw NotSubsolution(msg.str());
    }

    try {
        inf_f_omega_ = operator_field(op_, eigenvalues_wrt_chi(omega_, chi_), omega_.geometry()).min();
    } catch (const DomainError&) {
        // omega itself is not admissible; the lower bound carries no information
        inf_f_omega_ = -kInfinity;
    }
}

ScalarField PathContext::h_t(double t) const {
    if (t == 1.0) return h_;
    ScalarField out = h_bar_;
    if (t == 0.0) return out;
    for (std::size_t p = 0; p < out.size(); ++p) out[p] = h_bar_[p] + t * (h_[p] - h_bar_[p]);
    return out;
}

double PathContext::c_lower(double t) const { return inf_f_omega_ - h_t(t).max(); }

ScalarField path_residual(const PathContext& ctx, const ScalarField& phi, double c, double t) {
    const ScalarField u = ctx.u_bar() + phi;
    ScalarField r = operator_field(ctx.op(), lambda_of(ctx.omega(), ctx.chi(), u), ctx.geometry());
    r -= ctx.h_t(t);
    r += -c;
    return r;
}

// ---------------------------------------------------------------------------
// Newton

std::pair<ScalarField, double> newton_step(const PathContext& ctx, const ContinuityState& state,
                                           const ScalarField& h_t) {
    const GeometryPtr& geom = ctx.geometry();
    const ScalarField u = ctx.u_bar() + state.phi;
    const HermitianField base = assemble_omega_u(ctx.omega(), u, *geom);
    const LambdaField lambda = eigenvalues_wrt_chi(base, ctx.chi());
    ScalarField r = operator_field(ctx.op(), lambda, geom);
    r -= h_t;
    r += -state.c;

    const std::size_t npts = geom->size();
    if (inf_norm(r) == 0.0) return {ScalarField(geom, 0.0), 0.0};

    const auto l = assemble_linearization(linearization_coefficients(ctx.op(), base, ctx.chi()), geom,
                                          ctx.stencil());
    const Eigen::SparseMatrix<double> j = augmented_matrix(l);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(npts + 1));
    for (std::size_t p = 0; p < npts; ++p) rhs[static_cast<Eigen::Index>(p)] = -r[p];
    rhs[static_cast<Eigen::Index>(npts)] = 0.0;

    const Eigen::VectorXd x = solve_refined(j, rhs);
    std::vector<double> dphi(npts);
    for (std::size_t p = 0; p < npts; ++p) dphi[p] = x[static_cast<Eigen::Index>(p)];
    return {ScalarField(geom, std::move(dphi)), x[static_cast<Eigen::Index>(npts)]};
}

namespace {

double subsolution_margin(const PathContext& ctx, const ScalarField& h_t, double c) {
    double m = kInfinity;
    const auto& finf = ctx.f_inf_sub();
    for (std::size_t p = 0; p < finf.size(); ++p) m = std::min(m, finf[p] - h_t[p] - c);
    return m;
}

}  // namespace

ContinuityState solve_at_t(const PathContext& ctx, const ContinuityState& state, double t) {
    const PathConfig& cfg = ctx.config();
    const ScalarField h_t = ctx.h_t(t);
    const GeometryPtr& geom = ctx.geometry();

    auto evaluate = [&](const ScalarField& phi, double c, ScalarField& residual, double& cone_margin) {
        const LambdaField lambda = lambda_of(ctx.omega(), ctx.chi(), ctx.u_bar() + phi);
        cone_margin = min_cone_margin(ctx.op(), lambda);
        if (!(cone_margin > 0.0)) return false;
        residual = operator_field(ctx.op(), lambda, geom);
        residual -= h_t;
        residual += -c;
        return true;
    };

    ContinuityState cur = state;
    cur.t = t;
    cur.newton_iters = 0;
    cur.residual_history.clear();

    ScalarField r(geom);
    double cone_margin = 0.0;
    if (!evaluate(cur.phi, cur.c, r, cone_margin))
        throw StepFailure("warm start leaves the cone at t = " + format_double(t));
    double rnorm = inf_norm(r);
    cur.residual_history.push_back(rnorm);

    while (rnorm > cfg.newton_tol) {
        if (cur.newton_iters >= cfg.max_newton)
            throw StepFailure("Newton did not converge in " + std::to_string(cfg.max_newton) +
                              " iterations at t = " + format_double(t) + " (residual " +
                              format_double(rnorm) + ")");
        auto [dphi, dc] = newton_step(ctx, cur, h_t);

        double alpha = 1.0;
        bool accepted = false;
        while (alpha > 1e-10) {
            ScalarField phi_try = cur.phi;
            for (std::size_t p = 0; p < phi_try.size(); ++p) phi_try[p] += alpha * dphi[p];
            const double c_try = cur.c + alpha * dc;
            ScalarField r_try(geom);
            double margin_try = 0.0;
            if (evaluate(phi_try, c_try, r_try, margin_try)) {
                const double rn = inf_norm(r_try);
                if (rn < rnorm || rn <= cfg.newton_tol) {
                    cur.phi = std::move(phi_try);
                    cur.c = c_try;
                    r = std::move(r_try);
                    rnorm = rn;
                    cone_margin = margin_try;
                    accepted = true;
                    break;
                }
            }
            alpha *= cfg.damping;
        }
        if (!accepted)
            throw StepFailure("backtracking could not keep the cone and reduce the residual at t = " +
                              format_double(t));
        ++cur.newton_iters;
        cur.residual_history.push_back(rnorm);
    }

    cur.diagnostics.c_bar = ctx.c_bar();
    cur.diagnostics.residual = rnorm;
    cur.diagnostics.min_cone_margin = cone_margin;
    cur.diagnostics.subsolution_margin = subsolution_margin(ctx, h_t, cur.c);
    cur.diagnostics.xi_min = std::numeric_limits<double>::quiet_NaN();
    return cur;
}

// ---------------------------------------------------------------------------

AdjointKernel adjoint_kernel(const PathContext& ctx, const ScalarField& phi) {
    return adjoint_kernel(ctx.op(), ctx.omega(), ctx.chi(), ctx.u_bar() + phi);
}

AdjointKernel adjoint_kernel(const OperatorSpec& op, const HermitianField& omega,
                             const HermitianField& chi, const ScalarField& u) {
    const GeometryPtr& geom = omega.geometry();
    const HermitianField base = assemble_omega_u(omega, u, *geom);
    const auto l = assemble_linearization(linearization_coefficients(op, base, chi), geom,
                                          form_stencil(geom));
    // J^T [eta; mu] = [0; -1] gives L^T eta = 0 and sum(eta) = 1 (mu = 0 since L 1 = 0).
    const Eigen::SparseMatrix<double> jt = augmented_matrix(l).transpose();
    const std::size_t npts = geom->size();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(npts + 1));
    rhs[static_cast<Eigen::Index>(npts)] = -1.0;
    const Eigen::VectorXd sol = solve_refined(jt, rhs);
    const Eigen::VectorXd eta = sol.head(static_cast<Eigen::Index>(npts));

    const std::vector<double> w = volume_weights(chi);
    std::vector<double> xi(npts);
    for (std::size_t p = 0; p < npts; ++p) xi[p] = eta[static_cast<Eigen::Index>(p)] / w[p];

    AdjointKernel out{ScalarField(geom, std::move(xi)), 0.0, 0.0};
    out.xi_min = out.xi.min();
    double lnorm = 0.0;
    for (Eigen::Index k = 0; k < l.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(l, k); it; ++it)
            lnorm = std::max(lnorm, std::abs(it.value()));
    const Eigen::VectorXd lt_eta = l.transpose() * eta;
    out.residual = lt_eta.lpNorm<Eigen::Infinity>() / (lnorm * eta.lpNorm<Eigen::Infinity>());
    return out;
}

// ---------------------------------------------------------------------------

namespace {

MonitorRow monitor_row(const PathContext& ctx, const ContinuityState& s) {
    return {s.t,
            s.c,
            s.diagnostics.residual,
            s.newton_iters,
            s.diagnostics.min_cone_margin,
            s.diagnostics.subsolution_margin,
            s.t * ctx.c_bar(),
            ctx.c_lower(s.t)};
}

void check_monitors(const PathContext& ctx, const ContinuityState& s,
                    const std::vector<MonitorRow>& log) {
    const double slack = ctx.config().monitor_slack;
    const MonitorRow& row = log.back();
    std::ostringstream why;
    if (!(row.c <= row.c_upper + slack))
        why << "c_t = " << row.c << " exceeds t*c_bar = " << row.c_upper << "; ";
    if (!(row.c >= row.c_lower - slack))
        why << "c_t = " << row.c << " below inf F(omega) - sup h_t = " << row.c_lower << "; ";
    if (!(row.subsolution_margin >= ctx.delta() - slack))
        why << "subsolution margin " << row.subsolution_margin << " below delta = " << ctx.delta()
            << "; ";
    if (!(row.min_cone_margin > 0.0)) why << "cone margin " << row.min_cone_margin << " not positive; ";
    const double rhs_inf = ctx.h_t(s.t).min() + s.c;
    if (!(rhs_inf > ctx.op().boundary_sup()))
        why << "inf (h_t + c_t) = " << rhs_inf << " not above sup over the cone boundary "
            << ctx.op().boundary_sup() << "; ";
    if (!std::isnan(s.diagnostics.xi_min) && !(s.diagnostics.xi_min > 0.0))
        why << "adjoint kernel not positive (xi_min = " << s.diagnostics.xi_min << "); ";
    const std::string msg = why.str();
    if (!msg.empty())
        throw MonitorBreach("monitor breach at t = " + format_double(s.t) + ": " + msg, monitor_csv(log));
}

}  // namespace

PathResult run_path(const OperatorSpec& op, const HermitianField& omega, const HermitianField& chi,
                    const ScalarField& h, const ScalarField& u_bar_start, const ScalarField& u_sub,
                    const PathConfig& cfg, const StepObserver& on_accept) {
    const PathContext ctx(op, omega, chi, h, u_bar_start, u_sub, cfg);
    const GeometryPtr& geom = ctx.geometry();

    PathResult result{ContinuityState{0.0, ScalarField(geom, 0.0), 0.0, 0, {}, {}},
                      {},
                      ctx.c_bar(),
                      ctx.delta(),
                      ctx.c_lower(1.0),
                      ctx.u_bar()};

    auto accept = [&](ContinuityState s, bool final) {
        if (cfg.track_adjoint_kernel || final) s.diagnostics.xi_min = adjoint_kernel(ctx, s.phi).xi_min;
        result.log.push_back(monitor_row(ctx, s));
        check_monitors(ctx, s, result.log);
        if (on_accept) on_accept(s);
        result.final_state = std::move(s);
    };

    ContinuityState state = solve_at_t(ctx, result.final_state, 0.0);
    accept(state, false);

    double t = 0.0;
    double dt = cfg.t_step_init;
    int clean_steps = 0;
    bool retrying = false;
    while (t < 1.0) {
        // snap so that accumulated rounding in t does not leave a sliver step
        const double t_next = (t + dt > 1.0 - 1e-9 * dt) ? 1.0 : t + dt;
        try {
            ContinuityState next = solve_at_t(ctx, result.final_state, t_next);
            t = t_next;
            accept(std::move(next), t == 1.0);
            if (!retrying && ++clean_steps >= 2) {
                dt = std::min(2.0 * dt, cfg.t_step_init);
                clean_steps = 0;
            }
            retrying = false;
        } catch (const StepFailure& e) {
            dt *= 0.5;
            clean_steps = 0;
            retrying = true;
            if (dt < cfg.t_step_min)
                throw PathFailure(std::string("step size fell below t_step_min after: ") + e.what() +
                                  "\n" + monitor_csv(result.log));
        } catch (const DomainError& e) {
            dt *= 0.5;
            clean_steps = 0;
            retrying = true;
            if (dt < cfg.t_step_min)
                throw PathFailure(std::string("cone exit along the path: ") + e.what() + "\n" +
                                  monitor_csv(result.log));
        }
    }
    return result;
}

// ---------------------------------------------------------------------------

AttainedSlopeReport verify_attained_slope(const PathResult& result, const OperatorSpec& op,
                                          const HermitianField& omega, const HermitianField& chi,
                                          const ScalarField& h, const std::vector<ScalarField>& trials,
                                          double newton_tol, double allowance, double trial_tolerance) {
    AttainedSlopeReport rep;
    rep.c1 = result.final_state.c;
    const ScalarField u = result.solution();
    const ScalarField gap = operator_field(op, lambda_of(omega, chi, u), omega.geometry()) - h;
    rep.oscillation = gap.max() - gap.min();
    rep.oscillation_threshold = 10.0 * newton_tol + allowance;
    rep.oscillation_ok = rep.oscillation <= rep.oscillation_threshold;

    rep.trials_ok = true;
    for (std::size_t k = 0; k < trials.size(); ++k) {
        const LambdaField lambda = lambda_of(omega, chi, trials[k]);
        if (first_cone_violation(op, lambda) < lambda.size()) continue;
        ++rep.admissible_trials;
        const double v = (operator_field(op, lambda, omega.geometry()) - h).max();
        if (v < rep.min_trial_slope) {
            rep.min_trial_slope = v;
            rep.worst_trial = k;
        }
        if (v < rep.c1 - trial_tolerance) rep.trials_ok = false;
    }
    return rep;
}

ScalarField sup_normalized(const ScalarField& phi) {
    ScalarField out = phi;
    out += -phi.max();
    return out;
}

}  // namespace subslope
