#pragma once

// Continuity method for F(u_bar + phi_t) = h_t + c_t,  h_t = (1 - t) h_bar + t h,
// with damped Newton on the augmented unknown (phi, c) and path monitors
//   (a) c_t <= t c_bar
//   (b) c_t >= inf_M F(omega) - sup_M h_t
//   (c) min_M [f_inf(lambda(u_sub)) - h_t - c_t] >= delta
// checked at every accepted t.

#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "subslope/subsolution.hpp"

namespace subslope {

struct PathConfig {
    double t_step_init = 0.1;
    double t_step_min = 1e-4;
    double newton_tol = 1e-10;   // L-infinity residual
    int max_newton = 30;
    double damping = 0.5;        // backtracking factor
    double delta_margin = 0.0;   // minimum subsolution margin required at start
    double monitor_slack = 1e-8;
    bool track_adjoint_kernel = false;  // extract xi at every accepted t (final t always)

    void validate() const;
};

struct Diagnostics {
    double c_bar = 0.0;
    double residual = 0.0;
    double min_cone_margin = 0.0;
    double subsolution_margin = 0.0;
    double xi_min = std::numeric_limits<double>::quiet_NaN();
};

struct ContinuityState {
    double t = 0.0;
    ScalarField phi;  // mean zero
    double c = 0.0;
    int newton_iters = 0;
    std::vector<double> residual_history;
    Diagnostics diagnostics;
};

struct MonitorRow {
    double t = 0.0;
    double c = 0.0;
    double residual = 0.0;
    int newton_iters = 0;
    double min_cone_margin = 0.0;
    double subsolution_margin = 0.0;
    double c_upper = 0.0;  // t * c_bar
    double c_lower = 0.0;  // inf F(omega) - sup h_t
};

/// Header plus one line per row, full round-trip precision.
std::string monitor_csv(const std::vector<MonitorRow>& rows);

/// Per-point weights K(x) of the discrete map psi -> dd-bar psi + Z(d psi):
///   (dd-bar psi + Z(d psi))(y) = sum_s weights[s] * psi(y - offsets[s]).
struct FormStencil {
    std::vector<std::vector<int>> offsets;
    std::vector<CMatrix> weights;
};

FormStencil form_stencil(const GeometryPtr& geom);

/// Coefficients P(x) with dF = Re tr(P dG) at each point, i.e. P = V diag(f_i) V^*
/// for chi-orthonormal generalized eigenvectors V of (base, chi).
std::vector<CMatrix> linearization_coefficients(const OperatorSpec& op, const HermitianField& base,
                                                const HermitianField& chi);

/// L(psi) = sum_{ij} F^{ij} [dd-bar psi + Z(d psi)]_{ji} at the assembled form `base`.
ScalarField linearized_apply(const OperatorSpec& op, const GridGeometry& geom,
                             const HermitianField& chi, const HermitianField& base,
                             const ScalarField& psi);

/// Sparse matrix of L on the grid (row = point, column = stencil neighbour).
Eigen::SparseMatrix<double> assemble_linearization(const std::vector<CMatrix>& coeffs,
                                                   const GeometryPtr& geom,
                                                   const FormStencil& stencil);

/// Everything fixed along one continuation path.
class PathContext {
public:
    PathContext(OperatorSpec op, HermitianField omega, HermitianField chi, ScalarField h,
                ScalarField u_bar, ScalarField u_sub, PathConfig cfg);

    const OperatorSpec& op() const { return op_; }
    const GeometryPtr& geometry() const { return omega_.geometry(); }
    const HermitianField& omega() const { return omega_; }
    const HermitianField& chi() const { return chi_; }
    const ScalarField& h() const { return h_; }
    const ScalarField& h_bar() const { return h_bar_; }
    const ScalarField& u_bar() const { return u_bar_; }
    const ScalarField& u_sub() const { return u_sub_; }
    const PathConfig& config() const { return cfg_; }
    const FormStencil& stencil() const { return stencil_; }

    double c_bar() const { return c_bar_; }
    /// min_M (f_inf(lambda(u_sub)) - h) - c_bar (+inf when f_inf is unbounded).
    double delta() const { return delta_; }
    double inf_f_omega() const { return inf_f_omega_; }
    const std::vector<double>& f_inf_sub() const { return f_inf_sub_; }

    /// h_t = h_bar + t (h - h_bar).
    ScalarField h_t(double t) const;
    /// inf F(omega) - sup h_t.
    double c_lower(double t) const;

private:
    OperatorSpec op_;
    HermitianField omega_;
    HermitianField chi_;
    ScalarField h_;
    ScalarField u_bar_;
    ScalarField u_sub_;
    ScalarField h_bar_;
    PathConfig cfg_;
    FormStencil stencil_;
    double c_bar_ = 0.0;
    double delta_ = 0.0;
    double inf_f_omega_ = 0.0;
    std::vector<double> f_inf_sub_;
};

/// Residual F(u_bar + phi) - h_t - c.
ScalarField path_residual(const PathContext& ctx, const ScalarField& phi, double c, double t);

/// Solves L(dphi) - dc = -r with mean(dphi) = 0.
std::pair<ScalarField, double> newton_step(const PathContext& ctx, const ContinuityState& state,
                                           const ScalarField& h_t);

/// Damped Newton at t, warm-started from `state`. Throws StepFailure when
/// max_newton is exceeded or backtracking cannot keep the cone.
ContinuityState solve_at_t(const PathContext& ctx, const ContinuityState& state, double t);

struct AdjointKernel {
    ScalarField xi;           // sum xi * w = 1, w = cell volume * det(chi)
    double xi_min = 0.0;
    double residual = 0.0;    // ||L^* xi||_inf relative to ||L||
};

/// Kernel of the weighted adjoint of L at the potential u.
AdjointKernel adjoint_kernel(const OperatorSpec& op, const HermitianField& omega,
                             const HermitianField& chi, const ScalarField& u);

/// Same at u_bar + phi.
AdjointKernel adjoint_kernel(const PathContext& ctx, const ScalarField& phi);

struct PathResult {
    ContinuityState final_state;
    std::vector<MonitorRow> log;
    double c_bar = 0.0;
    double delta = 0.0;
    double sigma_lower = 0.0;  // inf F(omega) - sup h
    ScalarField u_bar;
    /// u_bar + phi at t = 1.
    ScalarField solution() const { return u_bar + final_state.phi; }
};

/// Marches t from 0 to 1. Throws NotSubsolution if u_sub fails the shifted
/// subsolution test, MonitorBreach on any monitor violation, PathFailure if the
/// step falls below t_step_min. on_accept sees every accepted state.
using StepObserver = std::function<void(const ContinuityState&)>;
PathResult run_path(const OperatorSpec& op, const HermitianField& omega, const HermitianField& chi,
                    const ScalarField& h, const ScalarField& u_bar_start, const ScalarField& u_sub,
                    const PathConfig& cfg, const StepObserver& on_accept = {});

struct AttainedSlopeReport {
    double c1 = 0.0;
    double oscillation = 0.0;           // max - min of F(u) - h
    double oscillation_threshold = 0.0;
    bool oscillation_ok = false;
    double min_trial_slope = kInfinity;  // min over admissible trials of max (F(u') - h)
    std::size_t admissible_trials = 0;
    std::size_t worst_trial = 0;
    bool trials_ok = false;
    bool all_pass() const { return oscillation_ok && trials_ok; }
};

/// Checks that the converged constant is the sub-slope: F(u) - h is constant,
/// and no trial potential has max (F(u') - h) below c_1 - trial_tolerance.
AttainedSlopeReport verify_attained_slope(const PathResult& result, const OperatorSpec& op,
                                          const HermitianField& omega, const HermitianField& chi,
                                          const ScalarField& h, const std::vector<ScalarField>& trials,
                                          double newton_tol, double allowance = 0.0,
                                          double trial_tolerance = 1e-6);

/// phi - max(phi): the sup-normalized potential.
ScalarField sup_normalized(const ScalarField& phi);

}  // namespace subslope
