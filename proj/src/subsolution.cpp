#include "subslope/subsolution.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "subslope/errors.hpp"

namespace subslope {

SubsolutionCheck is_c_subsolution(const OperatorSpec& op, const LambdaField& lambda,
                                  const ScalarField& h, double shift) {
    if (lambda.size() != h.size()) throw GeometryMismatch("is_c_subsolution: lambda and h sizes differ");
    const std::vector<double> finf = f_infinity_field(op, lambda);

    SubsolutionCheck out;
    out.margin.resize(lambda.size());
    out.min_margin = kInfinity;
    double sum = 0.0;
    for (std::size_t p = 0; p < lambda.size(); ++p) {
        out.margin[p] = finf[p] - h[p] - shift;
        sum += out.margin[p];
        if (out.margin[p] < out.min_margin || p == 0) {
            out.min_margin = out.margin[p];
            out.argmin = p;
        }
    }
    out.mean_margin = sum / static_cast<double>(lambda.size());
    out.is_subsolution = out.min_margin > 0.0;
    return out;
}

bool dhym_subsolution_criterion(const LambdaField& lambda, const ScalarField& h) {
    if (lambda.size() != h.size())
        throw GeometryMismatch("dhym_subsolution_criterion: lambda and h sizes differ");
    for (std::size_t p = 0; p < lambda.size(); ++p) {
        const RVector& l = lambda[p];
        for (Eigen::Index k = 0; k < l.size(); ++k) {
            double partial = 0.0;
            for (Eigen::Index i = 0; i < l.size(); ++i)
                if (i != k) partial += std::atan(l[i]);
            if (!(partial > h[p] - std::numbers::pi / 2)) return false;
        }
    }
    return true;
}

double subslope_lower_bound(const OperatorSpec& op, const HermitianField& omega,
                            const HermitianField& chi, const ScalarField& h) {
    const ScalarField f = operator_field(op, eigenvalues_wrt_chi(omega, chi), omega.geometry());
    return f.min() - h.max();
}

double max_slope(const OperatorSpec& op, const HermitianField& omega, const HermitianField& chi,
                 const ScalarField& h, const ScalarField& u) {
    const ScalarField f = operator_field(op, lambda_of(omega, chi, u), omega.geometry());
    return (f - h).max();
}

SubslopeEstimate subslope_estimate(const OperatorSpec& op, const HermitianField& omega,
                                   const HermitianField& chi, const ScalarField& h,
                                   const std::vector<ScalarField>& trials) {
    SubslopeEstimate out;
    out.trial_values.assign(trials.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t t = 0; t < trials.size(); ++t) {
        const LambdaField lambda = lambda_of(omega, chi, trials[t]);
        if (first_cone_violation(op, lambda) < lambda.size()) {
            out.skipped.push_back(t);
            continue;
        }
        const double v = (operator_field(op, lambda, omega.geometry()) - h).max();
        out.trial_values[t] = v;
        if (v < out.value) {
            out.value = v;
            out.best_trial = t;
        }
    }
    if (out.skipped.size() == trials.size())
        throw NoAdmissibleTrial("no admissible trial potential among " + std::to_string(trials.size()));
    return out;
}

SubslopeBracket subslope_bracket(const OperatorSpec& op, const HermitianField& omega,
                                 const HermitianField& chi, const ScalarField& h,
                                 const std::vector<ScalarField>& trials) {
    const SubslopeEstimate est = subslope_estimate(op, omega, chi, h, trials);
    return {subslope_lower_bound(op, omega, chi, h), est.value, trials.size(),
            trials.size() - est.skipped.size()};
}

}  // namespace subslope
