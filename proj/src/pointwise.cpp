#include "subslope/pointwise.hpp"

#include <algorithm>
#include <sstream>

#include "subslope/errors.hpp"
#include "subslope/parallel.hpp"

namespace subslope {

namespace {

[[noreturn]] void throw_cone_violation(const OperatorSpec& op, const LambdaField& lambda,
                                       std::size_t p) {
    std::ostringstream msg;
    msg << "eigenvalues (" << lambda[p].transpose() << ") at grid point " << p
        << " lie outside the cone " << op.cone().name();
    throw DomainError(msg.str());
}

}  // namespace

LambdaField lambda_of(const HermitianField& omega, const HermitianField& chi, const ScalarField& u) {
    return eigenvalues_wrt_chi(assemble_omega_u(omega, u, *omega.geometry()), chi);
}

ScalarField operator_field(const OperatorSpec& op, const LambdaField& lambda, const GeometryPtr& geom) {
    if (const std::size_t bad = first_cone_violation(op, lambda); bad < lambda.size())
        throw_cone_violation(op, lambda, bad);
    std::vector<double> v(lambda.size());
    parallel_for(lambda.size(), [&](std::size_t p) { v[p] = f_eval(op, lambda[p]); });
    return ScalarField(geom, std::move(v));
}

std::vector<double> f_infinity_field(const OperatorSpec& op, const LambdaField& lambda) {
    if (const std::size_t bad = first_cone_violation(op, lambda); bad < lambda.size())
        throw_cone_violation(op, lambda, bad);
    std::vector<double> v(lambda.size());
    parallel_for(lambda.size(), [&](std::size_t p) { v[p] = f_infinity(op, lambda[p]); });
    return v;
}

double min_cone_margin(const OperatorSpec& op, const LambdaField& lambda) {
    double m = kInfinity;
    for (const RVector& l : lambda) m = std::min(m, op.cone().margin(l));
    return m;
}

std::size_t first_cone_violation(const OperatorSpec& op, const LambdaField& lambda) {
    for (std::size_t p = 0; p < lambda.size(); ++p)
        if (!op.cone().contains(lambda[p])) return p;
    return lambda.size();
}

}  // namespace subslope
