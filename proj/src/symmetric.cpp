#include "subslope/symmetric.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "subslope/errors.hpp"
#include "subslope/linalg.hpp"

namespace subslope {

namespace {

struct Compensated {
    double hi = 0.0;
    double lo = 0.0;
};

// Coefficients e_0..e_kmax of prod_{i != skip} (1 + lambda_i t).
double elementary(int k, const RVector& lambda, int skip) {
    const int n = static_cast<int>(lambda.size());
    if (k == 0) return 1.0;
    std::vector<Compensated> e(static_cast<std::size_t>(k) + 1);
    e[0].hi = 1.0;
    int used = 0;
    for (int i = 0; i < n; ++i) {
        if (i == skip) continue;
        ++used;
        const double x = lambda[i];
        for (int j = std::min(used, k); j >= 1; --j) {
            // e_j += x * e_{j-1}, carrying rounding errors in lo.
            const double prod = x * e[j - 1].hi;
            const double prod_err = std::fma(x, e[j - 1].hi, -prod);
            const double sum = e[j].hi + prod;
            const double bb = sum - e[j].hi;
            const double sum_err = (e[j].hi - (sum - bb)) + (prod - bb);
            e[j].lo += x * e[j - 1].lo + prod_err + sum_err;
            e[j].hi = sum;
        }
    }
    return e[k].hi + e[k].lo;
}

void require_in_cone(const OperatorSpec& op, const RVector& lambda) {
    if (lambda.size() != op.n())
        throw DomainError("eigenvalue vector has length " + std::to_string(lambda.size()) +
                          ", operator expects " + std::to_string(op.n()));
    if (!op.cone().contains(lambda)) {
        std::ostringstream msg;
        msg << "lambda = (" << lambda.transpose() << ") lies outside the cone " << op.cone().name();
        throw DomainError(msg.str());
    }
}

}  // namespace

double sigma(int k, const RVector& lambda) {
    if (k < 0 || k > lambda.size())
        throw DomainError("sigma_k needs 0 <= k <= n, got k = " + std::to_string(k));
    return elementary(k, lambda, -1);
}

double sigma_excluding(int k, const RVector& lambda, int i) {
    if (k < 0 || k > lambda.size() - 1) {
        if (k < 0) throw DomainError("sigma_k needs k >= 0");
        return 0.0;  // more factors than remaining entries
    }
    return elementary(k, lambda, i);
}

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// ---------------------------------------------------------------------------

ConeSpec ConeSpec::garding(int n, int k) {
    if (k < 1 || k > n)
        throw InvalidArgument("Garding cone needs 1 <= k <= n, got k = " + std::to_string(k) +
                              ", n = " + std::to_string(n));
    ConeSpec c;
    c.kind_ = Kind::Garding;
    c.n_ = n;
    c.k_ = k;
    c.name_ = "Gamma_" + std::to_string(k);
    return c;
}

ConeSpec ConeSpec::dhym_branch(int n, DhymBranch branch) {
    if (n < 1) throw InvalidArgument("dimension must be >= 1");
    ConeSpec c;
    c.kind_ = Kind::DhymBranch;
    c.n_ = n;
    c.branch_ = branch;
    switch (branch) {
        case DhymBranch::Hypercritical:
            c.level_ = (n - 1) * std::numbers::pi / 2;
            c.name_ = "hypercritical";
            break;
        case DhymBranch::Supercritical:
            c.level_ = (n - 2) * std::numbers::pi / 2;
            c.name_ = "supercritical";
            break;
        case DhymBranch::Unrestricted:
            c.level_ = -n * std::numbers::pi / 2;
            c.name_ = "unrestricted";
            break;
    }
    return c;
}

ConeSpec ConeSpec::custom(int n, MarginFn margin, std::string name) {
    ConeSpec c;
    c.kind_ = Kind::Custom;
    c.n_ = n;
    c.custom_ = std::move(margin);
    c.name_ = std::move(name);
    return c;
}

double ConeSpec::margin(const RVector& lambda) const {
    switch (kind_) {
        case Kind::Garding: {
            double m = kInfinity;
            for (int i = 1; i <= k_; ++i) m = std::min(m, sigma(i, lambda) / binomial(n_, i));
            return m;
        }
        case Kind::DhymBranch: {
            if (branch_ == DhymBranch::Unrestricted) {
                // every finite vector is admissible
                return lambda.allFinite() ? kInfinity : -kInfinity;
            }
            double s = 0.0;
            for (Eigen::Index i = 0; i < lambda.size(); ++i) s += std::atan(lambda[i]);
            return s - level_;
        }
        case Kind::Custom:
            return custom_(lambda);
    }
    return -kInfinity;
}

bool ConeSpec::contains(const RVector& lambda) const { return margin(lambda) > 0.0; }

bool cone_contains(const ConeSpec& cone, const RVector& lambda) { return cone.contains(lambda); }

// ---------------------------------------------------------------------------

OperatorSpec OperatorSpec::quotient(int n, int k, int l) {
    if (!(0 <= l && l < k && k <= n))
        throw InvalidArgument("quotient operator needs 0 <= l < k <= n, got k = " +
                              std::to_string(k) + ", l = " + std::to_string(l) +
                              ", n = " + std::to_string(n));
    OperatorSpec op;
    op.kind_ = Kind::Quotient;
    op.n_ = n;
    op.k_ = k;
    op.l_ = l;
    op.cone_ = ConeSpec::garding(n, k);
    return op;
}

OperatorSpec OperatorSpec::dhym(int n, DhymBranch branch) {
    OperatorSpec op;
    op.kind_ = Kind::Dhym;
    op.n_ = n;
    op.cone_ = ConeSpec::dhym_branch(n, branch);
    return op;
}

std::string OperatorSpec::name() const {
    if (kind_ == Kind::Quotient)
        return "quotient(" + std::to_string(k_) + "," + std::to_string(l_) + ") n=" + std::to_string(n_);
    return "dhym[" + cone_.name() + "] n=" + std::to_string(n_);
}

double OperatorSpec::boundary_sup() const {
    if (kind_ == Kind::Quotient) return -kInfinity;
    return cone_.branch() == DhymBranch::Unrestricted ? -kInfinity : cone_.level();
}

// ---------------------------------------------------------------------------

double f_eval(const OperatorSpec& op, const RVector& lambda) {
    require_in_cone(op, lambda);
    const int n = op.n();
    if (op.kind() == OperatorSpec::Kind::Dhym) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += std::atan(lambda[i]);
        return s;
    }
    const double num = sigma(op.k(), lambda) / binomial(n, op.k());
    const double den = sigma(op.l(), lambda) / binomial(n, op.l());
    return std::log(num / den);
}

RVector f_grad(const OperatorSpec& op, const RVector& lambda) {
    require_in_cone(op, lambda);
    const int n = op.n();
    RVector g(n);
    if (op.kind() == OperatorSpec::Kind::Dhym) {
        for (int i = 0; i < n; ++i) g[i] = 1.0 / (1.0 + lambda[i] * lambda[i]);
        return g;
    }
    const double sk = sigma(op.k(), lambda);
    const double sl = op.l() > 0 ? sigma(op.l(), lambda) : 1.0;
    for (int i = 0; i < n; ++i) {
        double gi = sigma_excluding(op.k() - 1, lambda, i) / sk;
        if (op.l() > 0) gi -= sigma_excluding(op.l() - 1, lambda, i) / sl;
        g[i] = gi;
    }
    if (!(g.array() > 0.0).all()) {
        std::ostringstream msg;
        msg << "non-positive gradient (" << g.transpose() << ") inside the cone at ("
            << lambda.transpose() << ")";
        throw DomainError(msg.str());
    }
    return g;
}

double f_infinity_i(const OperatorSpec& op, const RVector& lambda, int i) {
    require_in_cone(op, lambda);
    const int n = op.n();
    if (op.kind() == OperatorSpec::Kind::Dhym) {
        double s = std::numbers::pi / 2;
        for (int j = 0; j < n; ++j)
            if (j != i) s += std::atan(lambda[j]);
        return s;
    }
    if (op.l() == 0) return kInfinity;
    const double num = sigma_excluding(op.k() - 1, lambda, i) / binomial(n, op.k());
    const double den = sigma_excluding(op.l() - 1, lambda, i) / binomial(n, op.l());
    return std::log(num / den);
}

double f_infinity(const OperatorSpec& op, const RVector& lambda) {
    double m = kInfinity;
    for (int i = 0; i < op.n(); ++i) m = std::min(m, f_infinity_i(op, lambda, i));
    return m;
}

// ---------------------------------------------------------------------------

namespace {

double fd_hessian_max_eigenvalue(const OperatorSpec& op, const RVector& lambda) {
    const int n = op.n();
    const double step = 1e-4 * (1.0 + lambda.cwiseAbs().maxCoeff());
    const double f0 = f_eval(op, lambda);
    auto f_at = [&](int i, double si, int j, double sj) {
        RVector x = lambda;
        x[i] += si;
        x[j] += sj;
        return f_eval(op, x);
    };
    CMatrix hess(n, n);
    for (int i = 0; i < n; ++i) {
        RVector xp = lambda, xm = lambda;
        xp[i] += step;
        xm[i] -= step;
        hess(i, i) = (f_eval(op, xp) - 2.0 * f0 + f_eval(op, xm)) / (step * step);
        for (int j = i + 1; j < n; ++j) {
            const double v = (f_at(i, step, j, step) - f_at(i, step, j, -step) -
                              f_at(i, -step, j, step) + f_at(i, -step, j, -step)) /
                             (4.0 * step * step);
            hess(i, j) = v;
            hess(j, i) = v;
        }
    }
    return jacobi_eigh(hess).values[0];
}

}  // namespace

ConditionReport check_conditions(const OperatorSpec& op, const std::vector<RVector>& samples) {
    ConditionReport report;
    const bool dhym = op.kind() == OperatorSpec::Kind::Dhym;
    if (dhym) {
        report.condition_iii_applicable = false;
        report.note =
            "dHYM: condition (iii) not satisfied (the phase is bounded by n*pi/2); concavity "
            "asserted only on the hypercritical branch";
    }
    const ConeSpec hyper = ConeSpec::dhym_branch(op.n(), DhymBranch::Hypercritical);

    for (const RVector& lambda : samples) {
        ConditionSample s;
        s.lambda = lambda;
        s.gradient = f_grad(op, lambda);
        s.gradient_positive = (s.gradient.array() > 0.0).all();
        s.max_hessian_eigenvalue = fd_hessian_max_eigenvalue(op, lambda);
        s.concave = s.max_hessian_eigenvalue <= kConcavityTolerance;
        s.concavity_asserted = !dhym || hyper.contains(lambda);

        s.scaling_monotone = true;
        for (double t : {1.0, 2.0, 4.0, 8.0}) {
            const RVector scaled = t * lambda;
            if (!op.cone().contains(scaled)) {
                s.scaling_monotone = false;
                break;
            }
            const double v = f_eval(op, scaled);
            if (!s.scaling_values.empty() && !(v > s.scaling_values.back())) s.scaling_monotone = false;
            s.scaling_values.push_back(v);
        }

        report.ellipticity_ok = report.ellipticity_ok && s.gradient_positive;
        if (s.concavity_asserted) report.concavity_ok = report.concavity_ok && s.concave;
        if (report.condition_iii_applicable)
            report.scaling_ok = report.scaling_ok && s.scaling_monotone;
        report.samples.push_back(std::move(s));
    }
    return report;
}

}  // namespace subslope
