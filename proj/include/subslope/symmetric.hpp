#pragma once

// Elementary symmetric polynomials, Garding cones, and the two operator
// families f(lambda) used on eigenvalue vectors:
//   quotient(k, l):  f = log[(sigma_k / C(n,k)) / (sigma_l / C(n,l))]   on Gamma_k
//   dhym:            f = sum_i arctan(lambda_i)                          on a phase branch

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "subslope/grid.hpp"

namespace subslope {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// sigma_k(lambda), 0 <= k <= n, with sigma_0 = 1. Coefficient extraction
/// from prod(1 + lambda_i t) with compensated (error-free) updates.
double sigma(int k, const RVector& lambda);

/// sigma_k of lambda with entry i removed.
double sigma_excluding(int k, const RVector& lambda, int i);

double binomial(int n, int k);

enum class DhymBranch {
    Hypercritical,   // sum arctan > (n-1) pi/2
    Supercritical,   // sum arctan > (n-2) pi/2
    Unrestricted,    // all of R^n (the natural domain of sum arctan)
};

class ConeSpec {
public:
    enum class Kind { Garding, DhymBranch, Custom };

    /// Margin is > 0 exactly on the (open) cone.
    using MarginFn = std::function<double(const RVector&)>;

    static ConeSpec garding(int n, int k);
    static ConeSpec dhym_branch(int n, DhymBranch branch);
    static ConeSpec custom(int n, MarginFn margin, std::string name = "custom");

    Kind kind() const { return kind_; }
    int n() const { return n_; }
    int k() const { return k_; }
    double level() const { return level_; }
    DhymBranch branch() const { return branch_; }
    const std::string& name() const { return name_; }

    /// Garding: min_{i<=k} sigma_i / C(n,i). Phase branch: sum arctan - level.
    double margin(const RVector& lambda) const;
    bool contains(const RVector& lambda) const;

private:
    Kind kind_ = Kind::Garding;
    int n_ = 0;
    int k_ = 0;
    double level_ = 0.0;
    DhymBranch branch_ = DhymBranch::Supercritical;
    MarginFn custom_;
    std::string name_;
};

bool cone_contains(const ConeSpec& cone, const RVector& lambda);

class OperatorSpec {
public:
    enum class Kind { Quotient, Dhym };

    /// 0 <= l < k <= n; l = 0 means sigma_l = 1.
    static OperatorSpec quotient(int n, int k, int l);
    static OperatorSpec dhym(int n, DhymBranch branch = DhymBranch::Supercritical);

    Kind kind() const { return kind_; }
    int n() const { return n_; }
    int k() const { return k_; }
    int l() const { return l_; }
    const ConeSpec& cone() const { return cone_; }
    std::string name() const;

    /// True when f_infinity is identically +infinity on the cone.
    bool unbounded_at_infinity() const { return kind_ == Kind::Quotient && l_ == 0; }

    /// sup of f over the cone boundary (-infinity for quotients, the branch
    /// level for dHYM).
    double boundary_sup() const;

private:
    Kind kind_ = Kind::Quotient;
    int n_ = 0;
    int k_ = 0;
    int l_ = 0;
    ConeSpec cone_;
};

/// All of these throw DomainError when lambda lies outside op.cone().
double f_eval(const OperatorSpec& op, const RVector& lambda);
RVector f_grad(const OperatorSpec& op, const RVector& lambda);
/// lim_{R->inf} f(lambda with lambda_i = R).
double f_infinity_i(const OperatorSpec& op, const RVector& lambda, int i);
/// min_i f_infinity_i; +infinity for quotients with l = 0.
double f_infinity(const OperatorSpec& op, const RVector& lambda);

struct ConditionSample {
    RVector lambda;
    RVector gradient;
    bool gradient_positive = false;
    double max_hessian_eigenvalue = 0.0;  // finite-difference Hessian
    bool concave = false;
    bool concavity_asserted = false;      // false where concavity is only recorded
    std::vector<double> scaling_values;   // f(t lambda), t = 1, 2, 4, 8
    bool scaling_monotone = false;
};

struct ConditionReport {
    std::vector<ConditionSample> samples;
    bool ellipticity_ok = true;       // f_i > 0 everywhere
    bool concavity_ok = true;         // on asserted samples
    bool scaling_ok = true;
    bool condition_iii_applicable = true;  // false for dHYM (bounded phase)
    std::string note;
    bool all_pass() const { return ellipticity_ok && concavity_ok && scaling_ok; }
};

/// Concavity tolerance on the largest FD-Hessian eigenvalue.
inline constexpr double kConcavityTolerance = 1e-6;

/// Checks ellipticity, concavity (FD Hessian, step 1e-4 (1 + |lambda|)), and
/// growth of t -> f(t lambda) at each sample.
ConditionReport check_conditions(const OperatorSpec& op, const std::vector<RVector>& samples);

}  // namespace subslope
