#pragma once

// Band-limited analytic fields: finite sums of c, c cos(k.x), c sin(k.x) with
// integer wave vectors k over the 2n real coordinates. Values and derivatives
// are exact, which is what manufactured right-hand sides need.

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "subslope/grid.hpp"

namespace subslope {

struct TrigTerm {
    enum class Kind { Constant, Cos, Sin };
    Kind kind = Kind::Constant;
    double coeff = 0.0;
    std::vector<int> wave;  // one integer per real coordinate
};

class TrigSeries {
public:
    explicit TrigSeries(int real_dims = 0) : dims_(real_dims) {}

    /// Parses sums like "0.5*cos(x1) - 0.2*sin(2*x1 + y2) + pi/2".
    /// Variables are x1, y1, ..., xn, yn; wave numbers must be integers.
    static TrigSeries parse(std::string_view text, int n);

    int real_dims() const { return dims_; }
    const std::vector<TrigTerm>& terms() const { return terms_; }
    void add(TrigTerm term);

    double value(std::span<const double> x) const;
    RVector gradient(std::span<const double> x) const;
    Eigen::MatrixXd hessian(std::span<const double> x) const;

    /// True if some term oscillates along a coordinate that is inactive in geom.
    bool depends_on_inactive(const GridGeometry& geom) const;

    ScalarField sample(const GeometryPtr& geom) const;

    TrigSeries& operator*=(double s);

private:
    int dims_;
    std::vector<TrigTerm> terms_;
};

/// Random band-limited series over the active coordinates of geom: every wave
/// vector with 1 <= max|k_c| <= max_mode (one representative of each +/- pair),
/// cos and sin coefficients drawn from N(0, 1) and scaled by amplitude / sqrt(#terms).
TrigSeries random_trig_series(const GridGeometry& geom, int max_mode, double amplitude,
                              std::mt19937_64& rng);

}  // namespace subslope
