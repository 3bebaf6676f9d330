#include "subslope/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "subslope/errors.hpp"

namespace subslope {

bool ZTensor::is_zero() const {
    return std::all_of(a_.begin(), a_.end(), [](Complex c) { return c == Complex{}; });
}

GridGeometry::GridGeometry(int n, std::vector<int> shape, ZTensor z)
    : n_(n), shape_(std::move(shape)), z_(std::move(z)) {
    if (n_ < 1) throw InvalidArgument("complex dimension must be >= 1");
    if (static_cast<int>(shape_.size()) != 2 * n_)
        throw InvalidArgument("shape must list 2n = " + std::to_string(2 * n_) +
                              " sample counts, got " + std::to_string(shape_.size()));
    if (z_.n() == 0) z_ = ZTensor(n_);
    if (z_.n() != n_) throw InvalidArgument("z_tensor dimension does not match n");

    spacing_.resize(shape_.size());
    stride_.resize(shape_.size());
    for (std::size_t c = 0; c < shape_.size(); ++c) {
        const int count = shape_[c];
        if (count < 1 || count == 2 || count == 3)
            throw InvalidArgument("coordinate " + std::to_string(c) +
                                  ": sample count must be 1 (inactive) or >= 4, got " +
                                  std::to_string(count));
        spacing_[c] = 2.0 * std::numbers::pi / count;
    }
    for (int c = static_cast<int>(shape_.size()) - 1; c >= 0; --c) {
        stride_[c] = size_;
        size_ *= static_cast<std::size_t>(shape_[c]);
    }
}

double GridGeometry::cell_volume() const {
    double v = 1.0;
    for (int c = 0; c < real_dims(); ++c)
        if (active(c)) v *= spacing_[c];
    return v;
}

double GridGeometry::coordinate(std::size_t idx, int coord) const {
    return component(idx, coord) * spacing_[coord];
}

std::vector<double> GridGeometry::point(std::size_t idx) const {
    std::vector<double> x(shape_.size());
    for (int c = 0; c < real_dims(); ++c) x[c] = coordinate(idx, c);
    return x;
}

std::size_t GridGeometry::shifted(std::size_t idx, int coord, int offset) const {
    const int count = shape_[coord];
    const int comp = component(idx, coord);
    int moved = (comp + offset) % count;
    if (moved < 0) moved += count;
    return idx + (static_cast<std::ptrdiff_t>(moved) - comp) *
                     static_cast<std::ptrdiff_t>(stride_[coord]);
}

GeometryPtr make_geometry(int n, std::vector<int> shape, ZTensor z) {
    return std::make_shared<const GridGeometry>(n, std::move(shape), std::move(z));
}

void require_same_grid(const GridGeometry& a, const GridGeometry& b, const char* what) {
    if (!a.same_grid(b)) throw GeometryMismatch(std::string(what) + ": fields live on different grids");
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField(GeometryPtr geom, double fill)
    : geom_(std::move(geom)), values_(geom_->size(), fill) {}

ScalarField::ScalarField(GeometryPtr geom, std::vector<double> values)
    : geom_(std::move(geom)), values_(std::move(values)) {
    if (values_.size() != geom_->size())
        throw InvalidArgument("scalar field has " + std::to_string(values_.size()) +
                              " values, grid has " + std::to_string(geom_->size()) + " points");
    if (!all_finite()) throw InvalidArgument("scalar field contains non-finite values");
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double ScalarField::mean() const {
    return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}

bool ScalarField::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
    require_same_grid(*geom_, *other.geom_, "field addition");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
    require_same_grid(*geom_, *other.geom_, "field subtraction");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

ScalarField& ScalarField::operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
}

ScalarField& ScalarField::operator+=(double s) {
    for (double& v : values_) v += s;
    return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

double max_abs_diff(const ScalarField& a, const ScalarField& b) {
    require_same_grid(*a.geometry(), *b.geometry(), "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// ---------------------------------------------------------------------------

HermitianField::HermitianField(GeometryPtr geom)
    : geom_(std::move(geom)), n_(geom_->n()),
      data_(geom_->size() * static_cast<std::size_t>(n_) * n_) {}

HermitianField HermitianField::identity(GeometryPtr geom) {
    const int n = geom->n();
    return constant(std::move(geom), CMatrix::Identity(n, n));
}

HermitianField HermitianField::constant(GeometryPtr geom, const CMatrix& m) {
    HermitianField f(std::move(geom));
    if (m.rows() != f.n_ || m.cols() != f.n_) throw InvalidArgument("constant matrix has wrong size");
    for (std::size_t p = 0; p < f.size(); ++p) f.set(p, m);
    return f;
}

CMatrix HermitianField::at(std::size_t p) const {
    CMatrix m(n_, n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) m(i, j) = data_[offset(p, i, j)];
    return m;
}

void HermitianField::set(std::size_t p, const CMatrix& m) {
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) data_[offset(p, i, j)] = m(i, j);
}

double HermitianField::hermitian_defect() const {
    double worst = 0.0;
    for (std::size_t p = 0; p < size(); ++p)
        for (int i = 0; i < n_; ++i)
            for (int j = i; j < n_; ++j)
                worst = std::max(worst, std::abs((*this)(p, i, j) - std::conj((*this)(p, j, i))));
    return worst;
}

HermitianField& HermitianField::operator+=(const HermitianField& other) {
    require_same_grid(*geom_, *other.geom_, "hermitian field addition");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

HermitianField operator+(HermitianField a, const HermitianField& b) { return a += b; }

}  // namespace subslope
