#pragma once

// Periodic grids on the flat torus T^{2n} and the fields that live on them.
//
// Real coordinates are ordered (x^1, y^1, x^2, y^2, ..., x^n, y^n), so complex
// coordinate i (0-based) owns real coordinates 2i and 2i+1. Samples are stored
// row-major over that order (the last coordinate varies fastest).

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace subslope {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

/// Coefficients A[i][j][k] of the gradient correction
///   Z_{ij} = sum_k A[i][j][k] d_k u + conj(A[j][i][k] d_k u),  d_k = d/dz^k.
/// Indices are 0-based here.
class ZTensor {
public:
    ZTensor() = default;
    explicit ZTensor(int n) : n_(n), a_(static_cast<std::size_t>(n) * n * n) {}

    int n() const { return n_; }
    Complex& operator()(int i, int j, int k) { return a_[(i * n_ + j) * n_ + k]; }
    const Complex& operator()(int i, int j, int k) const { return a_[(i * n_ + j) * n_ + k]; }
    bool is_zero() const;

    bool operator==(const ZTensor&) const = default;

private:
    int n_ = 0;
    std::vector<Complex> a_;
};

class GridGeometry {
public:
    /// shape holds 2n per-coordinate sample counts; a count of 1 marks an
    /// inactive coordinate, every other count must be >= 4.
    GridGeometry(int n, std::vector<int> shape, ZTensor z = {});

    int n() const { return n_; }
    int real_dims() const { return 2 * n_; }
    const std::vector<int>& shape() const { return shape_; }
    std::size_t size() const { return size_; }

    bool active(int coord) const { return shape_[coord] > 1; }
    double spacing(int coord) const { return spacing_[coord]; }
    double cell_volume() const;

    const ZTensor& z_tensor() const { return z_; }
    bool has_z() const { return !z_.is_zero(); }

    /// Coordinate value x = index * spacing of point idx along coord.
    double coordinate(std::size_t idx, int coord) const;
    std::vector<double> point(std::size_t idx) const;
    int component(std::size_t idx, int coord) const {
        return static_cast<int>((idx / stride_[coord]) % static_cast<std::size_t>(shape_[coord]));
    }

    /// Periodic neighbour of idx displaced by offset samples along coord.
    std::size_t shifted(std::size_t idx, int coord, int offset) const;

    /// Same sampling (n and shape). The Z tensor is not compared.
    bool same_grid(const GridGeometry& other) const {
        return n_ == other.n_ && shape_ == other.shape_;
    }

private:
    int n_;
    std::vector<int> shape_;
    std::vector<double> spacing_;
    std::vector<std::size_t> stride_;
    std::size_t size_ = 1;
    ZTensor z_;
};

using GeometryPtr = std::shared_ptr<const GridGeometry>;

GeometryPtr make_geometry(int n, std::vector<int> shape, ZTensor z = {});

/// Real function sampled on a grid (potentials, right-hand sides).
class ScalarField {
public:
    ScalarField(GeometryPtr geom, double fill = 0.0);
    ScalarField(GeometryPtr geom, std::vector<double> values);

    const GeometryPtr& geometry() const { return geom_; }
    std::size_t size() const { return values_.size(); }

    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    double min() const;
    double max() const;
    double mean() const;
    bool all_finite() const;

    ScalarField& operator+=(const ScalarField& other);
    ScalarField& operator-=(const ScalarField& other);
    ScalarField& operator*=(double s);
    ScalarField& operator+=(double s);

private:
    GeometryPtr geom_;
    std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

/// L-infinity norm of a - b.
double max_abs_diff(const ScalarField& a, const ScalarField& b);

/// Per-point n x n complex matrix field (forms such as omega, chi, omega_u).
class HermitianField {
public:
    explicit HermitianField(GeometryPtr geom);  // zero field

    static HermitianField identity(GeometryPtr geom);
    static HermitianField constant(GeometryPtr geom, const CMatrix& m);

    const GeometryPtr& geometry() const { return geom_; }
    int n() const { return n_; }
    std::size_t size() const { return geom_->size(); }

    Complex operator()(std::size_t p, int i, int j) const { return data_[offset(p, i, j)]; }
    Complex& operator()(std::size_t p, int i, int j) { return data_[offset(p, i, j)]; }

    CMatrix at(std::size_t p) const;
    void set(std::size_t p, const CMatrix& m);

    /// Raw storage: per point, the n x n matrix row-major.
    std::span<const Complex> raw() const { return data_; }
    std::span<Complex> raw() { return data_; }

    /// max over points of ||M - M^*||_inf (entrywise).
    double hermitian_defect() const;

    HermitianField& operator+=(const HermitianField& other);

private:
    std::size_t offset(std::size_t p, int i, int j) const {
        return (p * n_ + i) * n_ + j;
    }

    GeometryPtr geom_;
    int n_;
    std::vector<Complex> data_;
};

HermitianField operator+(HermitianField a, const HermitianField& b);

/// Throws GeometryMismatch unless both geometries describe the same grid.
void require_same_grid(const GridGeometry& a, const GridGeometry& b, const char* what);

}  // namespace subslope
