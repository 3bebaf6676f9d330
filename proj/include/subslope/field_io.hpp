#pragma once

// Raw little-endian float64 arrays with a plain-text ".hdr" sidecar:
//
//   kind scalar|hermitian
//   n 2
//   shape 64 64 1 1
//   dtype float64-le
//
// Hermitian fields store interleaved (re, im) pairs, per point the n x n
// matrix row-major. Points are row-major over the grid.

#include <filesystem>
#include <string>

#include "subslope/grid.hpp"

namespace subslope {

struct FieldHeader {
    std::string kind;  // "scalar" or "hermitian"
    int n = 0;
    std::vector<int> shape;
};

FieldHeader read_header(const std::filesystem::path& data_path);

void write_scalar_raw(const std::filesystem::path& path, const ScalarField& f);
void write_hermitian_raw(const std::filesystem::path& path, const HermitianField& f);

/// Reads into the given geometry; throws GeometryMismatch if the header disagrees.
ScalarField read_scalar_raw(const std::filesystem::path& path, const GeometryPtr& geom);
HermitianField read_hermitian_raw(const std::filesystem::path& path, const GeometryPtr& geom);

/// One row per point: active coordinates then the value.
void write_scalar_csv(const std::filesystem::path& path, const ScalarField& f);

}  // namespace subslope
