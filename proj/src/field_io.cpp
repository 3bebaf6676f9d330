#include "subslope/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "subslope/errors.hpp"

namespace subslope {

namespace fs = std::filesystem;

namespace {

fs::path header_path(const fs::path& data) {
    fs::path h = data;
    h += ".hdr";
    return h;
}

std::uint64_t to_le(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(v);
    return v;
}

void write_header(const fs::path& data, const std::string& kind, const GridGeometry& g) {
    std::ofstream out(header_path(data));
    if (!out) throw IoError("cannot write " + header_path(data).string());
    out << "kind " << kind << "\nn " << g.n() << "\nshape";
    for (int c : g.shape()) out << ' ' << c;
    out << "\ndtype float64-le\n";
}

void write_doubles(const fs::path& path, const std::vector<double>& values) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    for (double v : values) {
        const std::uint64_t bits = to_le(std::bit_cast<std::uint64_t>(v));
        out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
    if (!out) throw IoError("short write to " + path.string());
}

std::vector<double> read_doubles(const fs::path& path, std::size_t count) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::vector<double> out(count);
    for (double& v : out) {
        std::uint64_t bits = 0;
        in.read(reinterpret_cast<char*>(&bits), sizeof bits);
        if (!in) throw IoError(path.string() + ": fewer than " + std::to_string(count) + " values");
        v = std::bit_cast<double>(to_le(bits));
    }
    if (in.peek() != std::char_traits<char>::eof())
        throw IoError(path.string() + ": more than " + std::to_string(count) + " values");
    return out;
}

void check_header(const fs::path& path, const FieldHeader& h, const std::string& kind,
                  const GridGeometry& g) {
    if (h.kind != kind)
        throw IoError(path.string() + ": expected a " + kind + " field, header says " + h.kind);
    if (h.n != g.n() || h.shape != g.shape())
        throw GeometryMismatch(path.string() + ": header grid does not match the problem grid");
}

}  // namespace

FieldHeader read_header(const fs::path& data_path) {
    const fs::path hp = header_path(data_path);
    std::ifstream in(hp);
    if (!in) throw IoError("cannot read header " + hp.string());
    FieldHeader h;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        if (key == "kind") {
            ls >> h.kind;
        } else if (key == "n") {
            ls >> h.n;
        } else if (key == "shape") {
            int c = 0;
            while (ls >> c) h.shape.push_back(c);
        } else if (key == "dtype") {
            std::string d;
            ls >> d;
            if (d != "float64-le") throw IoError(hp.string() + ": unsupported dtype " + d);
        } else {
            throw IoError(hp.string() + ": unknown header key " + key);
        }
    }
    if (h.kind.empty() || h.n < 1 || h.shape.size() != static_cast<std::size_t>(2 * h.n))
        throw IoError(hp.string() + ": incomplete header");
    return h;
}

void write_scalar_raw(const fs::path& path, const ScalarField& f) {
    write_doubles(path, std::vector<double>(f.values().begin(), f.values().end()));
    write_header(path, "scalar", *f.geometry());
}

void write_hermitian_raw(const fs::path& path, const HermitianField& f) {
    std::vector<double> v;
    v.reserve(2 * f.raw().size());
    for (const Complex& z : f.raw()) {
        v.push_back(z.real());
        v.push_back(z.imag());
    }
    write_doubles(path, v);
    write_header(path, "hermitian", *f.geometry());
}

ScalarField read_scalar_raw(const fs::path& path, const GeometryPtr& geom) {
    check_header(path, read_header(path), "scalar", *geom);
    return ScalarField(geom, read_doubles(path, geom->size()));
}

HermitianField read_hermitian_raw(const fs::path& path, const GeometryPtr& geom) {
    check_header(path, read_header(path), "hermitian", *geom);
    HermitianField f(geom);
    const std::vector<double> v = read_doubles(path, 2 * f.raw().size());
    for (std::size_t i = 0; i < f.raw().size(); ++i) f.raw()[i] = Complex(v[2 * i], v[2 * i + 1]);
    return f;
}

void write_scalar_csv(const fs::path& path, const ScalarField& f) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    const GridGeometry& g = *f.geometry();
    std::vector<int> active;
    for (int c = 0; c < g.real_dims(); ++c)
        if (g.active(c)) active.push_back(c);
    for (int c : active) out << (c % 2 == 0 ? "x" : "y") << (c / 2 + 1) << ',';
    out << "value\n";
    char buf[32];
    for (std::size_t p = 0; p < g.size(); ++p) {
        for (int c : active) {
            std::snprintf(buf, sizeof buf, "%.17g,", g.coordinate(p, c));
            out << buf;
        }
        std::snprintf(buf, sizeof buf, "%.17g\n", f[p]);
        out << buf;
    }
}

}  // namespace subslope
