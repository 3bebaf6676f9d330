#pragma once

// Problem description files. Flat "key = value" lines grouped in sections:
//
//   [geometry]  n, shape, z_<i>_<j>_<k> = <re> <im>   (indices 1-based)
//   [operator]  kind = quotient | dhym, k, l, branch = supercritical | hypercritical | unrestricted
//   [fields]    omega, chi = identity | diag(<expr>, ...) | file:<path>
//               h, u_sub, u_bar, u_star = <expr> | file:<path>
//               c_expected = <real>
//   [path]      t_step_init, t_step_min, newton_tol, max_newton, damping,
//               delta_margin, monitor_slack, track_adjoint_kernel
//   [trials]    count, seed, max_mode, amplitude
//
// <expr> is a sum of c, c*cos(k.x), c*sin(k.x) terms (see TrigSeries::parse).
// Giving u_star instead of h makes the problem manufactured: h = F(u*) - c_expected.
// '#' starts a comment. File paths are relative to the config file.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "subslope/continuity.hpp"
#include "subslope/trig_series.hpp"

namespace subslope {

struct ScalarSource {
    std::optional<TrigSeries> expr;
    std::filesystem::path file;  // used when expr is empty
    int line = 0;
};

struct MetricSource {
    enum class Kind { Identity, Diagonal, File };
    Kind kind = Kind::Identity;
    std::vector<TrigSeries> diagonal;
    std::filesystem::path file;
    int line = 0;
};

struct TrialConfig {
    std::size_t count = 0;
    std::optional<std::uint64_t> seed;  // mandatory when count > 0
    int max_mode = 3;
    double amplitude = 0.5;
};

/// Parsed but unsampled problem; resolution can still be changed.
struct ProblemSpec {
    std::string name;
    int n = 0;
    std::vector<int> shape;
    ZTensor z;
    OperatorSpec op;
    MetricSource omega;
    MetricSource chi;
    std::optional<ScalarSource> h;
    std::optional<ScalarSource> u_star;
    std::optional<ScalarSource> u_sub;
    std::optional<ScalarSource> u_bar;
    std::optional<double> c_expected;
    PathConfig path;
    TrialConfig trials;

    bool manufactured() const { return u_star.has_value(); }
};

/// Throws ConfigError naming the line and key.
ProblemSpec parse_config(std::string_view text, const std::filesystem::path& base_dir = ".",
                         std::string name = "config");
ProblemSpec load_config(const std::filesystem::path& path);

/// Fields sampled on a concrete grid.
struct Problem {
    GeometryPtr geometry;
    OperatorSpec op;
    HermitianField omega;
    HermitianField chi;
    ScalarField h;
    ScalarField u_sub;
    ScalarField u_bar;
    std::optional<TrigSeries> u_star;
    std::optional<double> c_expected;
    PathConfig path;
    TrialConfig trials;
};

/// Samples spec on its own shape, or on shape_override when given.
Problem instantiate(const ProblemSpec& spec, const std::vector<int>* shape_override = nullptr);

/// Shipped example problems, name -> config text.
const std::map<std::string, std::string>& builtin_configs();

/// Trial ensemble from the [trials] section; empty when count = 0.
std::vector<ScalarField> make_trials(const Problem& p);

}  // namespace subslope
