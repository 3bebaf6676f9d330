#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "subslope/config.hpp"
#include "subslope/errors.hpp"
#include "subslope/field_io.hpp"

using namespace subslope;
namespace fs = std::filesystem;

namespace {

const char* kBase = R"(
[geometry]
n = 1
shape = 16 1
[operator]
kind = quotient
k = 1
l = 0
[fields]
h = 0.1*cos(x1)
[trials]
count = 3
seed = 4
)";

ConfigError parse_error(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e;
    }
    FAIL("config parsed unexpectedly:\n" << text);
    return ConfigError("unreachable");
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
    const auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    return s.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("builtin configs parse and instantiate") {
    REQUIRE(builtin_configs().size() >= 7);
    for (const auto& [name, text] : builtin_configs()) {
        CAPTURE(name);
        const ProblemSpec spec = parse_config(text, ".", name);
        const Problem p = instantiate(spec);
        CHECK(p.geometry->size() > 0);
        CHECK(p.h.all_finite());
        CHECK(make_trials(p).size() <= p.trials.count);
        if (spec.manufactured()) CHECK(p.c_expected.has_value());
    }
}

TEST_CASE("minimal config") {
    const ProblemSpec s = parse_config(kBase);
    CHECK(s.n == 1);
    CHECK(s.shape == std::vector<int>{16, 1});
    CHECK(s.op.name() == OperatorSpec::quotient(1, 1, 0).name());
    CHECK(s.trials.count == 3);
    CHECK(*s.trials.seed == 4);
    CHECK(!s.manufactured());

    const std::vector<int> finer{32, 1};
    const Problem p = instantiate(s, &finer);
    CHECK(p.geometry->size() == 32);
    CHECK(p.u_bar.max() == 0.0);
    CHECK(make_trials(p).size() == 3);
}

TEST_CASE("config errors name the line and key") {
    ConfigError e = parse_error(replace(kBase, "k = 1", "k = 1\nwidth = 3"));
    CHECK(e.line() == 8);
    CHECK(e.key() == "width");

    e = parse_error(replace(kBase, "n = 1\n", ""));
    CHECK(e.key() == "n");

    e = parse_error(replace(kBase, "seed = 4\n", ""));
    CHECK(e.key() == "seed");

    e = parse_error(replace(kBase, "count = 3", "count = three"));
    CHECK(e.key() == "count");
    CHECK(e.line() == 12);

    e = parse_error(replace(kBase, "h = 0.1*cos(x1)", "h = 0.1*cos(x1)\nu_star = 0.2*cos(x1)"));
    CHECK(e.key() == "u_star");

    e = parse_error(std::string(kBase) + "[extras]\nfoo = 1\n");
    CHECK(e.line() == 14);
    CHECK(std::string(e.what()).find("unknown section") != std::string::npos);

    e = parse_error(replace(kBase, "shape = 16 1", "shape = 3 1"));
    CHECK(e.key() == "shape");

    // inactive-coordinate dependence is caught when sampling
    const ProblemSpec flat = parse_config(replace(kBase, "h = 0.1*cos(x1)", "h = 0.1*cos(y1)"));
    try {
        instantiate(flat);
        FAIL("expected ConfigError");
    } catch (const ConfigError& err) {
        CHECK(err.key() == "h");
        CHECK(err.line() == 10);
    }

    e = parse_error(replace(kBase, "l = 0", "l = 0\nbranch = hypercritical"));
    CHECK(e.key() == "branch");
}

TEST_CASE("fields from raw files") {
    const fs::path dir = fs::temp_directory_path() / "subslope_config_test";
    fs::create_directories(dir);
    const GeometryPtr g = make_geometry(1, {16, 1});
    ScalarField h(g, 0.0);
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = 0.01 * static_cast<double>(i);
    write_scalar_raw(dir / "h.bin", h);

    const std::string text = replace(kBase, "h = 0.1*cos(x1)", "h = file:h.bin");
    {
        std::ofstream(dir / "p.conf") << text;
    }
    const Problem p = instantiate(load_config(dir / "p.conf"));
    CHECK(max_abs_diff(p.h, h) == 0.0);

    const std::vector<int> other{32, 1};
    CHECK_THROWS_AS(instantiate(load_config(dir / "p.conf"), &other), GeometryMismatch);
    fs::remove_all(dir);
}
