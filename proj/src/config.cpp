#include "subslope/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "subslope/errors.hpp"
#include "subslope/field_io.hpp"
#include "subslope/verification.hpp"

namespace subslope {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

template <class T>
T parse_number(std::string_view v, int line, const std::string& key) {
    T out{};
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw ConfigError("cannot read a number from '" + std::string(v) + "'", line, key);
    return out;
}

bool parse_bool(std::string_view v, int line, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("expected true or false, got '" + std::string(v) + "'", line, key);
}

TrigSeries parse_expr(std::string_view v, int n, int line, const std::string& key) {
    try {
        return TrigSeries::parse(v, n);
    } catch (const Error& e) {
        throw ConfigError(e.what(), line, key);
    }
}

constexpr std::string_view kFilePrefix = "file:";

ScalarSource scalar_source(std::string_view v, int n, const fs::path& base, int line,
                           const std::string& key) {
    ScalarSource s;
    s.line = line;
    if (v.starts_with(kFilePrefix))
        s.file = base / std::string(trim(v.substr(kFilePrefix.size())));
    else
        s.expr = parse_expr(v, n, line, key);
    return s;
}

MetricSource metric_source(std::string_view v, int n, const fs::path& base, int line,
                           const std::string& key) {
    MetricSource m;
    m.line = line;
    if (v == "identity") return m;
    if (v.starts_with(kFilePrefix)) {
        m.kind = MetricSource::Kind::File;
        m.file = base / std::string(trim(v.substr(kFilePrefix.size())));
        return m;
    }
    if (v.starts_with("diag(") && v.ends_with(")")) {
        m.kind = MetricSource::Kind::Diagonal;
        std::string_view body = v.substr(5, v.size() - 6);
        while (true) {
            const auto comma = body.find(',');
            m.diagonal.push_back(parse_expr(trim(body.substr(0, comma)), n, line, key));
            if (comma == std::string_view::npos) break;
            body = body.substr(comma + 1);
        }
        if (static_cast<int>(m.diagonal.size()) != n)
            throw ConfigError("diag(...) needs exactly n = " + std::to_string(n) + " entries", line, key);
        return m;
    }
    throw ConfigError("expected identity, diag(...), or file:<path>", line, key);
}

struct Entry {
    std::string value;
    int line = 0;
};

using Section = std::map<std::string, Entry>;

const Entry* find(const Section& s, const std::string& key) {
    const auto it = s.find(key);
    return it == s.end() ? nullptr : &it->second;
}

const Entry& require(const Section& s, const std::string& section, const std::string& key) {
    const Entry* e = find(s, key);
    if (!e) throw ConfigError("missing required key in [" + section + "]", 0, key);
    return *e;
}

void reject_unknown(const Section& s, std::initializer_list<std::string_view> known) {
    for (const auto& [key, e] : s) {
        bool ok = false;
        for (std::string_view k : known)
            ok = ok || key == k || (k == "z_*" && key.starts_with("z_"));
        if (!ok) throw ConfigError("unknown key", e.line, key);
    }
}

HermitianField sample_metric(const MetricSource& m, const GeometryPtr& geom) {
    switch (m.kind) {
        case MetricSource::Kind::Identity:
            return HermitianField::identity(geom);
        case MetricSource::Kind::File:
            return read_hermitian_raw(m.file, geom);
        case MetricSource::Kind::Diagonal: {
            HermitianField f(geom);
            for (int i = 0; i < geom->n(); ++i) {
                if (m.diagonal[i].depends_on_inactive(*geom))
                    throw ConfigError("diagonal entry varies along an inactive coordinate", m.line);
                const ScalarField d = m.diagonal[i].sample(geom);
                for (std::size_t p = 0; p < geom->size(); ++p) f(p, i, i) = d[p];
            }
            return f;
        }
    }
    return HermitianField(geom);
}

ScalarField sample_scalar(const ScalarSource& s, const GeometryPtr& geom, const char* key) {
    if (!s.expr) return read_scalar_raw(s.file, geom);
    if (s.expr->depends_on_inactive(*geom))
        throw ConfigError("expression varies along an inactive coordinate", s.line, key);
    return s.expr->sample(geom);
}

}  // namespace

ProblemSpec parse_config(std::string_view text, const fs::path& base_dir, std::string name) {
    std::map<std::string, Section> sections;
    std::string current;
    int line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("malformed section header", line_no);
            current = std::string(trim(line.substr(1, line.size() - 2)));
            if (current != "geometry" && current != "operator" && current != "fields" &&
                current != "path" && current != "trials")
                throw ConfigError("unknown section [" + current + "]", line_no);
            if (sections.count(current)) throw ConfigError("duplicate section [" + current + "]", line_no);
            sections[current];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError("expected key = value", line_no);
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (current.empty()) throw ConfigError("key outside any section", line_no, key);
        if (key.empty()) throw ConfigError("empty key", line_no);
        if (value.empty()) throw ConfigError("empty value", line_no, key);
        Section& sec = sections[current];
        if (sec.count(key)) throw ConfigError("duplicate key", line_no, key);
        sec[key] = {value, line_no};
    }

    ProblemSpec spec;
    spec.name = std::move(name);

    // [geometry]
    const Section& geo = sections["geometry"];
    reject_unknown(geo, {"n", "shape", "z_*"});
    {
        const Entry& e = require(geo, "geometry", "n");
        spec.n = parse_number<int>(e.value, e.line, "n");
        if (spec.n < 1 || spec.n > 4) throw ConfigError("n must lie in 1..4", e.line, "n");
    }
    {
        const Entry& e = require(geo, "geometry", "shape");
        for (std::string_view tok : split_ws(e.value)) spec.shape.push_back(parse_number<int>(tok, e.line, "shape"));
        if (static_cast<int>(spec.shape.size()) != 2 * spec.n)
            throw ConfigError("shape needs 2n = " + std::to_string(2 * spec.n) + " counts", e.line, "shape");
        for (int c : spec.shape)
            if (c != 1 && c < 4) throw ConfigError("counts must be 1 (inactive) or >= 4", e.line, "shape");
    }
    spec.z = ZTensor(spec.n);
    for (const auto& [key, e] : geo) {
        if (!key.starts_with("z_")) continue;
        int idx[3] = {0, 0, 0};
        std::string_view rest = std::string_view(key).substr(2);
        for (int d = 0; d < 3; ++d) {
            const auto us = rest.find('_');
            if ((d < 2) == (us == std::string_view::npos))
                throw ConfigError("z keys look like z_<i>_<j>_<k>", e.line, key);
            idx[d] = parse_number<int>(rest.substr(0, us), e.line, key);
            if (idx[d] < 1 || idx[d] > spec.n) throw ConfigError("z index out of range 1..n", e.line, key);
            if (us != std::string_view::npos) rest = rest.substr(us + 1);
        }
        const auto parts = split_ws(e.value);
        if (parts.size() != 2) throw ConfigError("z entries are '<re> <im>'", e.line, key);
        spec.z(idx[0] - 1, idx[1] - 1, idx[2] - 1) =
            Complex(parse_number<double>(parts[0], e.line, key), parse_number<double>(parts[1], e.line, key));
    }

    // [operator]
    const Section& ops = sections["operator"];
    reject_unknown(ops, {"kind", "k", "l", "branch"});
    {
        const Entry& kind = require(ops, "operator", "kind");
        try {
            if (kind.value == "quotient") {
                const Entry& k = require(ops, "operator", "k");
                const Entry* l = find(ops, "l");
                if (find(ops, "branch")) throw ConfigError("branch applies to dhym only", find(ops, "branch")->line, "branch");
                spec.op = OperatorSpec::quotient(spec.n, parse_number<int>(k.value, k.line, "k"),
                                                 l ? parse_number<int>(l->value, l->line, "l") : 0);
            } else if (kind.value == "dhym") {
                if (find(ops, "k") || find(ops, "l")) throw ConfigError("k and l apply to quotient only", kind.line, "kind");
                DhymBranch branch = DhymBranch::Supercritical;
                if (const Entry* b = find(ops, "branch")) {
                    if (b->value == "supercritical") branch = DhymBranch::Supercritical;
                    else if (b->value == "hypercritical") branch = DhymBranch::Hypercritical;
                    else if (b->value == "unrestricted") branch = DhymBranch::Unrestricted;
                    else throw ConfigError("unknown branch '" + b->value + "'", b->line, "branch");
                }
                spec.op = OperatorSpec::dhym(spec.n, branch);
            } else {
                throw ConfigError("kind must be quotient or dhym", kind.line, "kind");
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const Error& e) {
            throw ConfigError(e.what(), kind.line, "kind");
        }
    }

    // [fields]
    const Section& fields = sections["fields"];
    reject_unknown(fields, {"omega", "chi", "h", "u_sub", "u_bar", "u_star", "c_expected"});
    if (const Entry* e = find(fields, "omega")) spec.omega = metric_source(e->value, spec.n, base_dir, e->line, "omega");
    if (const Entry* e = find(fields, "chi")) spec.chi = metric_source(e->value, spec.n, base_dir, e->line, "chi");
    auto scalar = [&](const char* key) -> std::optional<ScalarSource> {
        if (const Entry* e = find(fields, key)) return scalar_source(e->value, spec.n, base_dir, e->line, key);
        return std::nullopt;
    };
    spec.h = scalar("h");
    spec.u_star = scalar("u_star");
    spec.u_sub = scalar("u_sub");
    spec.u_bar = scalar("u_bar");
    if (const Entry* e = find(fields, "c_expected")) spec.c_expected = parse_number<double>(e->value, e->line, "c_expected");
    if (spec.h && spec.u_star) throw ConfigError("give either h or u_star, not both", spec.u_star->line, "u_star");
    if (!spec.h && !spec.u_star) throw ConfigError("missing required key in [fields] (h or u_star)", 0, "h");

    // [path]
    const Section& path = sections["path"];
    reject_unknown(path, {"t_step_init", "t_step_min", "newton_tol", "max_newton", "damping",
                          "delta_margin", "monitor_slack", "track_adjoint_kernel"});
    auto real = [&](const char* key, double& dst) {
        if (const Entry* e = find(path, key)) dst = parse_number<double>(e->value, e->line, key);
    };
    real("t_step_init", spec.path.t_step_init);
    real("t_step_min", spec.path.t_step_min);
    real("newton_tol", spec.path.newton_tol);
    real("damping", spec.path.damping);
    real("delta_margin", spec.path.delta_margin);
    real("monitor_slack", spec.path.monitor_slack);
    if (const Entry* e = find(path, "max_newton")) spec.path.max_newton = parse_number<int>(e->value, e->line, "max_newton");
    if (const Entry* e = find(path, "track_adjoint_kernel"))
        spec.path.track_adjoint_kernel = parse_bool(e->value, e->line, "track_adjoint_kernel");
    try {
        spec.path.validate();
    } catch (const Error& e) {
        throw ConfigError(e.what(), 0, "[path]");
    }

    // [trials]
    const Section& trials = sections["trials"];
    reject_unknown(trials, {"count", "seed", "max_mode", "amplitude"});
    if (const Entry* e = find(trials, "count")) spec.trials.count = parse_number<std::size_t>(e->value, e->line, "count");
    if (const Entry* e = find(trials, "seed")) spec.trials.seed = parse_number<std::uint64_t>(e->value, e->line, "seed");
    if (const Entry* e = find(trials, "max_mode")) {
        spec.trials.max_mode = parse_number<int>(e->value, e->line, "max_mode");
        if (spec.trials.max_mode < 1) throw ConfigError("max_mode must be >= 1", e->line, "max_mode");
    }
    if (const Entry* e = find(trials, "amplitude")) {
        spec.trials.amplitude = parse_number<double>(e->value, e->line, "amplitude");
        if (!(spec.trials.amplitude > 0.0)) throw ConfigError("amplitude must be positive", e->line, "amplitude");
    }
    if (spec.trials.count > 0 && !spec.trials.seed)
        throw ConfigError("a seed is mandatory when count > 0", find(trials, "count")->line, "seed");

    return spec;
}

ProblemSpec load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.parent_path(), path.stem().string());
}

Problem instantiate(const ProblemSpec& spec, const std::vector<int>* shape_override) {
    const GeometryPtr geom = make_geometry(spec.n, shape_override ? *shape_override : spec.shape, spec.z);
    Problem p{geom,
              spec.op,
              sample_metric(spec.omega, geom),
              sample_metric(spec.chi, geom),
              ScalarField(geom),
              ScalarField(geom),
              ScalarField(geom),
              std::nullopt,
              spec.c_expected,
              spec.path,
              spec.trials};

    if (spec.u_star) {
        const double c = spec.c_expected.value_or(0.0);
        if (spec.u_star->expr) {
            p.u_star = spec.u_star->expr;
            p.h = manufactured_problem(p.op, p.omega, p.chi, *spec.u_star->expr, c).h;
        } else {
            p.h = manufactured_problem(p.op, p.omega, p.chi, read_scalar_raw(spec.u_star->file, geom), c).h;
        }
        if (!p.c_expected) p.c_expected = c;
    } else {
        p.h = sample_scalar(*spec.h, geom, "h");
    }
    if (spec.u_sub) p.u_sub = sample_scalar(*spec.u_sub, geom, "u_sub");
    if (spec.u_bar) {
        p.u_bar = sample_scalar(*spec.u_bar, geom, "u_bar");
    } else {
        const LambdaField lambda = lambda_of(p.omega, p.chi, p.u_sub);
        if (first_cone_violation(p.op, lambda) == lambda.size()) p.u_bar = p.u_sub;
    }
    return p;
}

std::vector<ScalarField> make_trials(const Problem& p) {
    if (p.trials.count == 0) return {};
    if (!p.trials.seed) throw ConfigError("a seed is mandatory when count > 0", 0, "seed");
    return random_admissible_trials(p.op, p.omega, p.chi, p.trials.count, *p.trials.seed,
                                    p.trials.max_mode, p.trials.amplitude);
}

}  // namespace subslope
