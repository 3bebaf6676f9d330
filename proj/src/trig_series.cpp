#include "subslope/trig_series.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "subslope/errors.hpp"

namespace subslope {

namespace {

class Parser {
public:
    Parser(std::string_view text, int n) : text_(text), n_(n) {}

    TrigSeries parse() {
        TrigSeries series(2 * n_);
        skip_ws();
        if (at_end()) fail("empty expression");
        double sign = 1.0;
        if (peek() == '+' || peek() == '-') sign = take() == '-' ? -1.0 : 1.0;
        add_term(series, sign);
        while (true) {
            skip_ws();
            if (at_end()) break;
            const char op = take();
            if (op != '+' && op != '-') fail(std::string("unexpected '") + op + "'");
            add_term(series, op == '-' ? -1.0 : 1.0);
        }
        return series;
    }

private:
    void add_term(TrigSeries& series, double sign) {
        TrigTerm term;
        term.wave.assign(static_cast<std::size_t>(2 * n_), 0);
        double coeff = sign;
        bool have_trig = false;
        bool first = true;
        while (true) {
            skip_ws();
            if (!first) {
                if (at_end() || (peek() != '*' && peek() != '/')) break;
                const char op = take();
                skip_ws();
                if (op == '/') {
                    const double d = factor_number();
                    if (d == 0.0) fail("division by zero");
                    coeff /= d;
                    continue;
                }
            }
            first = false;
            if (starts_with("cos") || starts_with("sin")) {
                if (have_trig) fail("at most one cos/sin per term");
                have_trig = true;
                term.kind = starts_with("cos") ? TrigTerm::Kind::Cos : TrigTerm::Kind::Sin;
                pos_ += 3;
                skip_ws();
                expect('(');
                linear(term.wave);
                expect(')');
            } else {
                coeff *= factor_number();
            }
        }
        term.coeff = coeff;
        series.add(std::move(term));
    }

    double factor_number() {
        skip_ws();
        if (starts_with("pi")) {
            pos_ += 2;
            return std::numbers::pi;
        }
        const std::size_t start = pos_;
        while (!at_end() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.' ||
                             peek() == 'e' || peek() == 'E' ||
                             ((peek() == '-' || peek() == '+') && pos_ > start &&
                              (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E'))))
            ++pos_;
        if (pos_ == start) fail("expected a number, pi, cos(...) or sin(...)");
        const std::string token(text_.substr(start, pos_ - start));
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(token, &used);
        } catch (const std::exception&) {
            fail("bad number '" + token + "'");
        }
        if (used != token.size()) fail("bad number '" + token + "'");
        return v;
    }

    // [+-] [int *] var { [+-] [int *] var }
    void linear(std::vector<int>& wave) {
        bool first = true;
        while (true) {
            skip_ws();
            int sign = 1;
            if (!at_end() && (peek() == '+' || peek() == '-')) {
                sign = take() == '-' ? -1 : 1;
                skip_ws();
            } else if (!first) {
                break;
            }
            first = false;
            int mult = 1;
            if (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) {
                const std::size_t start = pos_;
                while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
                mult = std::stoi(std::string(text_.substr(start, pos_ - start)));
                skip_ws();
                if (!at_end() && peek() == '.') fail("wave numbers must be integers");
                if (!at_end() && peek() == '*') {
                    ++pos_;
                    skip_ws();
                }
            }
            if (at_end() || (peek() != 'x' && peek() != 'y')) fail("expected a variable x<i> or y<i>");
            const bool is_y = take() == 'y';
            const std::size_t start = pos_;
            while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
            if (pos_ == start) fail("variable needs an index, e.g. x1");
            const int index = std::stoi(std::string(text_.substr(start, pos_ - start)));
            if (index < 1 || index > n_)
                fail("variable index " + std::to_string(index) + " out of range 1.." + std::to_string(n_));
            wave[static_cast<std::size_t>(2 * (index - 1) + (is_y ? 1 : 0))] += sign * mult;
        }
    }

    void expect(char c) {
        skip_ws();
        if (at_end() || peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }
    bool starts_with(std::string_view s) const { return text_.substr(pos_).starts_with(s); }
    void skip_ws() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
    }
    bool at_end() const { return pos_ >= text_.size(); }
    char peek() const { return text_[pos_]; }
    char take() { return text_[pos_++]; }
    [[noreturn]] void fail(const std::string& what) const {
        throw InvalidArgument("expression '" + std::string(text_) + "' at column " +
                              std::to_string(pos_ + 1) + ": " + what);
    }

    std::string_view text_;
    int n_;
    std::size_t pos_ = 0;
};

double phase(const TrigTerm& t, std::span<const double> x) {
    double s = 0.0;
    for (std::size_t c = 0; c < t.wave.size(); ++c) s += t.wave[c] * x[c];
    return s;
}

}  // namespace

TrigSeries TrigSeries::parse(std::string_view text, int n) { return Parser(text, n).parse(); }

void TrigSeries::add(TrigTerm term) {
    if (static_cast<int>(term.wave.size()) != dims_) {
        if (term.kind != TrigTerm::Kind::Constant || !term.wave.empty())
            throw InvalidArgument("trig term has wrong number of wave components");
        term.wave.assign(static_cast<std::size_t>(dims_), 0);
    }
    if (term.coeff != 0.0) terms_.push_back(std::move(term));
}

double TrigSeries::value(std::span<const double> x) const {
    double v = 0.0;
    for (const TrigTerm& t : terms_) {
        switch (t.kind) {
            case TrigTerm::Kind::Constant: v += t.coeff; break;
            case TrigTerm::Kind::Cos: v += t.coeff * std::cos(phase(t, x)); break;
            case TrigTerm::Kind::Sin: v += t.coeff * std::sin(phase(t, x)); break;
        }
    }
    return v;
}

RVector TrigSeries::gradient(std::span<const double> x) const {
    RVector g = RVector::Zero(dims_);
    for (const TrigTerm& t : terms_) {
        if (t.kind == TrigTerm::Kind::Constant) continue;
        const double ph = phase(t, x);
        const double d = t.kind == TrigTerm::Kind::Cos ? -t.coeff * std::sin(ph) : t.coeff * std::cos(ph);
        for (int c = 0; c < dims_; ++c) g[c] += d * t.wave[c];
    }
    return g;
}

Eigen::MatrixXd TrigSeries::hessian(std::span<const double> x) const {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dims_, dims_);
    for (const TrigTerm& t : terms_) {
        if (t.kind == TrigTerm::Kind::Constant) continue;
        const double ph = phase(t, x);
        const double d = t.kind == TrigTerm::Kind::Cos ? -t.coeff * std::cos(ph) : -t.coeff * std::sin(ph);
        for (int a = 0; a < dims_; ++a)
            for (int b = 0; b < dims_; ++b) h(a, b) += d * t.wave[a] * t.wave[b];
    }
    return h;
}

bool TrigSeries::depends_on_inactive(const GridGeometry& geom) const {
    for (const TrigTerm& t : terms_)
        for (int c = 0; c < dims_; ++c)
            if (t.wave[c] != 0 && !geom.active(c)) return true;
    return false;
}

ScalarField TrigSeries::sample(const GeometryPtr& geom) const {
    if (geom->real_dims() != dims_) throw GeometryMismatch("expression dimension does not match grid");
    std::vector<double> v(geom->size());
    for (std::size_t p = 0; p < v.size(); ++p) v[p] = value(geom->point(p));
    return ScalarField(geom, std::move(v));
}

TrigSeries& TrigSeries::operator*=(double s) {
    for (TrigTerm& t : terms_) t.coeff *= s;
    return *this;
}

TrigSeries random_trig_series(const GridGeometry& geom, int max_mode, double amplitude,
                              std::mt19937_64& rng) {
    const int dims = geom.real_dims();
    std::vector<int> active;
    for (int c = 0; c < dims; ++c)
        if (geom.active(c)) active.push_back(c);

    std::vector<std::vector<int>> waves;
    std::vector<int> k(active.size(), -max_mode);
    const auto advance = [&] {
        for (std::size_t i = 0; i < k.size(); ++i) {
            if (++k[i] <= max_mode) return true;
            k[i] = -max_mode;
        }
        return false;
    };
    if (!active.empty()) {
        do {
            // keep one of each +/- pair: first nonzero component positive
            auto nz = std::find_if(k.begin(), k.end(), [](int v) { return v != 0; });
            if (nz == k.end() || *nz < 0) continue;
            std::vector<int> w(static_cast<std::size_t>(dims), 0);
            for (std::size_t i = 0; i < active.size(); ++i) w[active[i]] = k[i];
            waves.push_back(std::move(w));
        } while (advance());
    }

    TrigSeries s(dims);
    if (waves.empty()) return s;
    std::normal_distribution<double> normal(0.0, 1.0);
    const double scale = amplitude / std::sqrt(2.0 * static_cast<double>(waves.size()));
    for (const auto& w : waves) {
        s.add(TrigTerm{TrigTerm::Kind::Cos, scale * normal(rng), w});
        s.add(TrigTerm{TrigTerm::Kind::Sin, scale * normal(rng), w});
    }
    return s;
}

}  // namespace subslope
