#include "berslab/theta.hpp"

#include "berslab/parallel.hpp"

#include <cmath>
#include <fstream>
#include <unordered_map>

namespace berslab {

MoebiusTransform::MoebiusTransform(Complex a, Complex b, Complex c, Complex d) : a_(a), b_(b), c_(c), d_(d)
{
    if (std::abs(a * d - b * c - 1.0) > 1e-12)
        throw ValidationError("determinant", "Moebius matrix must have ad - bc = 1");
    fix_sign();
}

MoebiusTransform MoebiusTransform::normalized(Complex a, Complex b, Complex c, Complex d)
{
    const Complex det = a * d - b * c;
    if (!(std::abs(det) > 0.0) || !std::isfinite(std::abs(det)))
        throw ValidationError("determinant", "Moebius matrix is singular");
    const Complex s = std::sqrt(det);
    MoebiusTransform m;
    m.a_ = a / s;
    m.b_ = b / s;
    m.c_ = c / s;
    m.d_ = d / s;
    m.fix_sign();
    return m;
}

MoebiusTransform MoebiusTransform::hyperbolic(double p, double q, double lambda)
{
    if (!(p < q) || !(lambda > 1.0)) throw ValidationError("generator", "hyperbolic needs p < q and lambda > 1");
    // conjugate z -> lambda z by M = [[q, p], [1, 1]], which sends 0 to p and infinity to q
    const MoebiusTransform m = normalized(q, p, 1.0, 1.0);
    return m * dilation(lambda) * m.inverse();
}

MoebiusTransform MoebiusTransform::dilation(double lambda)
{
    if (!(lambda > 0.0)) throw ValidationError("generator", "dilation factor must be positive");
    const double s = std::sqrt(lambda);
    return {s, 0.0, 0.0, 1.0 / s};
}

MoebiusTransform MoebiusTransform::inverse() const
{
    MoebiusTransform m;
    m.a_ = d_;
    m.b_ = -b_;
    m.c_ = -c_;
    m.d_ = a_;
    m.fix_sign();
    return m;
}

bool MoebiusTransform::approx_equal(const MoebiusTransform& o, double tol) const
{
    auto diff = [&](double sign) {
        return std::max({std::abs(a_ - sign * o.a_), std::abs(b_ - sign * o.b_), std::abs(c_ - sign * o.c_),
                         std::abs(d_ - sign * o.d_)});
    };
    return std::min(diff(1.0), diff(-1.0)) <= tol;
}

MoebiusTransform operator*(const MoebiusTransform& f, const MoebiusTransform& g)
{
    MoebiusTransform m;
    m.a_ = f.a_ * g.a_ + f.b_ * g.c_;
    m.b_ = f.a_ * g.b_ + f.b_ * g.d_;
    m.c_ = f.c_ * g.a_ + f.d_ * g.c_;
    m.d_ = f.c_ * g.b_ + f.d_ * g.d_;
    m.fix_sign();
    return m;
}

void MoebiusTransform::fix_sign()
{
    const double scale = std::max({std::abs(a_), std::abs(b_), std::abs(c_), std::abs(d_)});
    for (Complex x : {a_, b_, c_, d_}) {
        if (std::abs(x) <= 1e-12 * scale) continue;
        const bool flip = x.real() < 0.0 || (x.real() == 0.0 && x.imag() < 0.0);
        if (flip) {
            a_ = -a_;
            b_ = -b_;
            c_ = -c_;
            d_ = -d_;
        }
        return;
    }
}

namespace {

Complex complex_from_json(const nlohmann::json& j, const char* key)
{
    if (!j.contains(key)) throw ValidationError("generator", std::string("generator lacks '") + key + "'");
    const auto& v = j.at(key);
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2) return {v[0].get<double>(), v[1].get<double>()};
    throw ValidationError("generator", std::string("'") + key + "' must be a number or [re, im]");
}

double entry_size(const MoebiusTransform& m)
{
    return std::abs(m.a()) + std::abs(m.b()) + std::abs(m.c()) + std::abs(m.d());
}

// Sign-invariant bucket for deduplication; relative width 1e-7. Unit determinant keeps the
// entry size at least sqrt(2).
long long bucket_of(const MoebiusTransform& m)
{
    return static_cast<long long>(std::floor(std::log(entry_size(m)) * 1e7));
}

} // namespace

std::vector<MoebiusTransform> generators_from_json(const nlohmann::json& j)
{
    if (!j.is_array()) throw ValidationError("generator", "generators must be a JSON array");
    std::vector<MoebiusTransform> out;
    try {
        for (const auto& g : j)
            out.push_back(MoebiusTransform::normalized(complex_from_json(g, "a"), complex_from_json(g, "b"),
                                                       complex_from_json(g, "c"), complex_from_json(g, "d")));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("generator", e.what());
    }
    return out;
}

std::vector<MoebiusTransform> load_generators(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ValidationError("file", "cannot open generator file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("json", "'" + path + "': " + e.what());
    }
    return generators_from_json(j);
}

nlohmann::json generators_to_json(const std::vector<MoebiusTransform>& gens)
{
    nlohmann::json out = nlohmann::json::array();
    auto pair = [](Complex z) { return nlohmann::json::array({z.real(), z.imag()}); };
    for (const auto& g : gens) out.push_back({{"a", pair(g.a())}, {"b", pair(g.b())}, {"c", pair(g.c())}, {"d", pair(g.d())}});
    return out;
}

GroupBall enumerate_ball(const std::vector<MoebiusTransform>& generators, std::size_t max_word_length)
{
    GroupBall ball;
    ball.generators = generators;
    ball.max_word_length = max_word_length;
    ball.strictly_hyperbolic = !generators.empty();
    for (const auto& g : generators) {
        const bool real = std::abs(g.a().imag()) + std::abs(g.b().imag()) + std::abs(g.c().imag()) +
                              std::abs(g.d().imag()) <= 1e-12;
        if (!real || !(std::abs(g.trace().real()) > 2.0 + 1e-9)) ball.strictly_hyperbolic = false;
    }

    // letter 2i is generator i, letter 2i + 1 its inverse
    std::vector<MoebiusTransform> letters;
    for (const auto& g : generators) {
        letters.push_back(g);
        letters.push_back(g.inverse());
    }

    std::unordered_multimap<long long, std::size_t> index;
    auto find = [&](const MoebiusTransform& m) {
        const long long b = bucket_of(m);
        for (long long k = b - 1; k <= b + 1; ++k) {
            auto [lo, hi] = index.equal_range(k);
            for (auto it = lo; it != hi; ++it)
                if (ball.elements[it->second].approx_equal(m, 1e-10 * std::max(1.0, entry_size(m)))) return true;
        }
        return false;
    };
    auto insert = [&](const MoebiusTransform& m, std::size_t length) {
        if (ball.elements.size() >= max_ball_elements)
            throw ValidationError("ball_too_large", "group ball exceeds " + std::to_string(max_ball_elements) + " elements");
        index.emplace(bucket_of(m), ball.elements.size());
        ball.elements.push_back(m);
        ball.word_length.push_back(length);
    };

    insert(MoebiusTransform{}, 0);
    // frontier entries: element index and outermost letter (or none for the identity)
    struct Word {
        std::size_t element;
        std::size_t last;
    };
    constexpr std::size_t none = static_cast<std::size_t>(-1);
    std::vector<Word> frontier{{0, none}};
    for (std::size_t length = 1; length <= max_word_length; ++length) {
        std::vector<Word> next;
        for (const Word& w : frontier) {
            for (std::size_t l = 0; l < letters.size(); ++l) {
                if (w.last != none && l == (w.last ^ 1u)) continue;
                const MoebiusTransform m = letters[l] * ball.elements[w.element];
                if (find(m)) continue;
                insert(m, length);
                next.push_back({ball.elements.size() - 1, l});
            }
        }
        frontier = std::move(next);
    }
    return ball;
}

ThetaValue theta_series(const HolomorphicFunction& phi, const GroupBall& ball, Complex z)
{
    if (ball.elements.empty()) throw ValidationError("empty_ball", "group ball has no elements");
    const std::size_t n = ball.elements.size();
    std::vector<Complex> terms(n);
    parallel_for(n, [&](std::size_t i) {
        const MoebiusTransform& g = ball.elements[i];
        const Complex gz = g(z);
        const Complex dg = g.derivative(z);
        Complex v;
        try {
            v = phi.eval(gz) * dg * dg;
        } catch (const NearPoleError&) {
            throw ValidationError("pole_orbit", "the orbit of z meets a pole of phi");
        }
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw ValidationError("pole_orbit", "the orbit of z meets a pole of phi");
        terms[i] = v;
    });

    ThetaValue out;
    out.shell_magnitudes.assign(ball.shell_count(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        out.value += terms[i];
        out.shell_magnitudes[ball.word_length[i]] += std::abs(terms[i]);
    }
    out.tail_estimate = out.shell_magnitudes.back();
    const std::size_t last = ball.shell_count() - 1;
    // last three shells, never comparing against the identity shell
    const std::size_t first = std::max<std::size_t>(2, last > 0 ? last - 1 : 0);
    for (std::size_t k = first; k <= last; ++k)
        if (!(out.shell_magnitudes[k] < out.shell_magnitudes[k - 1])) out.convergent = false;
    return out;
}

double equivariance_residual(const HolomorphicFunction& phi, const GroupBall& ball,
                             const MoebiusTransform& gamma, const std::vector<Complex>& samples)
{
    double worst = 0.0;
    for (const Complex& z : samples) {
        const Complex dg = gamma.derivative(z);
        const Complex lhs = theta_series(phi, ball, gamma(z)).value * dg * dg;
        worst = std::max(worst, std::abs(lhs - theta_series(phi, ball, z).value));
    }
    return worst;
}

std::vector<EquivarianceRow> equivariance_table(const HolomorphicFunction& phi,
                                                const std::vector<MoebiusTransform>& generators,
                                                std::size_t max_word_length,
                                                const std::vector<Complex>& samples)
{
    const GroupBall full = enumerate_ball(generators, max_word_length);
    std::vector<EquivarianceRow> rows;
    for (std::size_t len = 0; len <= max_word_length; ++len) {
        // shells are stored in order, so the smaller ball is a prefix
        GroupBall ball = full;
        ball.max_word_length = len;
        std::size_t count = 0;
        while (count < full.elements.size() && full.word_length[count] <= len) ++count;
        ball.elements.resize(count);
        ball.word_length.resize(count);

        EquivarianceRow row;
        row.max_word_length = len;
        row.elements = count;
        for (const auto& g : generators) row.residual = std::max(row.residual, equivariance_residual(phi, ball, g, samples));
        for (const Complex& z : samples) row.tail_estimate = std::max(row.tail_estimate, theta_series(phi, ball, z).tail_estimate);
        rows.push_back(row);
    }
    return rows;
}

void to_json(nlohmann::json& j, const EquivarianceRow& r)
{
    j = {{"L", r.max_word_length}, {"elements", r.elements}, {"residual", r.residual}, {"tail_estimate", r.tail_estimate}};
}

} // namespace berslab
