#include "berslab/polygon.hpp"

#include "berslab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace berslab {

std::vector<double> PolygonSpec::exponents() const
{
    std::vector<double> e(alphas_.size());
    std::transform(alphas_.begin(), alphas_.end(), e.begin(), [](double a) { return a - 1.0; });
    return e;
}

PolygonSpec validate_polygon(std::vector<double> alphas, std::vector<double> prevertices, Complex d0,
                             Complex d1, bool require_normalized)
{
    const std::size_t n = alphas.size();
    if (prevertices.size() != n)
        throw ValidationError("length_mismatch", "alphas and prevertices must have equal length");
    if (n < 3)
        throw ValidationError("too_few_vertices", "a polygon needs n >= 3 vertices");
    for (std::size_t j = 0; j < n; ++j) {
        if (!(alphas[j] > 0.0 && alphas[j] < 1.0)) {
            std::ostringstream os;
            os << "angle ratio alpha_" << j + 1 << " = " << alphas[j] << " is outside (0, 1)";
            throw ValidationError("angle_range", os.str());
        }
    }
    const double sum = std::accumulate(alphas.begin(), alphas.end(), 0.0);
    if (std::abs(sum - static_cast<double>(n - 2)) > angle_sum_tolerance) {
        std::ostringstream os;
        os << "angle sum " << sum << " != n - 2 = " << n - 2;
        throw ValidationError("angle_sum", os.str());
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(prevertices[j]))
            throw ValidationError("prevertex_not_finite", "prevertices must be finite");
        if (j > 0 && !(prevertices[j] > prevertices[j - 1]))
            throw ValidationError("prevertices_not_increasing",
                                  "prevertices must be strictly increasing");
    }
    if (d1 == Complex{})
        throw ValidationError("d1_zero", "scale constant d1 must be nonzero");
    const bool normalized = prevertices[0] == 0.0 && prevertices[1] == 1.0;
    if (require_normalized && !normalized)
        throw ValidationError("normalization", "normalized polygons need a_1 = 0 and a_2 = 1");

    PolygonSpec p;
    p.alphas_ = std::move(alphas);
    p.prevertices_ = std::move(prevertices);
    p.d0_ = d0;
    p.d1_ = d1;
    p.normalized_ = normalized;
    return p;
}

namespace {

Complex read_complex(const nlohmann::json& j, const char* key, Complex fallback)
{
    if (!j.contains(key))
        return fallback;
    const auto& v = j.at(key);
    if (!v.is_array() || v.size() != 2)
        throw ValidationError("json_complex", std::string(key) + " must be [re, im]");
    return {v.at(0).get<double>(), v.at(1).get<double>()};
}

} // namespace

PolygonSpec polygon_from_json(const nlohmann::json& j)
{
    try {
        auto alphas = j.at("alphas").get<std::vector<double>>();
        auto prevertices = j.at("prevertices").get<std::vector<double>>();
        const bool require = j.value("normalized", false);
        return validate_polygon(std::move(alphas), std::move(prevertices),
                                read_complex(j, "d0", {}), read_complex(j, "d1", {1.0, 0.0}), require);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("json_schema", std::string("polygon JSON: ") + e.what());
    }
}

nlohmann::json polygon_to_json(const PolygonSpec& p)
{
    return {{"alphas", p.alphas()},
            {"prevertices", p.prevertices()},
            {"d0", {p.d0().real(), p.d0().imag()}},
            {"d1", {p.d1().real(), p.d1().imag()}},
            {"normalized", p.normalized()}};
}

PolygonSpec load_polygon(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ValidationError("missing_file", "cannot open polygon file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("json_parse", "polygon file '" + path + "': " + e.what());
    }
    return polygon_from_json(j);
}

CriticalRadius critical_radius(const PolygonSpec& p, PairSum pairs)
{
    const auto e = p.exponents();
    const std::size_t n = e.size();
    double squares = 0.0, linear = 0.0, upper = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        squares += e[j] * e[j];
        linear += e[j];
        for (std::size_t l = j + 1; l < n; ++l)
            upper += e[j] * e[l];
    }
    double pair_sum = upper;
    if (pairs == PairSum::full)
        pair_sum = squares + 2.0 * upper;
    else if (pairs == PairSum::off_diagonal)
        pair_sum = 2.0 * upper;

    CriticalRadius cr;
    cr.a = 0.5 * (squares + pair_sum);
    cr.b = -linear;
    cr.c = -2.0;
    // a > 0 and c < 0, so exactly one root is positive; this form avoids cancellation.
    const double sq = std::sqrt(cr.discriminant());
    cr.r0 = (cr.b >= 0.0) ? (-2.0 * cr.c) / (cr.b + sq) : (sq - cr.b) / (2.0 * cr.a);
    return cr;
}

// ---------------------------------------------------------------------------
// Schwarz-Christoffel integral
// ---------------------------------------------------------------------------

namespace {

constexpr int jacobi_order = 24;
constexpr double quad_tol = 1e-14;

// (xi - a)^e on the closed upper half-plane, arg in [0, pi].
Complex branch_power(Complex d, double e)
{
    const double im = d.imag() > 0.0 ? d.imag() : 0.0;
    return std::polar(std::pow(std::abs(d), e), e * std::atan2(im, d.real()));
}

class Integrand {
public:
    explicit Integrand(const PolygonSpec& p) : a_(p.prevertices()), e_(p.exponents()) {}

    Complex operator()(Complex xi) const
    {
        Complex v{1.0, 0.0};
        for (std::size_t j = 0; j < a_.size(); ++j)
            v *= branch_power(xi - a_[j], e_[j]);
        return v;
    }

    [[nodiscard]] std::optional<std::size_t> prevertex_at(Complex z) const
    {
        for (std::size_t j = 0; j < a_.size(); ++j)
            if (std::abs(z - a_[j]) <= 1e-14 * (1.0 + std::abs(a_[j])))
                return j;
        return std::nullopt;
    }

    [[nodiscard]] double distance_to_others(Complex z, std::optional<std::size_t> skip) const
    {
        double d = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < a_.size(); ++j)
            if (!skip || *skip != j)
                d = std::min(d, std::abs(z - a_[j]));
        return d;
    }

    [[nodiscard]] const std::vector<double>& prevertices() const { return a_; }
    [[nodiscard]] double exponent(std::size_t j) const { return e_[j]; }

private:
    std::vector<double> a_;
    std::vector<double> e_;
};

// Integral over s in [0,1] of F(s), where F behaves like s^e_left near 0 and (1-s)^e_right
// near 1. Jacobi panels of relative width h_left / h_right absorb the endpoint powers;
// the middle is adaptive Gauss-Legendre.
Complex integrate_unit(const quad::ComplexFn& f, double e_left, double h_left, double e_right,
                       double h_right)
{
    Complex total{};
    double lo = 0.0, hi = 1.0;
    if (e_left != 0.0) {
        const double h = h_left;
        total += h * quad::jacobi_panel(
                         [&](double s) { return f(h * s) * std::pow(s, -e_left); }, e_left, 0.0,
                         jacobi_order);
        lo = h;
    }
    if (e_right != 0.0) {
        const double h = h_right;
        total += h * quad::jacobi_panel(
                         [&](double s) {
                             return f(1.0 - h * (1.0 - s)) * std::pow(1.0 - s, -e_right);
                         },
                         0.0, e_right, jacobi_order);
        hi = 1.0 - h;
    }
    if (hi > lo)
        total += quad::adaptive_legendre(f, lo, hi, quad_tol);
    return total;
}

// Straight segment p -> q in the closed upper half-plane; endpoints may be prevertices.
Complex integrate_segment(const Integrand& g, Complex p, Complex q)
{
    const Complex dq = q - p;
    const double len = std::abs(dq);
    if (len == 0.0)
        return {};
    const auto left = g.prevertex_at(p);
    const auto right = g.prevertex_at(q);
    if (left) p = g.prevertices()[*left];
    if (right) q = g.prevertices()[*right];

    double e_left = 0.0, e_right = 0.0, h_left = 0.0, h_right = 0.0;
    if (left) {
        e_left = g.exponent(*left);
        h_left = std::min(0.5, 0.5 * g.distance_to_others(p, left) / len);
    }
    if (right) {
        e_right = g.exponent(*right);
        h_right = std::min(0.5, 0.5 * g.distance_to_others(q, right) / len);
    }
    auto f = [&](double s) { return g(p + s * dq) * dq; };
    return integrate_unit(f, e_left, h_left, e_right, h_right);
}

// Real-axis path x0 -> x1, split at intervening prevertices.
Complex integrate_real(const Integrand& g, double x0, double x1)
{
    if (x0 == x1)
        return {};
    std::vector<double> breaks{x0};
    for (double a : g.prevertices())
        if ((a - x0) * (a - x1) < 0.0)
            breaks.push_back(a);
    breaks.push_back(x1);
    if (x1 < x0)
        std::sort(breaks.begin() + 1, breaks.end() - 1, std::greater<>());
    else
        std::sort(breaks.begin() + 1, breaks.end() - 1);
    Complex total{};
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k)
        total += integrate_segment(g, breaks[k], breaks[k + 1]);
    return total;
}

// Ray from the outermost prevertex to +inf (toward = +1, from a_n) or -inf (toward = -1,
// from a_1), reparametrized by x = a + toward * L s / (1 - s) and integrated for s in [0, s_end].
// The result is integral_a^x(s_end) g(x) dx for toward = +1 and integral_x(s_end)^a for -1.
class RayIntegral {
public:
    RayIntegral(const Integrand& g, int toward) : g_(g), toward_(toward)
    {
        const auto& a = g.prevertices();
        const double span = a.back() - a.front();
        scale_ = std::max(1.0, span);
        index_ = toward > 0 ? a.size() - 1 : 0;
        origin_ = a[index_];
        nearest_ = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < a.size(); ++j) {
            if (j == index_) continue;
            const double rho = toward_ * (a[j] - origin_) / scale_; // in [-1, 0)
            if (rho > -1.0)
                nearest_ = std::min(nearest_, std::abs(rho / (1.0 + rho)));
        }
    }

    [[nodiscard]] double x_at(double s) const { return origin_ + toward_ * scale_ * s / (1.0 - s); }

    [[nodiscard]] Complex integrate(double s_end) const
    {
        auto f = [&](double sigma) {
            const double s = s_end * sigma;
            const double one_minus = 1.0 - s;
            return s_end * g_(Complex(x_at(s), 0.0)) * (scale_ / (one_minus * one_minus));
        };
        const double h = std::min(0.5, 0.5 * nearest_ / s_end);
        return integrate_unit(f, g_.exponent(index_), h, 0.0, 0.0);
    }

private:
    const Integrand& g_;
    int toward_;
    double scale_ = 1.0;
    std::size_t index_ = 0;
    double origin_ = 0.0;
    double nearest_ = 0.0;
};

} // namespace

Complex sc_map(const PolygonSpec& p, Complex z)
{
    if (!(z.imag() >= 0.0) || !std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw ValidationError("outside_domain", "sc_map needs z in the closed upper half-plane");
    const Integrand g(p);
    const Complex integral =
        z.imag() == 0.0 ? integrate_real(g, 0.0, z.real()) : integrate_segment(g, 0.0, z);
    return p.d0() + p.d1() * integral;
}

Complex sc_vertex(const PolygonSpec& p, std::size_t j)
{
    if (j >= p.size())
        throw ValidationError("vertex_index", "vertex index out of range");
    return sc_map(p, Complex(p.prevertices()[j], 0.0));
}

Complex sc_infinity(const PolygonSpec& p)
{
    const Integrand g(p);
    const RayIntegral ray(g, +1);
    return sc_vertex(p, p.size() - 1) + p.d1() * ray.integrate(1.0);
}

BoundaryPolyline image_polygon(const PolygonSpec& p, int samples_per_edge)
{
    if (samples_per_edge < 2)
        throw ValidationError("samples_per_edge", "samples_per_edge must be >= 2");
    const Integrand g(p);
    const auto& a = p.prevertices();
    const std::size_t n = p.size();
    const int m = samples_per_edge;

    std::vector<Complex> vertices(n);
    for (std::size_t j = 0; j < n; ++j)
        vertices[j] = sc_vertex(p, j);

    BoundaryPolyline out;
    for (std::size_t j = 0; j + 1 < n; ++j) {
        out.vertex_index.push_back(out.points.size());
        out.points.push_back(vertices[j]);
        for (int k = 1; k < m; ++k) {
            const double x = a[j] + (a[j + 1] - a[j]) * k / m;
            // integrate from the nearer vertex so the far end stays regular
            if (2 * k <= m)
                out.points.push_back(vertices[j] + p.d1() * integrate_segment(g, a[j], x));
            else
                out.points.push_back(vertices[j + 1] - p.d1() * integrate_segment(g, x, a[j + 1]));
        }
    }
    out.vertex_index.push_back(out.points.size());
    out.points.push_back(vertices[n - 1]);

    const RayIntegral right(g, +1);
    for (int k = 1; k < m; ++k)
        out.points.push_back(vertices[n - 1] + p.d1() * right.integrate(double(k) / m));
    const Complex at_infinity = vertices[n - 1] + p.d1() * right.integrate(1.0);
    out.infinity_index = out.points.size();
    out.points.push_back(at_infinity);

    const RayIntegral left(g, -1);
    const Complex full_left = left.integrate(1.0);
    for (int k = m - 1; k >= 1; --k)
        out.points.push_back(at_infinity + p.d1() * (full_left - left.integrate(double(k) / m)));
    out.points.push_back(at_infinity + p.d1() * full_left);

    out.closure_gap = std::abs(out.points.back() - out.points.front());
    return out;
}

} // namespace berslab
