#include "berslab/schwarzian.hpp"

#include <algorithm>
#include <cmath>

namespace berslab {

PoleExpansion log_derivative_from_polygon(const PolygonSpec& p)
{
    const auto e = p.exponents();
    std::vector<Complex> simple(e.begin(), e.end());
    return PoleExpansion(p.prevertices(), std::move(simple));
}

namespace {

void require_simple(const PoleExpansion& b)
{
    if (!b.has_only_simple_poles())
        throw ValidationError("not_log_derivative",
                              "expected a log-derivative (simple poles only)");
}

// t b' - (t^2/2) b^2, or t b - (t^2/2) b^2 for the literal reading.
PoleExpansion homotopy_terms(const PoleExpansion& b, double t, HomotopyReading reading)
{
    require_simple(b);
    const auto& c = b.simple_coeffs();
    const std::size_t n = b.size();
    std::vector<Complex> simple(n), dbl(n);
    PoleExpansion::CrossMap cross;
    const double half_t2 = 0.5 * t * t;
    for (std::size_t j = 0; j < n; ++j) {
        if (reading == HomotopyReading::derivative) {
            dbl[j] = -t * c[j] - half_t2 * c[j] * c[j];
        } else {
            simple[j] = t * c[j];
            dbl[j] = -half_t2 * c[j] * c[j];
        }
        for (std::size_t l = j + 1; l < n; ++l)
            cross[{j, l}] = -t * t * c[j] * c[l];
    }
    return PoleExpansion(b.poles(), std::move(simple), std::move(dbl), std::move(cross));
}

} // namespace

PoleExpansion schwarzian_from_log_derivative(const PoleExpansion& b)
{
    return homotopy_terms(b, 1.0, HomotopyReading::derivative);
}

PrintedSchwarzian printed_pole_expansion(const PolygonSpec& p)
{
    const auto e = p.exponents();
    const std::size_t n = e.size();
    std::vector<Complex> dbl(n);
    PoleExpansion::CrossMap cross;
    for (std::size_t j = 0; j < n; ++j) {
        dbl[j] = e[j] - 0.5 * e[j] * e[j];
        for (std::size_t l = j + 1; l < n; ++l)
            cross[{j, l}] = -e[j] * e[l];
    }

    PrintedSchwarzian out{PoleExpansion(p.prevertices(), {}, std::move(dbl), std::move(cross)),
                          schwarzian_from_log_derivative(log_derivative_from_polygon(p)),
                          {},
                          {},
                          0.0};
    // Ten fixed points spread over the hull of the prevertices, at varying heights.
    const auto& a = p.prevertices();
    const double lo = a.front() - 1.0, hi = a.back() + 1.0;
    for (int k = 0; k < 10; ++k) {
        const Complex z(lo + (hi - lo) * (k + 0.5) / 10.0, 0.25 + 0.3 * k);
        const double r = std::abs(out.printed.evaluate(z) - out.derived.evaluate(z));
        out.sample_points.push_back(z);
        out.residuals.push_back(r);
        out.max_residual = std::max(out.max_residual, r);
    }
    return out;
}

HomotopyFamily::HomotopyFamily(PoleExpansion base, double t) : base_(std::move(base)), t_(t)
{
    if (!(t > 0.0 && t <= 1.0))
        throw ValidationError("t_range", "homotopy parameter t must lie in (0, 1]");
    require_simple(base_);
}

PoleExpansion homotopy_schwarzian(const HomotopyFamily& h, HomotopyReading reading)
{
    return homotopy_terms(h.base(), h.t(), reading);
}

PoleExpansion polygon_homotopy_schwarzian(const PolygonSpec& p, double t)
{
    return homotopy_schwarzian(HomotopyFamily(log_derivative_from_polygon(p), t));
}

} // namespace berslab
