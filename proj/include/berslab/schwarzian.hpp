#pragma once

#include "berslab/pole_expansion.hpp"
#include "berslab/polygon.hpp"

#include <vector>

namespace berslab {

/// b = f''/f' of the Schwarz-Christoffel map: simple poles with residues alpha_j - 1.
PoleExpansion log_derivative_from_polygon(const PolygonSpec& p);

/// S = b' - b^2/2 in closed form. Requires an expansion with simple poles only.
PoleExpansion schwarzian_from_log_derivative(const PoleExpansion& b);

/// The Schwarzian as it is usually printed for polygon maps,
///   sum C_j/(z-a_j)^2 - sum_{j<l} C_jl/((z-a_j)(z-a_l)),
///   C_j = c_j - c_j^2/2,  C_jl = c_j c_l,  c_j = alpha_j - 1,
/// next to its pointwise deviation from the derived b' - b^2/2.
struct PrintedSchwarzian {
    PoleExpansion printed;
    PoleExpansion derived;
    std::vector<Complex> sample_points;
    std::vector<double> residuals;      // |printed(z) - derived(z)|
    double max_residual = 0.0;
};

PrintedSchwarzian printed_pole_expansion(const PolygonSpec& p);

/// How the homotopy S_t = t b' - (t^2/2) b^2 is read. `derivative` is the Schwarzian of
/// the map whose log-derivative is t*b and closes at t = 1; `literal` keeps t*b in place
/// of t*b' and is only there for comparison.
enum class HomotopyReading { derivative, literal };

/// A log-derivative together with the homotopy parameter t in (0, 1].
class HomotopyFamily {
public:
    HomotopyFamily(PoleExpansion base, double t);

    [[nodiscard]] const PoleExpansion& base() const noexcept { return base_; }
    [[nodiscard]] double t() const noexcept { return t_; }

private:
    PoleExpansion base_;
    double t_;
};

PoleExpansion homotopy_schwarzian(const HomotopyFamily& h,
                                  HomotopyReading reading = HomotopyReading::derivative);

/// Convenience: the Schwarzian S_{f,t} of a polygon map at parameter t.
PoleExpansion polygon_homotopy_schwarzian(const PolygonSpec& p, double t);

} // namespace berslab
