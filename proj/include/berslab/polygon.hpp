#pragma once

#include "berslab/types.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace berslab {

/// Convex polygon data for a Schwarz-Christoffel map of the upper half-plane: interior
/// angles pi*alpha_j at the images of the real prevertices a_j, plus the affine constants
/// of f(z) = d1 * integral_0^z prod (xi - a_j)^(alpha_j - 1) dxi + d0.
///
/// Instances only come out of validate_polygon, so every PolygonSpec in circulation
/// satisfies 0 < alpha_j < 1, sum alpha_j = n - 2 and a_1 < ... < a_n.
class PolygonSpec {
public:
    [[nodiscard]] std::size_t size() const noexcept { return alphas_.size(); }
    [[nodiscard]] const std::vector<double>& alphas() const noexcept { return alphas_; }
    [[nodiscard]] const std::vector<double>& prevertices() const noexcept { return prevertices_; }
    [[nodiscard]] Complex d0() const noexcept { return d0_; }
    [[nodiscard]] Complex d1() const noexcept { return d1_; }
    [[nodiscard]] bool normalized() const noexcept { return normalized_; }

    /// alpha_j - 1, the exponents of the Schwarz-Christoffel integrand.
    [[nodiscard]] std::vector<double> exponents() const;

private:
    friend PolygonSpec validate_polygon(std::vector<double>, std::vector<double>, Complex, Complex,
                                        bool);
    PolygonSpec() = default;

    std::vector<double> alphas_;
    std::vector<double> prevertices_;
    Complex d0_{};
    Complex d1_{1.0, 0.0};
    bool normalized_ = false;
};

inline constexpr double angle_sum_tolerance = 1e-12;

/// Throws ValidationError whose code names the violated invariant: "length_mismatch",
/// "too_few_vertices", "angle_range", "angle_sum", "prevertices_not_increasing",
/// "prevertex_not_finite", "d1_zero" or "normalization" (a_1 = 0, a_2 = 1 when
/// `require_normalized`).
PolygonSpec validate_polygon(std::vector<double> alphas, std::vector<double> prevertices,
                             Complex d0 = {}, Complex d1 = {1.0, 0.0},
                             bool require_normalized = false);

/// {"alphas":[...], "prevertices":[...], "d0":[re,im], "d1":[re,im], "normalized": bool}
PolygonSpec polygon_from_json(const nlohmann::json& j);
nlohmann::json polygon_to_json(const PolygonSpec& p);
PolygonSpec load_polygon(const std::string& path);

/// How the double sum over (alpha_j - 1)(alpha_l - 1) in the radius equation is read.
enum class PairSum { upper_triangle, full, off_diagonal };

/// Positive root of A r^2 + B r + C = 0 with
/// A = 1/2 [sum (alpha_j-1)^2 + sum_pairs (alpha_j-1)(alpha_l-1)], B = -sum (alpha_j-1), C = -2.
struct CriticalRadius {
    double r0 = 0.0;
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;

    [[nodiscard]] double discriminant() const noexcept { return b * b - 4.0 * a * c; }
    [[nodiscard]] double residual() const noexcept { return (a * r0 + b) * r0 + c; }
};

/// The default upper-triangle (j < l) reading is the one that reproduces 5/4 for rectangles;
/// the others exist for comparison.
CriticalRadius critical_radius(const PolygonSpec& p, PairSum pairs = PairSum::upper_triangle);

/// Schwarz-Christoffel map at z in the closed upper half-plane. Prevertices are allowed:
/// the real-axis path ends on a Jacobi-weighted panel and returns the vertex A_j.
Complex sc_map(const PolygonSpec& p, Complex z);

/// Vertex A_j = f(a_j).
Complex sc_vertex(const PolygonSpec& p, std::size_t j);

/// f(infinity), reached along the ray [a_n, +inf).
Complex sc_infinity(const PolygonSpec& p);

/// Closed boundary trace A_1 -> ... -> A_n -> f(inf) -> back to A_1, where the final
/// point is reached by integrating independently along (-inf, a_1].
struct BoundaryPolyline {
    std::vector<Complex> points;
    std::vector<std::size_t> vertex_index;   // position of A_j in `points`
    std::size_t infinity_index = 0;          // position of f(inf)
    double closure_gap = 0.0;                // |points.back() - points.front()|
};

BoundaryPolyline image_polygon(const PolygonSpec& p, int samples_per_edge);

} // namespace berslab
