#pragma once

#include "berslab/pole_expansion.hpp"
#include "berslab/types.hpp"

#include "json.hpp"

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace berslab {

enum class NormModel { half_plane_4, half_plane_1, disk, becker };

struct NormConvention {
    NormModel model = NormModel::half_plane_1;
    std::string description;

    static NormConvention of(NormModel m);
    /// Accepts "hp4", "hp1", "disk", "becker" and the long names "half-plane-4" etc.
    static NormConvention parse(std::string_view name);
    [[nodiscard]] std::string name() const; // short name: hp4, hp1, disk, becker
};

/// Where a function lives. Half-plane conventions default to the upper half-plane, the
/// disk conventions to the exterior disk |z| > 1.
enum class Region { upper_half_plane, lower_half_plane, disk_exterior };

/// A holomorphic function together with the boundary points (and, for half-planes, the
/// point at infinity implicitly) where its weighted modulus may concentrate. The hot
/// points only steer the search; correctness does not depend on them.
struct HolomorphicFunction {
    std::function<Complex(Complex)> eval;
    std::vector<Complex> hot_points;
};

HolomorphicFunction as_function(const PoleExpansion& phi);

struct SamplingBudget {
    int rings = 40;              // coarse grid: rings of equal hyperbolic spacing
    int ring_points = 96;        // points per ring
    double max_radius = 14.0;    // hyperbolic radius of the outermost ring (from the chart centre)
    int hot_decades = 8;         // log-spaced seeds 10^-1 .. 10^-hot_decades around hot points
    int hot_angles = 12;
    int candidates = 6;          // local refinements started from the best coarse samples
    int refinement_depth = 30;   // step halvings in the local pattern search
    int moves_per_level = 64;
};

struct NormEstimate {
    NormModel model = NormModel::half_plane_1;
    double value = 0.0;          // lower bound of the supremum
    Complex argmax{};
    std::size_t samples = 0;
    int refinement_depth = 0;
    bool stabilized = false;     // relative change <= 1e-4 between the last two levels
    std::vector<double> level_values;
};

void to_json(nlohmann::json& j, const NormEstimate& e);

/// Objective for maximize_over: receives the region point z and its boundary scale m,
/// which is Im z for the upper half-plane, -Im z for the lower one and |z|^2 - 1 on the
/// exterior disk. m is computed without cancellation even very close to the boundary.
/// Returning a negative value marks the point as not evaluable.
using RegionObjective = std::function<double(Complex z, double m)>;

/// Supremum of a nonnegative objective over a region. The search runs in upper half-plane
/// coordinates mapped onto the region, so two regions related by those maps are sampled
/// at corresponding points. Hot points are given in region coordinates and lie on the
/// region's boundary.
NormEstimate maximize_over(Region region, const RegionObjective& objective,
                           const std::vector<Complex>& hot_points, const SamplingBudget& budget);

NormEstimate hyperbolic_sup_norm(const HolomorphicFunction& phi, NormModel model,
                                 const SamplingBudget& budget = {},
                                 std::optional<Region> region = std::nullopt);

NormEstimate hyperbolic_sup_norm(const PoleExpansion& phi, NormModel model,
                                 const SamplingBudget& budget = {});

/// T(w) = i(w+1)/(w-1), mapping |w| > 1 onto the upper half-plane, and its inverse.
Complex cayley_exterior(Complex w);
Complex cayley_exterior_inverse(Complex z);

/// psi(w) = phi(T(w)) T'(w)^2 on |w| > 1. Evaluating at w = 1 throws ValidationError.
HolomorphicFunction cayley_transport(const HolomorphicFunction& phi_upper);

} // namespace berslab
