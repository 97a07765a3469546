#include "berslab/norms.hpp"

#include "berslab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace berslab {

NormConvention NormConvention::of(NormModel m)
{
    switch (m) {
    case NormModel::half_plane_4:
        return {m, "4 sup y^2 |phi| over the half-plane"};
    case NormModel::half_plane_1:
        return {m, "sup y^2 |phi| over the half-plane"};
    case NormModel::disk:
        return {m, "sup (|z|^2 - 1)^2 |phi| over |z| > 1"};
    case NormModel::becker:
        return {m, "sup (|z|^2 - 1) |z psi| over |z| > 1"};
    }
    throw ValidationError("convention", "unknown norm convention");
}

NormConvention NormConvention::parse(std::string_view name)
{
    if (name == "hp4" || name == "half-plane-4") return of(NormModel::half_plane_4);
    if (name == "hp1" || name == "half-plane-1") return of(NormModel::half_plane_1);
    if (name == "disk" || name == "disk-schwarzian") return of(NormModel::disk);
    if (name == "becker" || name == "becker-pre-schwarzian") return of(NormModel::becker);
    throw ValidationError("convention", "unknown norm convention '" + std::string(name) +
                                            "' (expected hp1, hp4, disk or becker)");
}

std::string NormConvention::name() const
{
    switch (model) {
    case NormModel::half_plane_4: return "hp4";
    case NormModel::half_plane_1: return "hp1";
    case NormModel::disk: return "disk";
    case NormModel::becker: return "becker";
    }
    return "?";
}

void to_json(nlohmann::json& j, const NormEstimate& e)
{
    j = {{"convention", NormConvention::of(e.model).name()},
         {"value", e.value},
         {"argmax", {e.argmax.real(), e.argmax.imag()}},
         {"stabilized", e.stabilized},
         {"samples", e.samples},
         {"refinement_depth", e.refinement_depth}};
}

HolomorphicFunction as_function(const PoleExpansion& phi)
{
    HolomorphicFunction f;
    f.eval = [phi](Complex z) { return phi.evaluate(z); };
    for (double a : phi.poles()) f.hot_points.emplace_back(a, 0.0);
    return f;
}

namespace {

// Search points live in the upper half-plane: zeta = x + i y with y > 0 stored directly.
struct Sample {
    Complex zeta;
    double value = -1.0;
};

Complex region_point(Region r, Complex zeta)
{
    switch (r) {
    case Region::upper_half_plane: return zeta;
    case Region::lower_half_plane: return std::conj(zeta);
    case Region::disk_exterior: return (zeta + I) / (zeta - I);
    }
    return zeta;
}

double boundary_scale(Region r, Complex zeta)
{
    if (r == Region::disk_exterior) return 4.0 * zeta.imag() / std::norm(zeta - I);
    return zeta.imag();
}

// Real boundary coordinate of a hot point, or nullopt for the point at infinity.
std::optional<double> boundary_parameter(Region r, Complex h)
{
    if (r != Region::disk_exterior) return h.real();
    const Complex w = h / std::abs(h);
    if (std::abs(w - 1.0) < 1e-12) return std::nullopt;
    return (I * (w + 1.0) / (w - 1.0)).real();
}

std::vector<Complex> seed_points(Region region, const std::vector<Complex>& hot,
                                 const SamplingBudget& b)
{
    std::vector<Complex> seeds;
    // Coarse grid: rings of equal hyperbolic spacing around i in the disk chart.
    seeds.push_back(I);
    for (int k = 1; k <= b.rings; ++k) {
        const double s = b.max_radius * k / b.rings;
        const double rho = std::tanh(0.5 * s);
        const double one_minus_rho2 = 1.0 / std::pow(std::cosh(0.5 * s), 2);
        for (int m = 0; m < b.ring_points; ++m) {
            const double th = 2.0 * std::numbers::pi * (m + 0.5 * (k % 2)) / b.ring_points;
            const Complex u = std::polar(rho, th);
            const double d = std::norm(1.0 - u);
            seeds.emplace_back(-2.0 * u.imag() / d, one_minus_rho2 / d);
        }
    }
    // Log-spaced half-circles around each hot boundary point and around infinity.
    std::vector<double> reals;
    for (const Complex& h : hot)
        if (auto a = boundary_parameter(region, h)) reals.push_back(*a);
    std::sort(reals.begin(), reals.end());
    reals.erase(std::unique(reals.begin(), reals.end()), reals.end());
    for (int d = 1; d <= b.hot_decades; ++d) {
        const double eps = std::pow(10.0, -d);
        for (int k = 0; k < b.hot_angles; ++k) {
            const Complex dir = std::polar(1.0, std::numbers::pi * (k + 0.5) / b.hot_angles);
            for (double a : reals) seeds.push_back(a + eps * dir);
            seeds.push_back(dir / eps);
        }
    }
    return seeds;
}

double pseudo_distance(Complex a, Complex b) { return std::abs(a - b) / std::abs(a - std::conj(b)); }

} // namespace

NormEstimate maximize_over(Region region, const RegionObjective& objective,
                           const std::vector<Complex>& hot_points, const SamplingBudget& budget)
{
    auto eval = [&](Complex zeta) {
        double v = -1.0;
        try {
            v = objective(region_point(region, zeta), boundary_scale(region, zeta));
        } catch (const NearPoleError&) {
            v = -1.0;
        }
        return std::isfinite(v) ? v : -1.0;
    };

    const auto seeds = seed_points(region, hot_points, budget);
    std::vector<Sample> coarse(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t i) { coarse[i] = {seeds[i], eval(seeds[i])}; });

    std::vector<std::size_t> order(coarse.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return coarse[a].value > coarse[b].value; });

    std::vector<Sample> starts;
    for (std::size_t idx : order) {
        if (static_cast<int>(starts.size()) >= budget.candidates) break;
        if (coarse[idx].value < 0.0) break;
        const bool distinct = std::all_of(starts.begin(), starts.end(), [&](const Sample& s) {
            return pseudo_distance(s.zeta, coarse[idx].zeta) > 0.245;
        });
        if (distinct) starts.push_back(coarse[idx]);
    }

    NormEstimate out;
    out.samples = seeds.size();
    out.refinement_depth = budget.refinement_depth;
    Sample best{I, 0.0};
    if (!starts.empty()) best = starts.front();

    // Pattern search in 8 directions with hyperbolic step h, halving h per level.
    const int depth = std::max(0, budget.refinement_depth);
    std::vector<std::vector<Sample>> paths(starts.size(), std::vector<Sample>(depth));
    std::vector<std::size_t> counts(starts.size(), 0);
    parallel_for(starts.size(), [&](std::size_t c) {
        Sample cur = starts[c];
        double h = 0.5;
        for (int level = 0; level < depth; ++level) {
            for (int move = 0; move < budget.moves_per_level; ++move) {
                Sample next = cur;
                for (int k = 0; k < 8; ++k) {
                    const Complex z = cur.zeta + h * cur.zeta.imag() * std::polar(1.0, k * std::numbers::pi / 4);
                    const double v = eval(z);
                    ++counts[c];
                    if (v > next.value) next = {z, v};
                }
                if (next.value <= cur.value) break;
                cur = next;
            }
            paths[c][level] = cur;
            h *= 0.5;
        }
    });

    out.samples += std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    for (int level = 0; level < depth; ++level) {
        for (const auto& p : paths)
            if (p[level].value > best.value) best = p[level];
        out.level_values.push_back(best.value);
    }
    out.value = std::max(0.0, best.value);
    out.argmax = region_point(region, best.zeta);
    if (out.value == 0.0) {
        out.stabilized = true;
    } else if (depth >= 2) {
        const double a = out.level_values[depth - 2], b = out.level_values[depth - 1];
        out.stabilized = (b - a) <= 1e-4 * b;
    }
    return out;
}

NormEstimate hyperbolic_sup_norm(const HolomorphicFunction& phi, NormModel model,
                                 const SamplingBudget& budget, std::optional<Region> region)
{
    const bool half_plane = model == NormModel::half_plane_1 || model == NormModel::half_plane_4;
    const Region r = region.value_or(half_plane ? Region::upper_half_plane : Region::disk_exterior);
    RegionObjective objective;
    if (model == NormModel::becker)
        objective = [&](Complex z, double m) { return m * std::abs(z) * std::abs(phi.eval(z)); };
    else
        objective = [&](Complex z, double m) { return m * m * std::abs(phi.eval(z)); };

    NormEstimate e = maximize_over(r, objective, phi.hot_points, budget);
    e.model = model;
    if (model == NormModel::half_plane_4) {
        e.value *= 4.0;
        for (double& v : e.level_values) v *= 4.0;
    }
    return e;
}

NormEstimate hyperbolic_sup_norm(const PoleExpansion& phi, NormModel model, const SamplingBudget& budget)
{
    return hyperbolic_sup_norm(as_function(phi), model, budget);
}

Complex cayley_exterior(Complex w) { return I * (w + 1.0) / (w - 1.0); }

Complex cayley_exterior_inverse(Complex z) { return (z + I) / (z - I); }

HolomorphicFunction cayley_transport(const HolomorphicFunction& phi_upper)
{
    HolomorphicFunction out;
    out.eval = [f = phi_upper.eval](Complex w) {
        const Complex d = w - 1.0;
        if (std::abs(d) < 1e-14)
            throw ValidationError("cayley_singularity", "transport evaluated at w = 1");
        const Complex dt = -2.0 * I / (d * d);
        return f(cayley_exterior(w)) * dt * dt;
    };
    for (const Complex& h : phi_upper.hot_points) out.hot_points.push_back(cayley_exterior_inverse(h));
    out.hot_points.emplace_back(1.0, 0.0);
    return out;
}

} // namespace berslab
