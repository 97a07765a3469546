#pragma once

#include "berslab/norms.hpp"
#include "berslab/pole_expansion.hpp"
#include "berslab/polygon.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

namespace berslab {

/// Settings for integrating u'' + phi u / 2 = 0.
struct OdeOptions {
    double rel_tol = 1e-12;
    double abs_tol = 1e-12;
    double wronskian_abort = 1e-6;     // NumericalError("wronskian_drift") beyond this
    double min_pole_distance = 1e-3;   // user-supplied paths must keep this distance
    Complex base = I;                  // normalization point
};

/// (u1, u1', u2, u2') for the two normalized solutions.
struct CompanionState {
    std::array<Complex, 4> y{Complex(1.0), Complex(0.0), Complex(0.0), Complex(1.0)};

    [[nodiscard]] Complex w() const { return y[0] / y[2]; }
    [[nodiscard]] Complex wronskian() const { return y[0] * y[3] - y[2] * y[1]; }
};

class SchwarzSolution {
public:
    struct Checkpoint {
        Complex z;
        CompanionState state;
    };

    SchwarzSolution(PoleExpansion phi, Complex base, std::vector<Checkpoint> checkpoints,
                    double max_drift)
        : phi_(std::move(phi)), base_(base), checkpoints_(std::move(checkpoints)), drift_(max_drift)
    {
    }

    [[nodiscard]] const PoleExpansion& phi() const noexcept { return phi_; }
    [[nodiscard]] Complex base() const noexcept { return base_; }
    /// One checkpoint per path vertex, the first being the base point.
    [[nodiscard]] const std::vector<Checkpoint>& checkpoints() const noexcept { return checkpoints_; }
    [[nodiscard]] double max_wronskian_drift() const noexcept { return drift_; }

private:
    PoleExpansion phi_;
    Complex base_;
    std::vector<Checkpoint> checkpoints_;
    double drift_;
};

/// Integrates both normalized solutions along the polyline base -> path[0] -> path[1] ...
/// (the base point is prepended if the path does not start there). Every segment must stay
/// in the closed upper half-plane at distance >= min_pole_distance from each pole.
SchwarzSolution solve_companion(const PoleExpansion& phi, const std::vector<Complex>& path,
                                const OdeOptions& options = {});

/// w(z) = u1/u2 continued along the straight segment from the base point.
Complex schwarz_map(const PoleExpansion& phi, Complex z, const OdeOptions& options = {});

/// Pre-Schwarzian F''/F' of the exterior map F = w o T on |z| > 1, where T is the Cayley
/// map onto the upper half-plane and w is normalized at i (so F has its pole at infinity).
/// Each evaluation integrates along the segment from i to T(z); points closer than
/// options.min_pole_distance to a pole throw ValidationError("path_near_pole").
HolomorphicFunction exterior_pre_schwarzian(const PoleExpansion& phi, const OdeOptions& options = {});

/// Becker norm sup (|z|^2 - 1)|z psi(z)| of that pre-Schwarzian. Points within 1e-6 of a
/// prevertex image, or where the integration aborts, are skipped by the search.
NormEstimate exterior_becker_norm(const PoleExpansion& phi, const SamplingBudget& budget = {},
                                  const OdeOptions& options = {});

/// Local behaviour at a regular singular point: exponents (1 +- kappa)/2 with
/// kappa = sqrt(1 - 2 p0), p0 the double-pole coefficient.
struct LocalExponents {
    Complex kappa;
    bool resonant = false;   // kappa is an integer: the smaller-exponent series does not exist
    bool spiral = false;     // kappa is not real: the boundary image spirals into the vertex
};

LocalExponents local_exponents(Complex p0);

struct VertexImage {
    std::size_t pole_index = 0;
    LocalExponents exponents;
    /// lim w(z) as z -> a_j. Absent for spiral vertices; for resonant ones it is the value
    /// at the detour apex.
    std::optional<Complex> w;
};

struct TraceOptions {
    std::size_t n_samples = 0;        // real-axis samples; 0 picks 64 per gap. Minimum 8 per pole.
    double detour_radius = 1e-4;      // semicircle radius of the integration path around poles
    int arc_samples = 32;
    double inner_radius = 1e-16;      // spiral vertices: series continuation down to this radius
    double samples_per_turn = 32.0;   // angular resolution of spiral arms
    OdeOptions ode;
};

struct BoundaryTrace {
    /// Boundary parameter of each point: real x on the axis, a complex point on a detour arc,
    /// or z = -1/zeta for points reached through the chart at infinity.
    std::vector<Complex> parameters;
    std::vector<Complex> points;      // w = u1/u2; closed polyline (last joins first)
    std::vector<VertexImage> vertices;
    LocalExponents at_infinity;
    bool simple = false;
    std::optional<std::pair<Complex, Complex>> first_self_intersection;
    double min_relative_gap = 0.0;    // closest approach of distant parts, relative to diameter
    bool indeterminate = false;       // simple, but min_relative_gap < 1e-6
    double closure_gap = 0.0;         // |w(end) - w(start)| after passing through infinity
    double max_wronskian_drift = 0.0;
};

BoundaryTrace trace_boundary(const PoleExpansion& phi, const TraceOptions& options = {});

/// Self-intersection analysis of a closed polyline (segment i joins points i and i+1 mod m).
struct PolylineCheck {
    bool simple = true;
    std::optional<std::pair<std::size_t, std::size_t>> first;   // segment indices, i < j
    double min_relative_gap = 1.0;
};

PolylineCheck check_closed_polyline(const std::vector<Complex>& points, double collinear_tol = 1e-9,
                                    double gap_threshold = 1e-6);

/// Closed-segment intersection with orientation tests; |orientation| below
/// collinear_tol * |pq| * |pr| counts as collinear.
bool segments_intersect(Complex p1, Complex p2, Complex q1, Complex q2, double collinear_tol = 1e-9);

enum class ProbeVariant { scaled, homotopy };

const char* to_string(ProbeVariant v);
ProbeVariant parse_variant(std::string_view name);

/// phi for one point of the probe: t * S_{f, r0} or S_{f, t}.
PoleExpansion probe_schwarzian(const PolygonSpec& p, ProbeVariant v, double t);

struct ProbeOptions {
    std::vector<ProbeVariant> variants{ProbeVariant::scaled, ProbeVariant::homotopy};
    TraceOptions trace;
    SamplingBudget norm_budget;
    bool keep_traces = false;
};

struct ProbeRow {
    double t = 0.0;
    ProbeVariant variant = ProbeVariant::scaled;
    bool ok = false;                  // false: error holds the failure
    std::string error;
    bool simple = false;
    bool indeterminate = false;
    double norm_hp1 = 0.0;
    double norm_hp4 = 0.0;
    bool aw_applicable = false;       // norm_hp1 < 1/2
    bool breakdown_flag = false;      // simple above the smallest non-simple t
    bool kraus_flag = false;          // simple although norm_hp1 > 3/2: the test missed a crossing
    bool aw_conflict = false;         // norm_hp1 < 1/2 but not simple: a solver defect
    double min_relative_gap = 0.0;
    double closure_gap = 0.0;
    double max_wronskian_drift = 0.0;
    std::optional<BoundaryTrace> trace;   // with ProbeOptions::keep_traces
};

struct ProbeBracket {
    ProbeVariant variant = ProbeVariant::scaled;
    std::optional<double> largest_simple;
    std::optional<double> smallest_nonsimple;
    bool monotone = true;
};

struct ProbeReport {
    double r0 = 0.0;
    std::vector<ProbeRow> rows;
    std::vector<ProbeBracket> brackets;
};

/// The grid must be nonempty and strictly increasing with t > 0. Values above 1 are allowed
/// so the scaled family can be pushed past the univalence range; homotopy rows with t > 1
/// are recorded as failures. Each (variant, t) is independent and runs in parallel.
ProbeReport ray_probe(const PolygonSpec& p, const std::vector<double>& t_grid,
                      const ProbeOptions& options = {});

void write_probe_csv(std::ostream& out, const ProbeReport& report);
void write_trace_csv(std::ostream& out, const BoundaryTrace& trace);
void to_json(nlohmann::json& j, const ProbeReport& report);

} // namespace berslab
