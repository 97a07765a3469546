#include "doctest.h"
#include "oracles.hpp"

#include "berslab/polygon.hpp"

#include <numbers>

using namespace berslab;
using oracle::Complex;

namespace {

std::string error_code(const std::function<void()>& f)
{
    try {
        f();
    } catch (const ValidationError& e) {
        return e.code();
    }
    return "";
}

// Distance of q from the line through a and b, relative to |b - a|.
double line_residual(Complex a, Complex b, Complex q)
{
    const Complex d = b - a;
    return std::abs((std::conj(d) * (q - a)).imag()) / std::norm(d);
}

double turning_angle(Complex prev, Complex at, Complex next)
{
    return std::arg((next - at) / (at - prev));
}

} // namespace

TEST_CASE("validate_polygon: accepted and rejected inputs")
{
    CHECK_NOTHROW(validate_polygon({0.5, 0.5, 0.5, 0.5}, {0.0, 1.0, 2.0, 3.0}));
    CHECK(error_code([] { validate_polygon({0.5, 0.5, 0.5, 0.75}, {0.0, 1.0, 2.0, 3.0}); }) ==
          "angle_sum");
    CHECK(error_code([] { validate_polygon({1.0 / 3, 1.0 / 3, 1.0 / 3}, {0.0, 1.0, 0.5}); }) ==
          "prevertices_not_increasing");
    CHECK(error_code([] { validate_polygon({1.2, 0.4, 0.4}, {0.0, 1.0, 2.0}); }) == "angle_range");
    CHECK(error_code([] { validate_polygon({0.5, 0.5}, {0.0, 1.0}); }) == "too_few_vertices");
    CHECK(error_code([] { validate_polygon({0.5, 0.5, 0.5, 0.5}, {0.0, 1.0, 2.0}); }) ==
          "length_mismatch");
    CHECK(error_code([] { validate_polygon({0.5, 0.5, 0.5, 0.5}, {0, 1, 2, 3}, {}, {}); }) ==
          "d1_zero");
    CHECK(error_code([] {
              validate_polygon({0.5, 0.5, 0.5, 0.5}, {0.0, 2.0, 3.0, 4.0}, {}, {1.0, 0.0}, true);
          }) == "normalization");
    CHECK(validate_polygon({0.5, 0.5, 0.5, 0.5}, {0.0, 1.0, 2.0, 3.0}).normalized());
}

TEST_CASE("polygon json loading validates")
{
    const auto p = polygon_from_json(nlohmann::json::parse(
        R"({"alphas":[0.5,0.5,0.5,0.5],"prevertices":[0,1,2,3],"d0":[1,2],"d1":[0,1]})"));
    CHECK(p.d0() == Complex(1.0, 2.0));
    CHECK(p.d1() == Complex(0.0, 1.0));
    CHECK_THROWS_AS(polygon_from_json(nlohmann::json::parse(R"({"alphas":[0.5]})")), ValidationError);
    CHECK_THROWS_AS(load_polygon("/nonexistent/polygon.json"), ValidationError);
}

TEST_CASE("critical_radius: rectangle and triangle anchors")
{
    const auto rect = critical_radius(validate_polygon({0.5, 0.5, 0.5, 0.5}, {0, 1, 2, 3}));
    CHECK(rect.a == 1.25);
    CHECK(rect.b == 2.0);
    CHECK(rect.c == -2.0);
    CHECK(rect.r0 == doctest::Approx(0.696663).epsilon(1e-6));
    // exact root (sqrt(14) - 2)/2.5 = 0.69666295..., i.e. 0.696663 to six digits
    CHECK(rect.r0 == doctest::Approx((std::sqrt(14.0) - 2.0) / 2.5).epsilon(1e-15));
    CHECK(std::round(rect.r0 * 1e6) == 696663.0);
    CHECK(std::abs(rect.residual()) < 1e-12);

    const auto tri = critical_radius(validate_polygon({1.0 / 3, 1.0 / 3, 1.0 / 3}, {0, 1, 2}));
    CHECK(tri.a == doctest::Approx(4.0 / 3.0));
    const double want = (-3.0 + std::sqrt(33.0)) / 4.0; // quadratic formula, (4/3) r^2 + 2r - 2
    CHECK(tri.r0 == doctest::Approx(want).epsilon(1e-14));
    CHECK(std::abs(tri.residual()) < 1e-12);
}

TEST_CASE("critical_radius: alternative pair-sum readings miss the rectangle coefficient")
{
    const auto p = validate_polygon({0.5, 0.5, 0.5, 0.5}, {0, 1, 2, 3});
    CHECK(critical_radius(p, PairSum::full).a == 2.5);
    CHECK(critical_radius(p, PairSum::off_diagonal).a == 2.0);
}

TEST_CASE("property: root correctness and linear-coefficient universality")
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const auto p = oracle::random_polygon(rng, 3 + trial % 6);
        const auto cr = critical_radius(p);
        CHECK(cr.b == 2.0);
        CHECK(cr.discriminant() > 0.0);
        CHECK(cr.r0 > 0.0);
        CHECK(std::abs(cr.residual()) < 1e-12);
        CHECK(cr.r0 == doctest::Approx(oracle::quadratic_root(cr.a, cr.b, cr.c)).epsilon(1e-13));
        // the other root is negative
        CHECK(-cr.b / cr.a - cr.r0 < 0.0);
    }
}

TEST_CASE("sc_map: base point and vertex path")
{
    const auto p = validate_polygon({0.5, 0.5, 0.5, 0.5}, {0, 1, 2, 3}, {0.25, -1.0}, {2.0, 1.0});
    CHECK(sc_map(p, {0.0, 0.0}) == p.d0());
    CHECK(std::abs(sc_vertex(p, 2) - sc_map(p, {2.0, 0.0})) < 1e-15);
    CHECK_THROWS_AS(sc_map(p, {0.0, -1.0}), ValidationError);

    // path independence: the straight path and a real-axis-then-vertical path agree
    const Complex z(1.7, 0.8);
    const Complex straight = sc_map(p, z);
    const Complex corner = sc_map(p, {1.7, 0.0});
    // vertical leg by brute force: simple composite midpoint-free Simpson with many nodes
    const int m = 20000;
    Complex leg{};
    for (int k = 0; k <= m; ++k) {
        const double y = 0.8 * k / m;
        const Complex xi(1.7, y);
        Complex g{1.0, 0.0};
        for (int j = 0; j < 4; ++j) g *= std::pow(xi - double(j), -0.5);
        const double w = (k == 0 || k == m) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        leg += w * g;
    }
    leg *= Complex(0.0, 0.8) / (3.0 * m);
    CHECK(std::abs(straight - (corner + p.d1() * leg)) < 1e-9);
}

TEST_CASE("sc_map: symmetric rectangle edge is straight")
{
    const double k = 0.4;
    const auto p = validate_polygon({0.5, 0.5, 0.5, 0.5}, {-1.0 / k, -1.0, 1.0, 1.0 / k});
    const Complex a = sc_vertex(p, 1), b = sc_vertex(p, 2);
    double worst = 0.0;
    for (int i = 1; i < 40; ++i) {
        const double x = -1.0 + 2.0 * i / 40.0;
        worst = std::max(worst, line_residual(a, b, sc_map(p, {x, 0.0})));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("image_polygon: closure, convexity and turning angles")
{
    const auto rect = validate_polygon({0.5, 0.5, 0.5, 0.5}, {0, 1, 2, 3});
    const auto trace = image_polygon(rect, 16);
    CHECK(trace.closure_gap < 1e-7);
    CHECK(trace.vertex_index.size() == 4);

    const auto tri = validate_polygon({0.25, 0.5, 0.25}, {0, 1, 3});
    CHECK(image_polygon(tri, 8).vertex_index.size() == 3);
    CHECK_THROWS_AS(image_polygon(tri, 1), ValidationError);

    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 12; ++trial) {
        const auto p = oracle::random_polygon(rng, 3 + trial % 6);
        const auto t = image_polygon(p, 10);
        CHECK(t.closure_gap < 1e-7);
        // convex: every turn is a left turn (counterclockwise traversal)
        const auto& pts = t.points;
        const std::size_t m = pts.size() - 1; // last point duplicates the first
        for (std::size_t i = 0; i < m; ++i) {
            const Complex u = pts[(i + 1) % m] - pts[i];
            const Complex v = pts[(i + 2) % m] - pts[(i + 1) % m];
            CHECK((std::conj(u) * v).imag() >= -1e-9 * std::abs(u) * std::abs(v));
        }
        // vertex turning angles
        const std::size_t n = p.size();
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t at = t.vertex_index[j];
            const Complex prev = pts[(at + m - 1) % m], next = pts[(at + 1) % m];
            const double want = std::numbers::pi * (1.0 - p.alphas()[j]);
            CHECK(std::abs(turning_angle(prev, pts[at], next) - want) < 1e-6);
        }
    }
}
