#include "doctest.h"
#include "oracles.hpp"

#include "berslab/grunsky.hpp"
#include "berslab/schwarzian.hpp"

#include <random>
#include <sstream>

using namespace berslab;
using oracle::Complex;

namespace {

double max_abs(const GrunskyMatrix& m)
{
    double v = 0.0;
    for (const Complex& w : m.weighted) v = std::max(v, std::abs(w));
    return v;
}

PolygonSpec rectangle() { return validate_polygon({0.5, 0.5, 0.5, 0.5}, {0.0, 1.0, 2.0, 3.0}); }

} // namespace

TEST_CASE("identity and translations have vanishing Grunsky matrices")
{
    for (Complex b0 : {Complex(0.0), Complex(2.0, -1.0)}) {
        const ExteriorExpansion f({b0}, 16);
        const auto m = grunsky_matrix(f, 16);
        CHECK(max_abs(m) == 0.0);
        CHECK(m.operator_norm_lower_bound == 0.0);
    }
    CHECK_THROWS_AS(grunsky_matrix(ExteriorExpansion({0.0}, 4), 5), ValidationError);
    CHECK_THROWS_AS(ExteriorExpansion({}), ValidationError);
}

TEST_CASE("Joukowski: c_nn = b^n / n and norm |b|")
{
    for (Complex b1 : {Complex(1.0), Complex(0.3, 0.4)}) {
        const ExteriorExpansion f({0.0, b1}, 12);
        const auto m = grunsky_matrix(f, 12);
        for (std::size_t j = 1; j <= 12; ++j)
            for (std::size_t l = 1; l <= 12; ++l) {
                const Complex want = j == l ? std::pow(b1, double(j)) / double(j) : Complex{};
                CHECK(std::abs(m.c(j, l) - want) < 1e-14);
            }
        CHECK(m.operator_norm_lower_bound == doctest::Approx(std::abs(b1)).epsilon(1e-12));
    }
}

TEST_CASE("Faber recursion agrees with the brute-force bivariate series")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const int k = 7;
        std::vector<Complex> b(2 * k + 1);
        for (std::size_t m = 0; m < b.size(); ++m) b[m] = Complex(u(rng), u(rng)) * (0.6 / double(1 + m * m));
        const auto want = oracle::brute_force_grunsky(b, k);
        const auto got = grunsky_matrix(ExteriorExpansion(b), k);
        for (int j = 1; j <= k; ++j)
            for (int l = 1; l <= k; ++l) CHECK(std::abs(got.c(j, l) - want[j][l]) < 1e-10);
        CHECK(got.symmetry_defect < 1e-10);
        CHECK_FALSE(got.ill_conditioned);
    }
}

TEST_CASE("truncated norms are nondecreasing in N")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Complex> b(41);
    for (std::size_t m = 0; m < b.size(); ++m) b[m] = Complex(u(rng), u(rng)) / double(2 + m);
    const ExteriorExpansion f(b);
    const auto rep = grunsky_report(f, {1, 2, 4, 8, 12, 16, 20});
    CHECK(rep.monotone);
    for (std::size_t i = 1; i < rep.norms.size(); ++i) CHECK(rep.norms[i] >= rep.norms[i - 1]);
}

TEST_CASE("contour extraction")
{
    auto joukowski = [](Complex z) { return z + 1.0 / z; };
    const auto f = exterior_expansion(joukowski, 1.25, 16, 256);
    CHECK(f.truncation() == 32);
    CHECK(std::abs(f.coefficient(1) - 1.0) < 1e-12);
    for (std::size_t k : {0u, 2u, 3u, 10u, 32u}) CHECK(std::abs(f.coefficient(k)) < 1e-12);
    CHECK(f.aliasing_estimate < 1e-12);

    auto doubled = [](Complex z) { return 2.0 * z; };
    CHECK_THROWS_AS(exterior_expansion(doubled, 1.25, 4, 64), ValidationError);
    CHECK_THROWS_AS(exterior_expansion(joukowski, 1.25, 16, 100), ValidationError);
    try {
        exterior_expansion(doubled, 1.25, 4, 64);
    } catch (const ValidationError& e) {
        CHECK(e.code() == "not_normalized");
    }
}

TEST_CASE("maps from Schwarzians")
{
    // phi = 0: the exterior map is affine, so the matrix vanishes
    const auto mobius = exterior_expansion_from_schwarzian(PoleExpansion({0.0, 1.0}, {}), 16);
    CHECK(max_abs(grunsky_matrix(mobius, 16)) < 1e-9);

    // Grunsky necessity along both probe families; the dependence on t is only reported.
    const double r0 = critical_radius(rectangle()).r0;
    for (auto variant : {ProbeVariant::homotopy, ProbeVariant::scaled}) {
        for (double t : {0.5 * r0, 0.9 * r0, r0}) {
            const auto phi = probe_schwarzian(rectangle(), variant, variant == ProbeVariant::scaled ? t / r0 : t);
            const auto f = exterior_expansion_from_schwarzian(phi, 32, 512);
            const auto f2 = exterior_expansion_from_schwarzian(phi, 32, 1024);
            double diff = 0.0;
            for (std::size_t k = 0; k <= 32; ++k) diff = std::max(diff, std::abs(f.coefficient(k) - f2.coefficient(k)));
            CHECK(diff < 1e-8);
            const auto m = grunsky_matrix(f, 32);
            CHECK(m.symmetry_defect < 1e-10);
            CHECK(m.operator_norm_lower_bound <= 1.0 + 1e-3);
            MESSAGE(std::string(to_string(variant)) << " t = " << t << ": truncated Grunsky norm " << m.operator_norm_lower_bound);
        }
    }
}

TEST_CASE("CSV and JSON")
{
    const ExteriorExpansion f({0.0, 0.5}, 4);
    std::ostringstream os;
    write_grunsky_csv(os, grunsky_matrix(f, 2));
    CHECK(os.str().rfind("# schema=berslab.grunsky_matrix/1\nj,l,re,im\n1,1,0.5,0\n", 0) == 0);
    nlohmann::json j = grunsky_report(f, {1, 2}, 0.25);
    CHECK(j["schema"] == "berslab.grunsky/1");
    CHECK(j["truncated_norms"].size() == 2);
    CHECK(j["beltrami_norm"] == 0.25);
}
