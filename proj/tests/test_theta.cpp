#include "doctest.h"
#include "oracles.hpp"

#include "berslab/theta.hpp"

#include <random>

using namespace berslab;
using oracle::Complex;

namespace {

HolomorphicFunction quartic_at(Complex pole)
{
    return {[pole](Complex z) { return 1.0 / std::pow(z - pole, 4); }, {}};
}

std::vector<MoebiusTransform> schottky_pair(double lambda)
{
    return {MoebiusTransform::hyperbolic(1.0, 2.0, lambda), MoebiusTransform::hyperbolic(-2.0, -1.0, lambda)};
}

bool all_distinct(const GroupBall& ball)
{
    for (std::size_t i = 0; i < ball.elements.size(); ++i)
        for (std::size_t j = i + 1; j < ball.elements.size(); ++j)
            if (ball.elements[i].approx_equal(ball.elements[j])) return false;
    return true;
}

} // namespace

TEST_CASE("Moebius transforms")
{
    CHECK_THROWS_AS(MoebiusTransform(1.0, 1.0, 1.0, 3.0), ValidationError);
    CHECK_THROWS_AS(MoebiusTransform::normalized(1.0, 2.0, 2.0, 4.0), ValidationError);
    const auto m = MoebiusTransform::normalized(2.0, 1.0, 1.0, 3.0);
    CHECK(std::abs(m.a() * m.d() - m.b() * m.c() - 1.0) < 1e-14);
    CHECK((m * m.inverse()).is_identity(1e-14));
    const Complex z(0.3, 0.7);
    CHECK(std::abs(m(z) - (2.0 * z + 1.0) / (z + 3.0)) < 1e-14);
    // chain rule for the derivative
    const auto g = MoebiusTransform::hyperbolic(-1.0, 4.0, 3.0);
    CHECK(std::abs((m * g).derivative(z) - m.derivative(g(z)) * g.derivative(z)) < 1e-13);
    // fixed points and multiplier of the hyperbolic constructor
    CHECK(std::abs(g(-1.0) + 1.0) < 1e-13);
    CHECK(std::abs(g(4.0) - 4.0) < 1e-13);
    CHECK(std::abs(g.derivative(4.0) - 1.0 / 3.0) < 1e-13);
    CHECK(std::abs(g.trace().real()) == doctest::Approx(std::sqrt(3.0) + 1.0 / std::sqrt(3.0)));
    // M and -M are the same element
    CHECK(MoebiusTransform::normalized(-2.0, -1.0, -1.0, -3.0).approx_equal(m, 1e-15));
    CHECK(MoebiusTransform::normalized(-2.0, -1.0, -1.0, -3.0).a().real() > 0.0);
}

TEST_CASE("generator JSON")
{
    const auto gens = schottky_pair(20.0);
    const auto back = generators_from_json(generators_to_json(gens));
    REQUIRE(back.size() == 2);
    CHECK(back[0].approx_equal(gens[0], 1e-14));
    const auto scaled = generators_from_json(nlohmann::json::parse(R"([{"a":2,"b":0,"c":[0,0],"d":2}])"));
    CHECK(scaled[0].is_identity(1e-15));
    CHECK_THROWS_AS(generators_from_json(nlohmann::json::parse(R"([{"a":1,"b":0,"c":0}])")), ValidationError);
    CHECK_THROWS_AS(load_generators("/nonexistent/gens.json"), ValidationError);
}

TEST_CASE("ball enumeration counts")
{
    const auto g = MoebiusTransform::dilation(2.0);
    CHECK(enumerate_ball({g}, 0).elements.size() == 1);
    CHECK(enumerate_ball({g}, 0).elements[0].is_identity(0.0));
    const auto cyclic = enumerate_ball({g}, 3);
    CHECK(cyclic.elements.size() == 7);
    CHECK(cyclic.strictly_hyperbolic);
    CHECK(all_distinct(cyclic));

    // free group on two generators: 1 + 4 * 3^(L-1) * ... words
    std::size_t expected = 1, shell = 4;
    for (std::size_t len = 1; len <= 5; ++len) {
        expected += shell;
        shell *= 3;
        const auto ball = enumerate_ball(schottky_pair(20.0), len);
        CHECK(ball.elements.size() == expected);
        if (len <= 3) CHECK(all_distinct(ball));
    }
    CHECK(enumerate_ball(schottky_pair(20.0), 2).elements.size() == 17);

    // relations collapse words: an involution generates a group of order 2
    const MoebiusTransform flip(0.0, -1.0, 1.0, 0.0);   // z -> -1/z
    const auto order2 = enumerate_ball({flip}, 4);
    CHECK(order2.elements.size() == 2);
    CHECK_FALSE(order2.strictly_hyperbolic);
    // identity present exactly once even when a generator is trivial
    CHECK(enumerate_ball({MoebiusTransform{}, g}, 2).elements.size() == 5);
}

TEST_CASE("ball size guard")
{
    CHECK_THROWS_AS(enumerate_ball(schottky_pair(20.0), 13), ValidationError);
}

TEST_CASE("theta series basics")
{
    const auto phi = quartic_at(Complex(0.0, -1.0));
    const Complex z(0.4, 1.3);
    const auto id_ball = enumerate_ball({}, 3);
    CHECK(theta_series(phi, id_ball, z).value == phi.eval(z));

    const auto ball = enumerate_ball(schottky_pair(20.0), 4);
    const HolomorphicFunction zero{[](Complex) { return Complex{}; }, {}};
    CHECK(theta_series(zero, ball, z).value == Complex{});

    // linearity
    const auto psi = quartic_at(Complex(1.0, -2.0));
    const HolomorphicFunction combo{[&](Complex w) { return 2.0 * phi.eval(w) - Complex(0.0, 3.0) * psi.eval(w); }, {}};
    const Complex lhs = theta_series(combo, ball, z).value;
    const Complex rhs = 2.0 * theta_series(phi, ball, z).value - Complex(0.0, 3.0) * theta_series(psi, ball, z).value;
    CHECK(std::abs(lhs - rhs) <= 1e-13 * std::abs(rhs));

    // the translation z -> z - i carries i onto the pole at 0
    const auto shift = MoebiusTransform(1.0, Complex(0.0, -1.0), 0.0, 1.0);
    const auto with_pole = as_function(PoleExpansion({0.0}, {}, {1.0}));
    try {
        (void)theta_series(with_pole, enumerate_ball({shift}, 1), Complex(0.0, 1.0));
        FAIL("expected pole_orbit");
    } catch (const ValidationError& e) {
        CHECK(e.code() == "pole_orbit");
    }
}

TEST_CASE("cyclic group: closed-form geometric sums")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.2, 2.0);
    for (double lambda : {1.5, 2.0, 5.0}) {
        const std::size_t len = 6;
        const auto ball = enumerate_ball({MoebiusTransform::dilation(lambda)}, len);
        for (int s = 0; s < 5; ++s) {
            const Complex z(u(rng) - 1.0, u(rng));
            // phi = z^-4: sum_k lambda^{2k} (lambda^k z)^-4 = z^-4 sum_{|k|<=L} lambda^{-2k}
            double geometric = 0.0;
            for (int k = -static_cast<int>(len); k <= static_cast<int>(len); ++k) geometric += std::pow(lambda, -2.0 * k);
            const Complex want = geometric / std::pow(z, 4);
            const Complex got = theta_series(quartic_at(0.0), ball, z).value;
            CHECK(std::abs(got - want) <= 1e-10 * std::abs(want));
        }
    }
}

TEST_CASE("cyclic group: equivariance residual decays by lambda^-4 per two shells")
{
    const double lambda = 1.8;
    const auto phi = quartic_at(Complex(0.0, -1.0));
    const std::vector<Complex> samples{{0.0, 1.0}, {0.5, 0.8}, {-1.0, 2.0}};
    const auto table = equivariance_table(phi, {MoebiusTransform::dilation(lambda)}, 12, samples);
    REQUIRE(table.size() == 13);
    for (std::size_t len = 2; len + 1 < table.size(); ++len) CHECK(table[len + 1].residual < table[len].residual);
    for (std::size_t len = 6; len + 2 < table.size(); ++len) {
        const double ratio = table[len + 2].residual / table[len].residual;
        CHECK(ratio == doctest::Approx(std::pow(lambda, -4.0)).epsilon(0.05));
    }
    // the identity is trivially equivariant
    const auto ball = enumerate_ball({MoebiusTransform::dilation(lambda)}, 4);
    CHECK(equivariance_residual(phi, ball, MoebiusTransform{}, samples) == 0.0);
}

TEST_CASE("two-generator Schottky group: residual and shells decrease")
{
    const auto phi = quartic_at(Complex(0.0, -1.0));
    const std::vector<Complex> samples{{0.0, 1.0}, {0.3, 0.5}, {-0.4, 1.5}};
    const auto table = equivariance_table(phi, schottky_pair(6.0), 7, samples);
    REQUIRE(table.size() == 8);
    for (std::size_t len = 5; len < table.size(); ++len) CHECK(table[len].residual < table[len - 1].residual);
    for (const auto& row : table) MESSAGE("L = " << row.max_word_length << " residual " << row.residual);
    const auto value = theta_series(phi, enumerate_ball(schottky_pair(6.0), 7), samples[1]);
    CHECK(value.convergent);
    CHECK(value.tail_estimate < 1e-3 * value.shell_magnitudes[1]);
}
