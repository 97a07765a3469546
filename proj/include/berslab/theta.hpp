#pragma once

#include "berslab/norms.hpp"

#include <string>
#include <vector>

#include "json.hpp"

namespace berslab {

/// z -> (a z + b) / (c z + d) with ad - bc = 1. Matrices are kept with the sign fixed so
/// that the first nonzero entry of (a, b, c, d) has positive real part (or zero real part
/// and positive imaginary part); M and -M describe the same map.
class MoebiusTransform {
public:
    MoebiusTransform() = default;   // identity
    /// Throws ValidationError("determinant") if |ad - bc - 1| > 1e-12.
    MoebiusTransform(Complex a, Complex b, Complex c, Complex d);
    /// Divides by a square root of ad - bc (which must be nonzero).
    static MoebiusTransform normalized(Complex a, Complex b, Complex c, Complex d);
    /// z -> lambda z conjugated into SL(2, R) so that its fixed points 0, infinity move to
    /// p < q on the real line (p repelling, q attracting, translation length log lambda).
    static MoebiusTransform hyperbolic(double p, double q, double lambda);
    /// z -> lambda z.
    static MoebiusTransform dilation(double lambda);

    [[nodiscard]] Complex a() const noexcept { return a_; }
    [[nodiscard]] Complex b() const noexcept { return b_; }
    [[nodiscard]] Complex c() const noexcept { return c_; }
    [[nodiscard]] Complex d() const noexcept { return d_; }

    [[nodiscard]] Complex operator()(Complex z) const { return (a_ * z + b_) / (c_ * z + d_); }
    [[nodiscard]] Complex derivative(Complex z) const
    {
        const Complex den = c_ * z + d_;
        return 1.0 / (den * den);
    }
    [[nodiscard]] Complex trace() const noexcept { return a_ + d_; }
    [[nodiscard]] MoebiusTransform inverse() const;
    [[nodiscard]] bool approx_equal(const MoebiusTransform& o, double tol = 1e-10) const;
    [[nodiscard]] bool is_identity(double tol = 1e-10) const { return approx_equal(MoebiusTransform{}, tol); }

    friend MoebiusTransform operator*(const MoebiusTransform& f, const MoebiusTransform& g);   // f o g

private:
    void fix_sign();

    Complex a_{1.0}, b_{}, c_{}, d_{1.0};
};

/// [{"a":[re,im],"b":[re,im],"c":[re,im],"d":[re,im]}, ...]; entries are rescaled to unit
/// determinant.
std::vector<MoebiusTransform> generators_from_json(const nlohmann::json& j);
std::vector<MoebiusTransform> load_generators(const std::string& path);
nlohmann::json generators_to_json(const std::vector<MoebiusTransform>& gens);

/// Distinct group elements of word length <= L in the generators and their inverses.
struct GroupBall {
    std::vector<MoebiusTransform> generators;   // as given, without inverses
    std::size_t max_word_length = 0;
    std::vector<MoebiusTransform> elements;     // shell by shell, identity first
    std::vector<std::size_t> word_length;       // parallel to elements
    bool strictly_hyperbolic = false;           // every generator has |trace| > 2 + 1e-9, real entries

    [[nodiscard]] std::size_t shell_count() const { return max_word_length + 1; }
};

inline constexpr std::size_t max_ball_elements = 1'000'000;

/// Breadth-first over reduced words. Throws ValidationError("ball_too_large") past
/// max_ball_elements.
GroupBall enumerate_ball(const std::vector<MoebiusTransform>& generators, std::size_t max_word_length);

struct ThetaValue {
    Complex value;
    std::vector<double> shell_magnitudes;   // sum of |term| over shell k
    double tail_estimate = 0.0;             // magnitude of the outermost shell
    bool convergent = true;                 // shell magnitudes decrease over the last three shells
};

/// sum over the ball of phi(gamma z) gamma'(z)^2. Throws ValidationError("pole_orbit") when
/// some gamma z hits a pole of phi.
ThetaValue theta_series(const HolomorphicFunction& phi, const GroupBall& ball, Complex z);

/// max over the samples of |Theta(gamma z) gamma'(z)^2 - Theta(z)|.
double equivariance_residual(const HolomorphicFunction& phi, const GroupBall& ball,
                             const MoebiusTransform& gamma, const std::vector<Complex>& samples);

/// Residual per truncation length, for tables.
struct EquivarianceRow {
    std::size_t max_word_length = 0;
    std::size_t elements = 0;
    double residual = 0.0;
    double tail_estimate = 0.0;
};

std::vector<EquivarianceRow> equivariance_table(const HolomorphicFunction& phi,
                                                const std::vector<MoebiusTransform>& generators,
                                                std::size_t max_word_length,
                                                const std::vector<Complex>& samples);

void to_json(nlohmann::json& j, const EquivarianceRow& r);

} // namespace berslab
