#include "berslab/pole_expansion.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace berslab {

namespace {

std::string near_pole_message(std::size_t j, double a, Complex z)
{
    std::ostringstream os;
    os << "evaluation at z = (" << z.real() << ", " << z.imag() << ") is within "
       << PoleExpansion::near_pole_tolerance << " of pole " << j << " (a = " << a << ")";
    return os.str();
}

} // namespace

NearPoleError::NearPoleError(std::size_t pole_index, double pole, Complex z)
    : Error("near_pole", near_pole_message(pole_index, pole, z)), pole_index_(pole_index) {}

PoleExpansion::PoleExpansion(std::vector<double> poles, std::vector<Complex> simple,
                             std::vector<Complex> dbl, CrossMap cross)
    : poles_(std::move(poles)), simple_(std::move(simple)), double_(std::move(dbl)),
      cross_(std::move(cross))
{
    const std::size_t n = poles_.size();
    if (n == 0)
        throw ValidationError("empty_poles", "pole expansion needs at least one pole");
    for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(poles_[j]))
            throw ValidationError("pole_not_finite", "pole " + std::to_string(j) + " is not finite");
        if (j > 0 && !(poles_[j] > poles_[j - 1]))
            throw ValidationError("poles_not_increasing", "poles must be strictly increasing");
    }
    if (simple_.empty())
        simple_.assign(n, Complex{});
    if (double_.empty())
        double_.assign(n, Complex{});
    if (simple_.size() != n || double_.size() != n)
        throw ValidationError("coefficient_length", "coefficient vectors must match the pole count");
    for (const auto& [key, c] : cross_) {
        if (!(key.first < key.second) || key.second >= n)
            throw ValidationError("cross_index", "cross-term keys must satisfy j < l < n");
    }
}

bool PoleExpansion::has_only_simple_poles() const noexcept
{
    const bool no_double = std::all_of(double_.begin(), double_.end(),
                                       [](Complex c) { return c == Complex{}; });
    const bool no_cross = std::all_of(cross_.begin(), cross_.end(),
                                      [](const auto& kv) { return kv.second == Complex{}; });
    return no_double && no_cross;
}

Complex PoleExpansion::evaluate(Complex z) const
{
    const std::size_t n = poles_.size();
    std::vector<Complex> inv(n);
    for (std::size_t j = 0; j < n; ++j) {
        const Complex d = z - poles_[j];
        if (std::abs(d) < near_pole_tolerance)
            throw NearPoleError(j, poles_[j], z);
        inv[j] = 1.0 / d;
    }
    Complex sum{};
    for (std::size_t j = 0; j < n; ++j)
        sum += inv[j] * (simple_[j] + double_[j] * inv[j]);
    for (const auto& [key, c] : cross_)
        sum += c * inv[key.first] * inv[key.second];
    return sum;
}

Complex PoleExpansion::derivative(Complex z) const
{
    const std::size_t n = poles_.size();
    std::vector<Complex> inv(n);
    for (std::size_t j = 0; j < n; ++j) {
        const Complex d = z - poles_[j];
        if (std::abs(d) < near_pole_tolerance)
            throw NearPoleError(j, poles_[j], z);
        inv[j] = 1.0 / d;
    }
    Complex sum{};
    for (std::size_t j = 0; j < n; ++j) {
        const Complex i2 = inv[j] * inv[j];
        sum -= simple_[j] * i2 + 2.0 * double_[j] * i2 * inv[j];
    }
    // d/dz [1/((z-a)(z-b))] = -(1/(z-a) + 1/(z-b)) / ((z-a)(z-b))
    for (const auto& [key, c] : cross_) {
        const Complex p = inv[key.first] * inv[key.second];
        sum -= c * p * (inv[key.first] + inv[key.second]);
    }
    return sum;
}

PoleExpansion PoleExpansion::scaled(Complex factor) const
{
    PoleExpansion out = *this;
    for (auto& c : out.simple_) c *= factor;
    for (auto& c : out.double_) c *= factor;
    for (auto& kv : out.cross_) kv.second *= factor;
    return out;
}

std::vector<Complex> PoleExpansion::effective_residues() const
{
    std::vector<Complex> r = simple_;
    // 1/((z-a)(z-b)) = [1/(z-a) - 1/(z-b)] / (a-b)
    for (const auto& [key, c] : cross_) {
        const double gap = poles_[key.first] - poles_[key.second];
        r[key.first] += c / gap;
        r[key.second] -= c / gap;
    }
    return r;
}

std::vector<Complex> PoleExpansion::laurent_at_pole(std::size_t j, std::size_t count) const
{
    if (j >= poles_.size())
        throw ValidationError("pole_index", "pole index out of range");
    const std::vector<Complex> res = effective_residues();
    std::vector<Complex> p(count, Complex{});
    if (count > 0) p[0] = double_[j];
    if (count > 1) p[1] = res[j];
    for (std::size_t l = 0; l < poles_.size(); ++l) {
        if (l == j) continue;
        const double d = poles_[l] - poles_[j];
        // With x = z - a_j:  1/(x-d) = -sum x^k / d^(k+1),  1/(x-d)^2 = sum (k+1) x^k / d^(k+2).
        double dk1 = d;     // d^(k+1)
        for (std::size_t k = 0; k + 2 < count; ++k) {
            const double dk2 = dk1 * d;
            p[k + 2] += double_[l] * (static_cast<double>(k + 1) / dk2) - res[l] / dk1;
            dk1 = dk2;
        }
    }
    return p;
}

std::vector<Complex> PoleExpansion::laurent_at_infinity(std::size_t count) const
{
    const std::vector<Complex> res = effective_residues();
    std::vector<Complex> q(count, Complex{});
    // 1/(z-a) = sum_{k>=1} a^(k-1) z^-k,  1/(z-a)^2 = sum_{k>=2} (k-1) a^(k-2) z^-k
    for (std::size_t l = 0; l < poles_.size(); ++l) {
        const double a = poles_[l];
        double a_km1 = 1.0; // a^(k-1)
        double a_km2 = 0.0; // a^(k-2), zero for k = 1
        for (std::size_t k = 1; k < count; ++k) {
            q[k] += res[l] * a_km1 + double_[l] * (static_cast<double>(k - 1) * a_km2);
            a_km2 = a_km1;
            a_km1 *= a;
        }
    }
    return q;
}

bool PoleExpansion::same_coefficients(const PoleExpansion& other) const
{
    return poles_ == other.poles_ && simple_ == other.simple_ && double_ == other.double_ &&
           cross_ == other.cross_;
}

namespace {

nlohmann::json complex_to_json(Complex c) { return nlohmann::json::array({c.real(), c.imag()}); }

Complex complex_from_json(const nlohmann::json& j)
{
    if (!j.is_array() || j.size() != 2)
        throw ValidationError("json_complex", "complex numbers are encoded as [re, im]");
    return {j.at(0).get<double>(), j.at(1).get<double>()};
}

} // namespace

void to_json(nlohmann::json& j, const PoleExpansion& e)
{
    j = nlohmann::json::object();
    j["poles"] = e.poles();
    auto& simple = j["simple"] = nlohmann::json::array();
    for (Complex c : e.simple_coeffs()) simple.push_back(complex_to_json(c));
    auto& dbl = j["double"] = nlohmann::json::array();
    for (Complex c : e.double_coeffs()) dbl.push_back(complex_to_json(c));
    auto& cross = j["cross"] = nlohmann::json::array();
    for (const auto& [key, c] : e.cross_coeffs())
        cross.push_back({{"j", key.first}, {"l", key.second}, {"c", complex_to_json(c)}});
}

void from_json(const nlohmann::json& j, PoleExpansion& e)
{
    auto poles = j.at("poles").get<std::vector<double>>();
    std::vector<Complex> simple, dbl;
    if (j.contains("simple"))
        for (const auto& c : j.at("simple")) simple.push_back(complex_from_json(c));
    if (j.contains("double"))
        for (const auto& c : j.at("double")) dbl.push_back(complex_from_json(c));
    PoleExpansion::CrossMap cross;
    if (j.contains("cross"))
        for (const auto& item : j.at("cross"))
            cross[{item.at("j").get<std::size_t>(), item.at("l").get<std::size_t>()}] =
                complex_from_json(item.at("c"));
    e = PoleExpansion(std::move(poles), std::move(simple), std::move(dbl), std::move(cross));
}

} // namespace berslab
