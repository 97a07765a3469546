#include "berslab/grunsky.hpp"

#include "berslab/norms.hpp"
#include "berslab/parallel.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

namespace berslab {

ExteriorExpansion::ExteriorExpansion(std::vector<Complex> b, std::optional<std::size_t> truncation)
    : b_(std::move(b))
{
    if (b_.empty()) throw ValidationError("empty_expansion", "exterior expansion needs at least b_0");
    if (truncation && *truncation + 1 > b_.size()) b_.resize(*truncation + 1, Complex{});
}

Complex ExteriorExpansion::evaluate(Complex z) const
{
    const Complex s = 1.0 / z;
    Complex acc{};
    for (std::size_t k = b_.size(); k-- > 0;) acc = acc * s + b_[k];
    return z + acc;
}

namespace {

// (1/M) sum_m f_m e^{-2 pi i k m / M}, the coefficient of e^{i k theta}.
Complex dft_coefficient(const std::vector<Complex>& f, long k)
{
    const std::size_t m = f.size();
    Complex acc{};
    for (std::size_t j = 0; j < m; ++j) {
        const long phase = static_cast<long>((static_cast<long long>(k) * static_cast<long long>(j)) %
                                             static_cast<long long>(m));
        acc += f[j] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(phase) / static_cast<double>(m));
    }
    return acc / static_cast<double>(m);
}

std::vector<Complex> circle_nodes(double radius, std::size_t m)
{
    std::vector<Complex> z(m);
    for (std::size_t j = 0; j < m; ++j)
        z[j] = std::polar(radius, 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(m));
    return z;
}

} // namespace

ExteriorExpansion exterior_expansion_from_samples(const std::vector<Complex>& samples, double radius,
                                                  std::size_t n)
{
    const std::size_t m = samples.size();
    if (n < 1 || m < 8 * n)
        throw ValidationError("insufficient_nodes", "need at least 8N contour nodes (N = " +
                                                        std::to_string(n) + ", M = " + std::to_string(m) + ")");
    if (!(radius > 1.0) || !std::isfinite(radius))
        throw ValidationError("radius", "sampling circle must have radius > 1");

    const Complex lead = dft_coefficient(samples, 1) / radius;
    if (std::abs(lead - 1.0) > 1e-6)
        throw ValidationError("not_normalized", "coefficient of z is " + std::to_string(lead.real()) +
                                                    (lead.imag() < 0 ? "" : "+") + std::to_string(lead.imag()) +
                                                    "i, expected 1");

    const std::size_t top = 2 * n;
    std::vector<Complex> b(top + 1);
    for (std::size_t k = 0; k <= top; ++k)
        b[k] = dft_coefficient(samples, -static_cast<long>(k)) * std::pow(radius, static_cast<double>(k));

    double spurious = 0.0;
    for (std::size_t k = 2; k < m / 2; ++k) spurious = std::max(spurious, std::abs(dft_coefficient(samples, static_cast<long>(k))));
    ExteriorExpansion out(std::move(b));
    out.aliasing_estimate = spurious + std::abs(out.coefficient(top)) * std::pow(radius, -static_cast<double>(top));
    return out;
}

ExteriorExpansion exterior_expansion(const std::function<Complex(Complex)>& f, double radius,
                                     std::size_t n, std::size_t nodes)
{
    const auto z = circle_nodes(radius, nodes);
    std::vector<Complex> samples(nodes);
    parallel_for(nodes, [&](std::size_t j) { samples[j] = f(z[j]); });
    return exterior_expansion_from_samples(samples, radius, n);
}

ExteriorExpansion exterior_expansion_from_schwarzian(const PoleExpansion& phi, std::size_t n,
                                                     std::size_t nodes, double radius,
                                                     const OdeOptions& ode)
{
    if (!(radius > 1.0)) throw ValidationError("radius", "sampling circle must have radius > 1");
    const auto z = circle_nodes(radius, nodes);
    std::vector<Complex> path;
    path.reserve(nodes);
    for (const Complex& q : z) path.push_back(cayley_exterior(q));
    OdeOptions opts = ode;
    opts.base = I;
    const auto sol = solve_companion(phi, path, opts);
    const auto& cps = sol.checkpoints();
    // checkpoint 0 is the base point; the remaining ones follow the path.
    std::vector<Complex> samples(nodes);
    for (std::size_t j = 0; j < nodes; ++j) samples[j] = cps[cps.size() - nodes + j].state.w();

    const Complex lead = dft_coefficient(samples, 1) / radius;
    if (!(std::abs(lead) > 0.0) || !std::isfinite(std::abs(lead)))
        throw NumericalError("degenerate_map", "exterior map has no simple pole at infinity");
    for (Complex& s : samples) s /= lead;
    return exterior_expansion_from_samples(samples, radius, n);
}

Complex GrunskyMatrix::c(std::size_t j, std::size_t l) const
{
    return weighted[(j - 1) * n + (l - 1)] / std::sqrt(static_cast<double>(j * l));
}

GrunskyMatrix grunsky_matrix(const ExteriorExpansion& f, std::size_t n)
{
    if (n < 1 || n > f.truncation())
        throw ValidationError("truncation", "Grunsky size must satisfy 1 <= N <= " + std::to_string(f.truncation()));

    // Laurent series in zeta with powers n .. -depth, stored at index power + depth.
    const long top = static_cast<long>(n);
    const long depth = 2 * top;
    const std::size_t width = static_cast<std::size_t>(top + depth + 1);
    auto at = [depth](long power) { return static_cast<std::size_t>(power + depth); };

    // g = f - b_0 = zeta + sum_k b_k zeta^-k
    std::vector<Complex> g(width);
    g[at(1)] = 1.0;
    for (long k = 1; k <= depth; ++k) g[at(-k)] = f.coefficient(static_cast<std::size_t>(k));

    // Faber polynomials evaluated on f: P_m = F_m(f(zeta)) = zeta^m + sum_k beta_mk zeta^-k
    std::vector<std::vector<Complex>> faber(n + 1, std::vector<Complex>(width));
    faber[0][at(0)] = 1.0;
    faber[1] = g;
    for (std::size_t m = 1; m < n; ++m) {
        auto& next = faber[m + 1];
        const auto& cur = faber[m];
        for (long p = -depth; p <= top; ++p) {
            const Complex cp = cur[at(p)];
            if (cp == Complex{}) continue;
            if (p + 1 <= top) next[at(p + 1)] += cp;
            for (long k = 1; p - k >= -depth; ++k) next[at(p - k)] += cp * g[at(-k)];
        }
        // cancel the positive powers zeta^{m-k} introduced by b_k zeta^{-k} * zeta^m
        for (std::size_t k = 1; k < m; ++k) {
            const Complex bk = f.coefficient(k);
            for (std::size_t i = 0; i < width; ++i) next[i] -= bk * faber[m - k][i];
        }
        next[at(0)] = 0.0;
    }

    GrunskyMatrix out;
    out.n = n;
    out.weighted.assign(n * n, Complex{});
    for (std::size_t j = 1; j <= n; ++j) {
        for (std::size_t l = 1; l <= n; ++l) {
            const Complex beta = faber[j][at(-static_cast<long>(l))];
            out.max_faber_coefficient = std::max(out.max_faber_coefficient, std::abs(beta));
            const Complex c = beta / static_cast<double>(j);
            out.weighted[(j - 1) * n + (l - 1)] = std::sqrt(static_cast<double>(j * l)) * c;
        }
    }
    out.ill_conditioned = !std::isfinite(out.max_faber_coefficient) || out.max_faber_coefficient > 1e12;
    for (std::size_t j = 1; j <= n; ++j)
        for (std::size_t l = j + 1; l <= n; ++l) out.symmetry_defect = std::max(out.symmetry_defect, std::abs(out.c(j, l) - out.c(l, j)));

    if (!out.ill_conditioned) {
        Eigen::MatrixXcd a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t l = 0; l < n; ++l) a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)) = out.weighted[j * n + l];
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
        out.operator_norm_lower_bound = svd.singularValues()(0);
    } else {
        out.operator_norm_lower_bound = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

GrunskyReport grunsky_report(const ExteriorExpansion& f, const std::vector<std::size_t>& sizes,
                             std::optional<double> beltrami_norm)
{
    GrunskyReport r;
    r.sizes = sizes;
    r.beltrami_norm = beltrami_norm;
    r.aliasing_estimate = f.aliasing_estimate;
    for (std::size_t n : sizes) r.norms.push_back(grunsky_matrix(f, n).operator_norm_lower_bound);
    for (std::size_t i = 1; i < r.norms.size(); ++i)
        if (sizes[i] > sizes[i - 1] && !(r.norms[i] >= r.norms[i - 1] * (1.0 - 1e-12))) r.monotone = false;
    return r;
}

void to_json(nlohmann::json& j, const GrunskyReport& r)
{
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < r.sizes.size(); ++i) rows.push_back({{"N", r.sizes[i]}, {"norm", r.norms[i]}});
    j = {{"schema", "berslab.grunsky/1"},
         {"truncated_norms", rows},
         {"monotone", r.monotone},
         {"aliasing_estimate", r.aliasing_estimate},
         {"beltrami_norm", r.beltrami_norm ? nlohmann::json(*r.beltrami_norm) : nlohmann::json(nullptr)}};
}

void write_grunsky_csv(std::ostream& out, const GrunskyMatrix& m)
{
    out << "# schema=berslab.grunsky_matrix/1\nj,l,re,im\n";
    out.precision(17);
    for (std::size_t j = 0; j < m.n; ++j)
        for (std::size_t l = 0; l < m.n; ++l) {
            const Complex v = m.weighted[j * m.n + l];
            out << j + 1 << ',' << l + 1 << ',' << v.real() << ',' << v.imag() << '\n';
        }
}

} // namespace berslab
