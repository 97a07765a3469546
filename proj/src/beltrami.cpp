#include "berslab/beltrami.hpp"

#include <cmath>
#include <ostream>

namespace berslab {

BeltramiField::BeltramiField(PoleExpansion phi, double scale) : phi_(std::move(phi)), scale_(scale)
{
    if (!std::isfinite(scale)) throw ValidationError("scale", "Beltrami scale must be finite");
}

Complex BeltramiField::evaluate(Complex z) const
{
    if (!(z.imag() < 0.0))
        throw ValidationError("outside_domain", "Beltrami field lives on the lower half-plane");
    return -scale_ * z.imag() * z.imag() * phi_.evaluate(std::conj(z));
}

BeltramiField ahlfors_weill_field(const PoleExpansion& phi, double scale) { return {phi, scale}; }

NormEstimate field_sup_norm(const BeltramiField& field, const SamplingBudget& budget)
{
    const double s = std::abs(field.scale());
    const auto& phi = field.source_phi();
    std::vector<Complex> hot;
    for (double a : phi.poles()) hot.emplace_back(a, 0.0);
    NormEstimate e = maximize_over(
        Region::lower_half_plane,
        [&](Complex z, double m) { return s * m * m * std::abs(phi.evaluate(std::conj(z))); }, hot,
        budget);
    e.model = NormModel::half_plane_1;
    return e;
}

AhlforsWeillReport ahlfors_weill_report(const BeltramiField& field, const SamplingBudget& budget)
{
    AhlforsWeillReport r;
    r.scale = field.scale();
    const auto nu = field_sup_norm(field, budget);
    const auto hp1 = hyperbolic_sup_norm(field.source_phi(), NormModel::half_plane_1, budget);
    r.field_norm = nu.value;
    r.norm_hp1 = hp1.value;
    r.norm_hp4 = 4.0 * hp1.value;
    r.admissible = r.field_norm < 1.0;
    r.proviso_hp1 = r.norm_hp1 < 2.0;
    r.proviso_hp4 = r.norm_hp4 < 2.0;
    r.stabilized = nu.stabilized && hp1.stabilized;
    return r;
}

void to_json(nlohmann::json& j, const AhlforsWeillReport& r)
{
    j = {{"scale", r.scale},
         {"field_norm", r.field_norm},
         {"norm_hp1", r.norm_hp1},
         {"norm_hp4", r.norm_hp4},
         {"admissible", r.admissible},
         {"proviso_hp1", r.proviso_hp1},
         {"proviso_hp4", r.proviso_hp4},
         {"stabilized", r.stabilized}};
}

void write_field_grid(std::ostream& out, const BeltramiField& field, double x_lo, double x_hi,
                      double y_lo, double y_hi, int nx, int ny)
{
    if (nx < 2 || ny < 2 || !(x_lo < x_hi) || !(y_lo < y_hi) || !(y_hi < 0.0))
        throw ValidationError("grid", "grid needs nx, ny >= 2 and y_lo < y_hi < 0");
    out << "# schema=berslab.beltrami_grid/1\nx,y,abs_nu\n";
    out.precision(17);
    for (int j = 0; j < ny; ++j) {
        const double y = y_lo + (y_hi - y_lo) * j / (ny - 1);
        for (int i = 0; i < nx; ++i) {
            const double x = x_lo + (x_hi - x_lo) * i / (nx - 1);
            out << x << ',' << y << ',';
            try {
                out << std::abs(field.evaluate({x, y}));
            } catch (const NearPoleError&) {
            }
            out << '\n';
        }
    }
}

} // namespace berslab
