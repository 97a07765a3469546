#pragma once

#include "berslab/norms.hpp"
#include "berslab/pole_expansion.hpp"

#include <iosfwd>

namespace berslab {

/// nu(z) = -scale * y^2 * phi(conj z) on the lower half-plane, y = Im z.
class BeltramiField {
public:
    BeltramiField(PoleExpansion phi, double scale);

    [[nodiscard]] const PoleExpansion& source_phi() const noexcept { return phi_; }
    [[nodiscard]] double scale() const noexcept { return scale_; }

    /// Throws ValidationError("outside_domain") unless Im z < 0; NearPoleError near the
    /// conjugate of a pole.
    [[nodiscard]] Complex evaluate(Complex z) const;

private:
    PoleExpansion phi_;
    double scale_;
};

BeltramiField ahlfors_weill_field(const PoleExpansion& phi, double scale);

/// sup |nu| over the lower half-plane. Equal to |scale| times the half-plane-1 norm of phi.
NormEstimate field_sup_norm(const BeltramiField& field, const SamplingBudget& budget = {});

/// Norm of the field next to the B-norm of its source in both conventions, with the
/// quasiconformality check (field norm < 1) and the proviso "B-norm < 2" evaluated under
/// each convention.
struct AhlforsWeillReport {
    double scale = 0.0;
    double field_norm = 0.0;
    double norm_hp1 = 0.0;
    double norm_hp4 = 0.0;
    bool admissible = false;      // field_norm < 1
    bool proviso_hp1 = false;     // norm_hp1 < 2
    bool proviso_hp4 = false;     // norm_hp4 < 2
    bool stabilized = false;
};

AhlforsWeillReport ahlfors_weill_report(const BeltramiField& field, const SamplingBudget& budget = {});

void to_json(nlohmann::json& j, const AhlforsWeillReport& r);

/// Writes "x,y,abs_nu" rows over a rectangular grid in the lower half-plane, preceded by a
/// "# schema=berslab.beltrami_grid/1" line. Points too close to a pole get an empty value.
void write_field_grid(std::ostream& out, const BeltramiField& field, double x_lo, double x_hi,
                      double y_lo, double y_hi, int nx, int ny);

} // namespace berslab
