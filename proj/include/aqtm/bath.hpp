// bath.hpp: thermal-bath spectral densities. A model shape defines G(omega)
// for omega >= 0; negative frequencies always come from the detailed-balance
// extension G(-omega) = exp(-omega/T) G(omega), so every bath is thermal by
// construction.
#pragma once

#include <variant>

#include "aqtm/operator_core.hpp"

namespace aqtm {

enum class BathSide { Cold, Hot };

// Constant height on [center - width/2, center + width/2], zero elsewhere.
struct FlatBandModel {
    double center = 1.0;
    double width = 0.5;
    double height = 0.1;
};

// Peak `height` at `center`, full width at half maximum `width`.
struct LorentzianModel {
    double center = 1.0;
    double width = 0.5;
    double height = 0.1;
};

struct BathSpec {
    double temperature = 1.0;
    std::variant<FlatBandModel, LorentzianModel> model = FlatBandModel{};
    BathSide side = BathSide::Cold;
    double lamb_shift = 0.0;  // constant imaginary part of the one-sided rate
};

void validate_bath(const BathSpec& bath);

// G(omega), detailed-balance-extended to negative frequencies.
double spectral_density(const BathSpec& bath, double omega);

// dG/domega, using the differentiated detailed-balance relation
// G'(-omega) = exp(-omega/T) [G(omega)/T - G'(omega)] below zero.
double spectral_density_derivative(const BathSpec& bath, double omega);

// One-sided coupling rate Gamma(omega) = G(omega)/2 + i lamb_shift.
Complex one_sided_rate(const BathSpec& bath, double omega);
Complex one_sided_rate_derivative(const BathSpec& bath, double omega);

}  // namespace aqtm
