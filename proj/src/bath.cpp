#include "aqtm/bath.hpp"

#include <cmath>

#include "aqtm/errors.hpp"

namespace aqtm {

namespace {

double shape(const BathSpec& bath, double omega) {
    return std::visit(
        [omega](const auto& m) -> double {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, FlatBandModel>) {
                return std::abs(omega - m.center) <= m.width / 2.0 ? m.height : 0.0;
            } else {
                const double hw = m.width / 2.0;
                const double d = omega - m.center;
                return m.height * hw * hw / (d * d + hw * hw);
            }
        },
        bath.model);
}

double shape_derivative(const BathSpec& bath, double omega) {
    return std::visit(
        [omega](const auto& m) -> double {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, FlatBandModel>) {
                return 0.0;  // flat almost everywhere; band edges are never sampled
            } else {
                const double hw = m.width / 2.0;
                const double d = omega - m.center;
                const double denom = d * d + hw * hw;
                return -2.0 * m.height * hw * hw * d / (denom * denom);
            }
        },
        bath.model);
}

}  // namespace

void validate_bath(const BathSpec& bath) {
    if (!std::isfinite(bath.temperature) || bath.temperature <= 0.0) {
        throw BathModelError("bath temperature must be positive");
    }
    std::visit(
        [](const auto& m) {
            if (!std::isfinite(m.center) || m.center <= 0.0) {
                throw BathModelError("bath band center must be positive");
            }
            if (!std::isfinite(m.width) || m.width <= 0.0) {
                throw BathModelError("bath band width must be positive");
            }
            if (!std::isfinite(m.height) || m.height <= 0.0) {
                throw BathModelError("bath band height must be positive");
            }
        },
        bath.model);
}

double spectral_density(const BathSpec& bath, double omega) {
    if (omega >= 0.0) return shape(bath, omega);
    return std::exp(omega / bath.temperature) * shape(bath, -omega);
}

double spectral_density_derivative(const BathSpec& bath, double omega) {
    if (omega >= 0.0) return shape_derivative(bath, omega);
    const double w = -omega;
    return std::exp(-w / bath.temperature) *
           (shape(bath, w) / bath.temperature - shape_derivative(bath, w));
}

Complex one_sided_rate(const BathSpec& bath, double omega) {
    return {spectral_density(bath, omega) / 2.0, bath.lamb_shift};
}

Complex one_sided_rate_derivative(const BathSpec& bath, double omega) {
    return {spectral_density_derivative(bath, omega) / 2.0, 0.0};
}

}  // namespace aqtm
