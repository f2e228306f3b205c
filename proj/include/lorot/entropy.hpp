#pragma once

#include "lorot/ext_real.hpp"
#include "lorot/geodesics.hpp"

namespace lorot {

/// Renyi entropy S_N = -sum density^{1-1/N} * cell mass; the singular part
/// contributes nothing. Throws std::invalid_argument for N < 1.
[[nodiscard]] double renyi_entropy(const DensityField& field, double N);

/// Boltzmann entropy sum rho log rho * cell mass, +inf with a singular part.
[[nodiscard]] ExtReal boltzmann_entropy(const DensityField& field);

/// exp(-Ent / N), 0 when the entropy is +inf. Throws for N <= 0.
[[nodiscard]] double u_n(const DensityField& field, double N);

/// ||(rho - c)^+||_{L^1} + singular mass. Throws for c <= 0.
[[nodiscard]] double excess_functional(const DensityField& field, double c);

}  // namespace lorot
