#include "lorot/entropy.hpp"

#include <cmath>
#include <stdexcept>

namespace lorot {

double renyi_entropy(const DensityField& field, double N) {
  if (!(N >= 1.0)) throw std::invalid_argument("renyi_entropy: N must be >= 1");
  const double e = 1.0 - 1.0 / N;
  double s = 0.0;
  for (std::size_t k = 0; k < field.cells.size(); ++k) {
    const double rho = field.density[k];
    if (rho <= 0.0) continue;
    s += (e == 0.0 ? 1.0 : std::pow(rho, e)) * field.cell_mass[k];
  }
  return -s;
}

ExtReal boltzmann_entropy(const DensityField& field) {
  if (field.singular_mass > 0.0) return ExtReal::pos_infinity();
  double s = 0.0;
  for (std::size_t k = 0; k < field.cells.size(); ++k) {
    const double rho = field.density[k];
    if (rho > 0.0) s += rho * std::log(rho) * field.cell_mass[k];
  }
  return s;
}

double u_n(const DensityField& field, double N) {
  if (!(N > 0.0)) throw std::invalid_argument("u_n: N must be > 0");
  const ExtReal ent = boltzmann_entropy(field);
  if (ent.is_pos_inf()) return 0.0;
  return std::exp(-ent.value() / N);
}

double excess_functional(const DensityField& field, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("excess_functional: c must be > 0");
  double f = field.singular_mass;
  for (std::size_t k = 0; k < field.cells.size(); ++k) {
    if (field.density[k] > c) f += (field.density[k] - c) * field.cell_mass[k];
  }
  return f;
}

}  // namespace lorot
