#include "rotsdr/rng.hpp"

#include <cmath>

namespace rotsdr {

double CounterRng::next_gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = next_uniform_open();
  const double u2 = next_uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

Eigen::Vector3d CounterRng::gaussian3() {
  return Eigen::Vector3d(next_gaussian(), next_gaussian(), next_gaussian());
}

Eigen::Vector4d CounterRng::gaussian4() {
  return Eigen::Vector4d(next_gaussian(), next_gaussian(), next_gaussian(),
                         next_gaussian());
}

Eigen::Vector3d CounterRng::uniform_sphere3() {
  // Normalized Gaussian; redraw on the (measure-zero) near-degenerate case.
  for (;;) {
    const Eigen::Vector3d g = gaussian3();
    const double n = g.norm();
    if (n > 1e-12) return g / n;
  }
}

}  // namespace rotsdr
