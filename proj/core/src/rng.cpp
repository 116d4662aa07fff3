#include "spdgeom/rng.hpp"

#include <cmath>

namespace spdgeom {

double Rng::normal() {
  if (spare_valid_) {
    spare_valid_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * factor;
  spare_valid_ = true;
  return u * factor;
}

}  // namespace spdgeom
