#include "cddclock/zeeman.hpp"

#include "cddclock/errors.hpp"

namespace cddclock {

double quadratic_zeeman_offset(double B0, double k) {
  if (B0 < 0.0) throw DomainError("B0 must be non-negative");
  return k * B0 * B0;
}

}  // namespace cddclock
