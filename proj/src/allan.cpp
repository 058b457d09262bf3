#include "cddclock/allan.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "cddclock/errors.hpp"

namespace cddclock {

AllanResult overlapping_allan(const std::vector<double>& y, double tau0, const std::vector<int>& factors) {
  if (!(tau0 > 0.0)) throw DomainError("tau0 must be positive");
  const std::size_t M = y.size();
  // Phase data in units of tau0, after removing the mean frequency (the
  // estimator ignores it and a constant record then yields exact zeros).
  const double mean = M > 0 ? std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(M) : 0.0;
  std::vector<double> x(M + 1, 0.0);
  for (std::size_t i = 0; i < M; ++i) x[i + 1] = x[i] + (y[i] - mean);
  AllanResult out;
  for (int m : factors) {
    if (m < 1) throw DomainError("averaging factor must be positive");
    const std::size_t mm = static_cast<std::size_t>(m);
    if (M < 3 * mm) {
      std::ostringstream os;
      os << "tau = " << m * tau0 << " s skipped: " << M << " samples, need " << 3 * mm;
      out.notes.push_back(os.str());
      continue;
    }
    const std::size_t terms = M + 1 - 2 * mm;
    double sum = 0.0;
    for (std::size_t i = 0; i < terms; ++i) {
      const double d = x[i + 2 * mm] - 2.0 * x[i + mm] + x[i];
      sum += d * d;
    }
    AllanPoint p;
    p.m = m;
    p.tau = m * tau0;
    p.adev = std::sqrt(sum / (2.0 * static_cast<double>(mm * mm) * static_cast<double>(terms)));
    p.error = p.adev / std::sqrt(static_cast<double>(M) / static_cast<double>(mm));
    out.points.push_back(p);
  }
  return out;
}

std::vector<int> octave_factors(std::size_t n) {
  std::vector<int> out;
  for (std::size_t m = 1; 3 * m <= n; m *= 2) out.push_back(static_cast<int>(m));
  return out;
}

std::vector<double> fractional(const std::vector<double>& hz, double nu0) {
  if (nu0 == 0.0) throw DomainError("reference frequency must be nonzero");
  std::vector<double> out;
  out.reserve(hz.size());
  for (double v : hz) out.push_back(v / nu0);
  return out;
}

PowerLaw fit_power_law(const AllanResult& r) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const AllanPoint& p : r.points) {
    if (!(p.adev > 0.0)) continue;
    const double lx = std::log(p.tau), ly = std::log(p.adev);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) throw NumericError("power-law fit needs two nonzero deviations");
  PowerLaw f;
  f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  f.amplitude = std::exp((sy - f.slope * sx) / n);
  return f;
}

}  // namespace cddclock
