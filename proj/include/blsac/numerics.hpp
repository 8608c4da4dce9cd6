#pragma once

#include <cmath>
#include <stdexcept>

namespace blsac {

inline constexpr double kPi = 3.14159265358979323846;

// Normalized sinc: sin(pi x) / (pi x), continuous limit 1 at x = 0.
inline double sinc(double x) {
  if (x == 0.0) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}

// Wrap into the periodic action domain [-1, 1).
inline double wrap_action(double a) {
  double t = std::fmod(a + 1.0, 2.0);
  if (t < 0.0) t += 2.0;
  return t - 1.0;
}

// Density of a N(0, sigma^2) variable wrapped onto the period-2 circle,
// evaluated at displacement t. Images are accumulated until they stop
// contributing at double precision.
inline double wrapped_gaussian_pdf(double t, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("wrapped_gaussian_pdf: sigma must be > 0");
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * kPi));
  const auto image = [&](double z) {
    const double u = z / sigma;
    return norm * std::exp(-0.5 * u * u);
  };
  double sum = image(t);
  for (int n = 1; n <= 4096; ++n) {
    const double add = image(t + 2.0 * n) + image(t - 2.0 * n);
    sum += add;
    if (add <= sum * 1e-18) break;
  }
  return sum;
}

// Bijection between the open action interval (-1, 1) and the real line,
// used to shift actions without leaving the interval.
inline double action_to_unbounded(double a) {
  if (!(a > -1.0 && a < 1.0))
    throw std::domain_error("action_to_unbounded: action must lie strictly inside (-1, 1)");
  return std::log((1.0 + a) / (1.0 - a));
}

inline double unbounded_to_action(double y) { return std::tanh(0.5 * y); }

}  // namespace blsac
