#include "nfpos/geometry.hpp"

#include <cmath>
#include <string>

namespace nfpos {

ArrayConfig ArrayConfig::uca(int n, double radius_m, double freq_hz) {
  ArrayConfig cfg;
  cfg.kind = ArrayKind::UCA;
  cfg.num_elements = n;
  cfg.radius_m = radius_m;
  cfg.spacing_m = 0.0;
  cfg.wavelength_m = wavelength_from_frequency(freq_hz);
  cfg.validate();
  return cfg;
}

ArrayConfig ArrayConfig::ula(int n, double spacing_m, double freq_hz) {
  ArrayConfig cfg;
  cfg.kind = ArrayKind::ULA;
  cfg.num_elements = n;
  cfg.radius_m = 0.0;
  cfg.spacing_m = spacing_m;
  cfg.wavelength_m = wavelength_from_frequency(freq_hz);
  cfg.validate();
  return cfg;
}

void ArrayConfig::validate() const {
  if (num_elements < 2)
    throw ConfigError("array needs at least 2 elements, got " + std::to_string(num_elements));
  if (wavelength_m <= 0.0) throw ConfigError("wavelength must be positive");
  if (kind == ArrayKind::UCA) {
    if (radius_m <= 0.0) throw ConfigError("UCA radius must be positive");
    if (spacing_m != 0.0) throw ConfigError("UCA config must not set a ULA spacing");
  } else {
    if (spacing_m <= 0.0) throw ConfigError("ULA spacing must be positive");
    if (radius_m != 0.0) throw ConfigError("ULA config must not set a UCA radius");
  }
}

PolarPoint uca_element_coordinate(const ArrayConfig& cfg, int n) {
  if (cfg.kind != ArrayKind::UCA)
    throw ConfigError("uca_element_coordinate requires a UCA config");
  cfg.validate();
  if (n < 1 || n > cfg.num_elements)
    throw DomainError("element index " + std::to_string(n) + " out of range 1.." +
                      std::to_string(cfg.num_elements));
  PolarPoint p;
  p.angle_rad = kPi / 6.0 + (n - 1) * kPi / (3.0 * (cfg.num_elements - 1));
  p.range_m = cfg.radius_m;
  return p;
}

ElementLayout build_layout(const ArrayConfig& cfg) {
  cfg.validate();
  ElementLayout layout;
  layout.elements.reserve(cfg.num_elements);
  if (cfg.kind == ArrayKind::UCA) {
    for (int n = 1; n <= cfg.num_elements; ++n)
      layout.elements.push_back(uca_element_coordinate(cfg, n));
  } else {
    for (int n = 1; n <= cfg.num_elements; ++n)
      layout.elements.push_back({0.0, n * cfg.spacing_m});
  }
  return layout;
}

FresnelBounds fresnel_bounds(double aperture_m, double wavelength_m) {
  if (aperture_m <= 0.0) throw DomainError("aperture must be positive");
  if (wavelength_m <= 0.0) throw DomainError("wavelength must be positive");
  FresnelBounds b;
  b.aperture_m = aperture_m;
  b.lower_m = 0.62 * std::sqrt(aperture_m * aperture_m * aperture_m / wavelength_m);
  b.upper_m = aperture_m * aperture_m / wavelength_m;
  return b;
}

double uca_default_aperture(double radius_m) {
  if (radius_m <= 0.0) throw DomainError("radius must be positive");
  return 2.0 * radius_m * std::sin(kPi / 6.0);
}

double ula_path_difference_exact(double range_m, double angle_rad, int n, double spacing_m) {
  const double x = n * spacing_m;
  const double d2 = range_m * range_m + x * x - 2.0 * range_m * x * std::cos(angle_rad);
  return std::sqrt(std::max(d2, 0.0)) - range_m;
}

double ula_path_difference_taylor(double range_m, double angle_rad, int n, double spacing_m) {
  const double x = n * spacing_m;
  const double s = std::sin(angle_rad);
  return -x * std::cos(angle_rad) + x * x * s * s / (2.0 * range_m);
}

double near_field_ratio(int num_elements, double spacing_m, double range_m) {
  const double u = num_elements * spacing_m / range_m;
  return u * u;
}

double taylor_validity_bound(int num_elements) {
  return 41.6 / num_elements;
}

}  // namespace nfpos
