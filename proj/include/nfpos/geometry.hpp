#ifndef NFPOS_GEOMETRY_HPP
#define NFPOS_GEOMETRY_HPP

#include <cstddef>
#include <vector>

#include "nfpos/common.hpp"

namespace nfpos {

enum class ArrayKind { UCA, ULA };

// Array geometry description. Exactly one of radius_m (UCA) / spacing_m (ULA)
// is meaningful for a given kind.
struct ArrayConfig {
  ArrayKind kind = ArrayKind::UCA;
  int num_elements = 64;
  double radius_m = 1.0;     // UCA arc radius R
  double spacing_m = 0.0;    // ULA inter-element spacing Delta
  double wavelength_m = kSpeedOfLight / 3.5e9;

  static ArrayConfig uca(int n, double radius_m, double freq_hz);
  static ArrayConfig ula(int n, double spacing_m, double freq_hz);

  void validate() const;
};

// Polar position (angle in radians, unwrapped; range in meters).
struct PolarPoint {
  double angle_rad = 0.0;
  double range_m = 0.0;
};

struct ElementLayout {
  std::vector<PolarPoint> elements;
  int size() const { return static_cast<int>(elements.size()); }
};

struct FresnelBounds {
  double lower_m = 0.0;
  double upper_m = 0.0;
  double aperture_m = 0.0;
};

// Coordinates of element n (1-based) of a UCA whose elements occupy the
// 60-degree arc from pi/6 to pi/2: angle = pi/6 + (n-1)pi / (3(N-1)).
PolarPoint uca_element_coordinate(const ArrayConfig& cfg, int n);

// Full layout for either kind. ULA element n sits at distance n*Delta from
// the origin along the array axis (angle 0).
ElementLayout build_layout(const ArrayConfig& cfg);

// Fresnel region bounds: lower = 0.62*sqrt(D^3/lambda), upper = D^2/lambda.
FresnelBounds fresnel_bounds(double aperture_m, double wavelength_m);

// Default aperture used for Fresnel checks when the caller supplies none:
// the chord of the 60-degree UCA arc, 2R*sin(pi/6) = R.
double uca_default_aperture(double radius_m);

// Exact ULA propagation path difference between element n and the origin:
// sqrt(r^2 + (n*Delta)^2 - 2 r (n*Delta) cos(eta)) - r.
double ula_path_difference_exact(double range_m, double angle_rad, int n, double spacing_m);

// Second-order Taylor expansion of the exact path difference in n*Delta/r:
// -n*Delta*cos(eta) + (n*Delta)^2 sin^2(eta) / (2r). Remainder is third
// order, |taylor - exact| <= (n*Delta)^3 / r^2 for n*Delta/r <= 0.05.
double ula_path_difference_taylor(double range_m, double angle_rad, int n, double spacing_m);

// (N*Delta / r)^2. Compare against taylor_validity_bound(N) to decide
// whether the linear-coupling approximation applies.
double near_field_ratio(int num_elements, double spacing_m, double range_m);

// 41.6/N; the ratio bound below which the Taylor step is valid across the
// whole Fresnel region (16/0.3844 rounded to one decimal).
double taylor_validity_bound(int num_elements);

}  // namespace nfpos

#endif
