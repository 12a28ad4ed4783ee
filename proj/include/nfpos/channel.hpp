#ifndef NFPOS_CHANNEL_HPP
#define NFPOS_CHANNEL_HPP

#include <complex>
#include <cstdint>
#include <vector>

#include "nfpos/geometry.hpp"

namespace nfpos {

using cplx = std::complex<double>;

// Spherical-wave uplink channel: entry n has magnitude 1/d_n and phase
// -2*pi*d_n/lambda, d_n the UE-to-element distance.
struct ChannelVector {
  std::vector<cplx> entries;
  int size() const { return static_cast<int>(entries.size()); }
};

struct NoiseSpec {
  double snr_db = 0.0;
  double sigma2 = 0.0;  // per-complex-entry variance, derived from snr_db
  uint64_t seed = 0;
};

// K noisy received snapshots y_k = h * s_k + n_k, one per row.
struct SnapshotSet {
  int snapshots = 0;                // K
  int num_elements = 0;             // N
  std::vector<cplx> samples;        // row-major K x N
  std::vector<cplx> pilot;          // s_k, length K (unit pilot by default)
  NoiseSpec noise;
  PolarPoint truth;

  cplx& at(int k, int n) { return samples[static_cast<size_t>(k) * num_elements + n]; }
  const cplx& at(int k, int n) const {
    return samples[static_cast<size_t>(k) * num_elements + n];
  }
};

// Distance between the UE and element n (1-based):
// sqrt(r_s^2 + r_n^2 - 2 r_s r_n cos(eta_s - theta_n)).
double ue_element_distance(const ElementLayout& layout, const PolarPoint& ue, int n);

ChannelVector spherical_channel(const ElementLayout& layout, const PolarPoint& ue,
                                double wavelength_m);

// Noise variance achieving the requested SNR against the array-averaged
// received signal power: sigma2 = pilot_power * mean_n |h_n|^2 / 10^(snr/10).
double noise_power_for_snr(const ChannelVector& h, double pilot_power, double snr_db);

// Unit pilot (s_k = 1); noise i.i.d. circularly-symmetric complex Gaussian,
// variance sigma2 split evenly between real and imaginary parts.
// Deterministic in (h, K, snr_db, seed).
SnapshotSet synthesize_snapshots(const ChannelVector& h, int snapshots, double snr_db,
                                 uint64_t seed);

}  // namespace nfpos

#endif
