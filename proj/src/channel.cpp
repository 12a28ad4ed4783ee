#include "nfpos/channel.hpp"

#include <cmath>
#include <string>

#include "nfpos/rng.hpp"

namespace nfpos {

double ue_element_distance(const ElementLayout& layout, const PolarPoint& ue, int n) {
  if (n < 1 || n > layout.size())
    throw DomainError("element index " + std::to_string(n) + " out of range 1.." +
                      std::to_string(layout.size()));
  if (ue.range_m <= 0.0) throw DomainError("UE range must be positive");
  const PolarPoint& el = layout.elements[static_cast<size_t>(n - 1)];
  const double d2 = ue.range_m * ue.range_m + el.range_m * el.range_m -
                    2.0 * ue.range_m * el.range_m * std::cos(ue.angle_rad - el.angle_rad);
  const double d = std::sqrt(std::max(d2, 0.0));
  if (d == 0.0)
    throw DomainError("UE coincides with array element " + std::to_string(n));
  return d;
}

ChannelVector spherical_channel(const ElementLayout& layout, const PolarPoint& ue,
                                double wavelength_m) {
  if (wavelength_m <= 0.0) throw DomainError("wavelength must be positive");
  ChannelVector h;
  h.entries.resize(static_cast<size_t>(layout.size()));
  for (int n = 1; n <= layout.size(); ++n) {
    const double d = ue_element_distance(layout, ue, n);
    const double phase = -2.0 * kPi * d / wavelength_m;
    h.entries[static_cast<size_t>(n - 1)] =
        cplx(std::cos(phase) / d, std::sin(phase) / d);
  }
  return h;
}

double noise_power_for_snr(const ChannelVector& h, double pilot_power, double snr_db) {
  if (h.size() == 0) throw DomainError("empty channel vector");
  double mean_pow = 0.0;
  for (const cplx& e : h.entries) mean_pow += std::norm(e);
  mean_pow /= h.size();
  if (mean_pow <= 0.0) throw DomainError("zero channel has no SNR reference power");
  return pilot_power * mean_pow / std::pow(10.0, snr_db / 10.0);
}

SnapshotSet synthesize_snapshots(const ChannelVector& h, int snapshots, double snr_db,
                                 uint64_t seed) {
  if (snapshots < 1) throw DomainError("snapshot count must be >= 1");
  const int n_el = h.size();
  SnapshotSet set;
  set.snapshots = snapshots;
  set.num_elements = n_el;
  set.pilot.assign(static_cast<size_t>(snapshots), cplx(1.0, 0.0));
  set.noise.snr_db = snr_db;
  set.noise.seed = seed;
  set.noise.sigma2 = noise_power_for_snr(h, 1.0, snr_db);
  set.samples.resize(static_cast<size_t>(snapshots) * n_el);

  const double amp = std::sqrt(set.noise.sigma2 / 2.0);
  SplitMix64 rng(seed);
  for (int k = 0; k < snapshots; ++k) {
    const cplx s = set.pilot[static_cast<size_t>(k)];
    for (int n = 0; n < n_el; ++n) {
      double gre, gim;
      rng.next_gaussian_pair(gre, gim);
      set.at(k, n) = h.entries[static_cast<size_t>(n)] * s + cplx(amp * gre, amp * gim);
    }
  }
  return set;
}

}  // namespace nfpos
