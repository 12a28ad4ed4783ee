#include "nfpos/featurize.hpp"

#include <algorithm>
#include <cmath>

namespace nfpos {

namespace {
constexpr double kScaleFloor = 1e-300;  // keeps an all-zero matrix finite
}

void LabelCodec::validate() const {
  if (!(r_min < r_max)) throw ConfigError("label codec requires r_min < r_max");
  if (!(eta_min < eta_max)) throw ConfigError("label codec requires eta_min < eta_max");
}

std::array<double, 2> LabelCodec::encode(const PolarPoint& p) const {
  validate();
  const double tol = 1e-12;
  if (p.range_m < r_min - tol || p.range_m > r_max + tol)
    throw DomainError("label range " + std::to_string(p.range_m) + " outside codec bounds");
  if (p.angle_rad < eta_min - tol || p.angle_rad > eta_max + tol)
    throw DomainError("label angle " + std::to_string(p.angle_rad) + " outside codec bounds");
  return {(p.range_m - r_min) / (r_max - r_min),
          (p.angle_rad - eta_min) / (eta_max - eta_min)};
}

PolarPoint LabelCodec::decode(double u_r, double u_eta) const {
  validate();
  PolarPoint p;
  p.range_m = r_min + u_r * (r_max - r_min);
  p.angle_rad = eta_min + u_eta * (eta_max - eta_min);
  return p;
}

CovMatrix sample_covariance(const SnapshotSet& set) {
  if (set.snapshots < 1 || set.samples.empty())
    throw DomainError("sample_covariance: empty snapshot set");
  const int n = set.num_elements;
  CovMatrix rc;
  rc.n = n;
  rc.m.assign(static_cast<size_t>(n) * n, cplx(0.0, 0.0));

  for (int k = 0; k < set.snapshots; ++k) {
    const cplx* row = &set.samples[static_cast<size_t>(k) * n];
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        rc.at(i, j) += row[i] * std::conj(row[j]);
      }
    }
  }
  const double inv_k = 1.0 / set.snapshots;
  for (int i = 0; i < n; ++i) {
    rc.at(i, i) = cplx(rc.at(i, i).real() * inv_k, 0.0);
    for (int j = i + 1; j < n; ++j) {
      rc.at(i, j) *= inv_k;
      rc.at(j, i) = std::conj(rc.at(i, j));
    }
  }
  return rc;
}

CovarianceFeature covariance_to_feature(const CovMatrix& rc) {
  const int n = rc.n;
  if (n < 1) throw DomainError("covariance_to_feature: empty matrix");

  double asym = 0.0;
  double max_abs = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const cplx a = rc.at(i, j);
      const cplx b = std::conj(rc.at(j, i));
      asym = std::max(asym, std::abs(a - b));
      max_abs = std::max({max_abs, std::abs(a.real()), std::abs(a.imag())});
    }
  }
  if (asym > 1e-9)
    throw DataError("covariance matrix is not Hermitian (max asymmetry " +
                    std::to_string(asym) + ")");

  CovarianceFeature f;
  f.scale = std::max(max_abs, kScaleFloor);
  f.planes = Tensor<double>({2, n, n});
  const double inv = 1.0 / f.scale;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      f.planes[static_cast<int64_t>(i) * n + j] = rc.at(i, j).real() * inv;
      f.planes[static_cast<int64_t>(n) * n + i * n + j] =
          (i == j) ? 0.0 : rc.at(i, j).imag() * inv;
    }
  }
  return f;
}

CsiFeature csi_to_feature(const SnapshotSet& set) {
  if (set.snapshots < 1 || set.samples.empty())
    throw DomainError("csi_to_feature: empty snapshot set");
  const int k_rows = set.snapshots;
  const int n = set.num_elements;

  double max_abs = 0.0;
  for (const cplx& v : set.samples)
    max_abs = std::max({max_abs, std::abs(v.real()), std::abs(v.imag())});
  if (max_abs == 0.0)
    throw DomainError("csi_to_feature: all-zero snapshot matrix cannot be normalized");

  CsiFeature f;
  f.scale = max_abs;
  f.planes = Tensor<double>({2, k_rows, n});
  const double inv = 1.0 / max_abs;
  for (int k = 0; k < k_rows; ++k) {
    for (int j = 0; j < n; ++j) {
      const cplx v = set.at(k, j);
      f.planes[static_cast<int64_t>(k) * n + j] = v.real() * inv;
      f.planes[static_cast<int64_t>(k_rows) * n + k * n + j] = v.imag() * inv;
    }
  }
  return f;
}

}  // namespace nfpos
