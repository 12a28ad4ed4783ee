#ifndef NFPOS_FEATURIZE_HPP
#define NFPOS_FEATURIZE_HPP

#include <array>

#include "nfpos/channel.hpp"
#include "nfpos/tensor.hpp"

namespace nfpos {

// Hermitian sample covariance, row-major N x N.
struct CovMatrix {
  int n = 0;
  std::vector<cplx> m;
  cplx& at(int i, int j) { return m[static_cast<size_t>(i) * n + j]; }
  const cplx& at(int i, int j) const { return m[static_cast<size_t>(i) * n + j]; }
};

// Real/imaginary planes of a normalized covariance matrix, shape [2, N, N].
// Plane 0 is symmetric, plane 1 antisymmetric with an exactly zero diagonal.
struct CovarianceFeature {
  Tensor<double> planes;
  double scale = 1.0;
};

// Real/imaginary planes of the normalized K x N snapshot matrix, [2, K, N].
struct CsiFeature {
  Tensor<double> planes;
  double scale = 1.0;
};

// Affine map between physical labels (range meters, angle radians) and the
// [0,1]^2 training targets, component order (r, eta).
struct LabelCodec {
  double r_min = 2.0, r_max = 10.0;
  double eta_min = 0.0, eta_max = 0.0;

  void validate() const;
  std::array<double, 2> encode(const PolarPoint& p) const;
  PolarPoint decode(double u_r, double u_eta) const;
};

// (1/K) sum_k y_k y_k^H. The upper triangle is accumulated and mirrored so
// Hermitian symmetry is exact in floating point.
CovMatrix sample_covariance(const SnapshotSet& set);

// Split into real/imaginary planes scaled by max(|Re|, |Im|, eps).
// Rejects inputs whose Hermitian asymmetry exceeds 1e-9.
CovarianceFeature covariance_to_feature(const CovMatrix& rc);

CsiFeature csi_to_feature(const SnapshotSet& set);

}  // namespace nfpos

#endif
