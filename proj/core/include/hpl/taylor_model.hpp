#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "hpl/model_config.hpp"

namespace hpl {

using Complex = std::complex<double>;

/// Taylor basis matrix B, N rows by K+1 columns, row n holding
/// (n*Ts)^k / k! for n in [-Nh, Nh]. 0^0 is taken as 1.
Eigen::MatrixXd taylor_basis(const ModelConfig& cfg);

/// Diagonal of the harmonic modulation matrix: e^{j*2*pi*h*f0*n*Ts} for
/// n in [-Nh, Nh]. Negative h yields the conjugate diagonal. h must be a
/// nonzero order with |h| <= H.
Eigen::VectorXcd modulation_diagonal(const ModelConfig& cfg, int harmonic);

/// Thin SVD of the Taylor basis, B = C * diag(sigma) * D^T, with a fixed
/// sign convention: for each column of D the largest-magnitude entry is
/// positive (ties broken by lowest row index), which also makes d_{1,1} > 0.
struct SvdFactors {
  Eigen::MatrixXd left;    ///< C, N x (K+1), orthonormal columns
  Eigen::VectorXd sigma;   ///< K+1 singular values, descending
  Eigen::MatrixXd right;   ///< D, (K+1) x (K+1), orthogonal
};

/// Throws NumericalError when B is numerically rank deficient
/// (sigma_min < 1e-12 * sigma_max).
SvdFactors svd_taylor_basis(const Eigen::MatrixXd& basis);

/// Gram matrix B^T B assembled from the closed-form entries
/// 2*sum_{n=1..Nh} (n*Ts)^(i+j) / (i! j!), with exact zeros at odd i+j.
Eigen::MatrixXd taylor_gram(const ModelConfig& cfg);

/// Numerical verification of the eigenstructure claims about the right
/// singular matrix: the checkerboard Gram pattern, the pairing of even
/// eigenvalues of B^T B with odd eigenvalues of its leading minor, and the
/// eigenvector-from-eigenvalues identity for the first row of D.
///
/// Spectra are ordered descending, matching the singular value order.
struct VerificationReport {
  ModelConfig cfg;
  Eigen::VectorXd gram_eigenvalues;    ///< K+1 eigenvalues of B^T B, descending
  Eigen::VectorXd minor_eigenvalues;   ///< K eigenvalues of the minor W11, descending
  Eigen::VectorXd d_first_row;         ///< first row of D from the SVD
  Eigen::VectorXd d_sq_from_svd;       ///< squared first-row entries
  Eigen::VectorXd d_sq_from_eigen;     ///< same via the eigenvalue identity
  std::vector<double> interlace_rel_err;

  bool evens_vanish = false;      ///< |d_{1,2a}| <= 1e-9
  bool odds_exceed = false;       ///< |d_{1,2a+1}| > 1e-6
  bool interlacing_ok = false;    ///< pairing holds to relative 1e-8
  bool identity_ok = false;       ///< |d|^2 routes agree to 1e-6 absolute
  bool passed() const {
    return evens_vanish && odds_exceed && interlacing_ok && identity_ok;
  }
};

VerificationReport verify_appendix_structure(const ModelConfig& cfg);

}  // namespace hpl
