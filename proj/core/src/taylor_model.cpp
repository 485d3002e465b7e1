#include "hpl/taylor_model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "hpl/errors.hpp"

namespace hpl {

namespace {
double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}
}  // namespace

Eigen::MatrixXd taylor_basis(const ModelConfig& cfg) {
  cfg.validate();
  const int n_samples = cfg.sample_count();
  const int half = cfg.half_window();
  const int cols = cfg.coefficients_per_harmonic();
  const double ts = cfg.sample_period_s();
  Eigen::MatrixXd basis(n_samples, cols);
  for (int r = 0; r < n_samples; ++r) {
    const double t = (r - half) * ts;
    double term = 1.0;  // t^k / k!, built incrementally
    basis(r, 0) = 1.0;
    for (int k = 1; k < cols; ++k) {
      term *= t / k;
      basis(r, k) = term;
    }
  }
  return basis;
}

Eigen::VectorXcd modulation_diagonal(const ModelConfig& cfg, int harmonic) {
  if (harmonic == 0 || std::abs(harmonic) > cfg.max_harmonic) {
    std::ostringstream why;
    why << "harmonic order " << harmonic << " outside [1, " << cfg.max_harmonic
        << "] (or its negation)";
    throw ConfigError(why.str());
  }
  const int n_samples = cfg.sample_count();
  const int half = cfg.half_window();
  const double w = 2.0 * std::numbers::pi * harmonic * cfg.f0_hz * cfg.sample_period_s();
  Eigen::VectorXcd diag(n_samples);
  for (int r = 0; r < n_samples; ++r) diag(r) = std::polar(1.0, w * (r - half));
  return diag;
}

SvdFactors svd_taylor_basis(const Eigen::MatrixXd& basis) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(basis,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdFactors f;
  f.left = svd.matrixU();
  f.sigma = svd.singularValues();
  f.right = svd.matrixV();

  const int cols = static_cast<int>(f.sigma.size());
  if (f.sigma(cols - 1) < 1e-12 * f.sigma(0)) {
    std::ostringstream why;
    why << "Taylor basis numerically rank deficient: sigma_min/sigma_max = "
        << f.sigma(cols - 1) / f.sigma(0);
    throw NumericalError(why.str());
  }

  for (int j = 0; j < cols; ++j) {
    int lead = 0;
    for (int i = 1; i < f.right.rows(); ++i) {
      if (std::abs(f.right(i, j)) > std::abs(f.right(lead, j))) lead = i;
    }
    if (f.right(lead, j) < 0.0) {
      f.right.col(j) *= -1.0;
      f.left.col(j) *= -1.0;
    }
  }
  if (f.right(0, 0) <= 0.0) {
    throw NumericalError("sign convention failed to make d_{1,1} positive");
  }
  return f;
}

Eigen::MatrixXd taylor_gram(const ModelConfig& cfg) {
  cfg.validate();
  const int half = cfg.half_window();
  const int cols = cfg.coefficients_per_harmonic();
  const double ts = cfg.sample_period_s();
  // Power sums 2*sum_{n=1..Nh} (n*Ts)^p for p = 0..2K.
  std::vector<double> sums(2 * cols - 1, 0.0);
  for (int n = half; n >= 1; --n) {
    const double t = n * ts;
    double p = 1.0;
    for (int e = 0; e < static_cast<int>(sums.size()); ++e) {
      sums[e] += 2.0 * p;
      p *= t;
    }
  }
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(cols, cols);
  for (int i = 0; i < cols; ++i) {
    for (int j = i; j < cols; ++j) {
      if ((i + j) % 2 != 0) continue;
      double v = sums[i + j] / (factorial(i) * factorial(j));
      if (i == 0 && j == 0) v = static_cast<double>(cfg.sample_count());
      gram(i, j) = v;
      gram(j, i) = v;
    }
  }
  return gram;
}

VerificationReport verify_appendix_structure(const ModelConfig& cfg) {
  cfg.validate();
  VerificationReport rep;
  rep.cfg = cfg;

  const Eigen::MatrixXd basis = taylor_basis(cfg);
  const SvdFactors f = svd_taylor_basis(basis);
  const int cols = static_cast<int>(f.sigma.size());

  // Spectra of B^T B and of the minor W11 (the Gram matrix of columns 2..K+1),
  // both as squared singular values so the small end keeps relative accuracy.
  rep.gram_eigenvalues = f.sigma.array().square();
  if (cols > 1) {
    Eigen::JacobiSVD<Eigen::MatrixXd> minor_svd(basis.rightCols(cols - 1));
    rep.minor_eigenvalues = minor_svd.singularValues().array().square();
  } else {
    rep.minor_eigenvalues.resize(0);
  }

  rep.d_first_row = f.right.row(0).transpose();
  rep.d_sq_from_svd = rep.d_first_row.array().square();

  // Eigenvector-from-eigenvalues route for |d_{1,i}|^2: products over the
  // minor spectrum in the numerator and over the remaining full spectrum in
  // the denominator, indexed by the descending order shared with D's columns.
  rep.d_sq_from_eigen.resize(cols);
  for (int i = 0; i < cols; ++i) {
    double num = 1.0;
    for (int j = 0; j < cols - 1; ++j) {
      num *= rep.gram_eigenvalues(i) - rep.minor_eigenvalues(j);
    }
    double den = 1.0;
    for (int j = 0; j < cols; ++j) {
      if (j != i) den *= rep.gram_eigenvalues(i) - rep.gram_eigenvalues(j);
    }
    rep.d_sq_from_eigen(i) = num / den;
  }

  // delta_{2a}(B^T B) = delta_{2a-1}(W11) under the shared descending order.
  rep.interlacing_ok = true;
  for (int a = 1; 2 * a <= cols; ++a) {
    const double full = rep.gram_eigenvalues(2 * a - 1);
    const double minor = rep.minor_eigenvalues(2 * a - 2);
    const double rel = std::abs(full - minor) / std::abs(full);
    rep.interlace_rel_err.push_back(rel);
    if (rel > 1e-8) rep.interlacing_ok = false;
  }

  rep.evens_vanish = true;
  rep.odds_exceed = true;
  for (int i = 0; i < cols; ++i) {
    const double mag = std::abs(rep.d_first_row(i));
    if (i % 2 == 1 && mag > 1e-9) rep.evens_vanish = false;   // 1-based even index
    if (i % 2 == 0 && mag <= 1e-6) rep.odds_exceed = false;   // 1-based odd index
  }

  rep.identity_ok =
      ((rep.d_sq_from_svd - rep.d_sq_from_eigen).cwiseAbs().maxCoeff() <= 1e-6);
  return rep;
}

}  // namespace hpl
