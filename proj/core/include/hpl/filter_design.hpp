#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <vector>

#include "hpl/model_config.hpp"
#include "hpl/taylor_model.hpp"

namespace hpl {

/// Positive weights y_{h,k_e} dividing the SVD weight pairs d_{1,k_e}/sigma_{k_e}
/// in the filter superposition. Indexed per harmonic; entry k_e (1-based) lives
/// at vector index k_e-1. Even 1-based entries are fixed to one.
struct MultiplierSet {
  std::map<int, Eigen::VectorXd> values;

  Eigen::VectorXd for_harmonic(int harmonic, int coeff_count) const;
  void validate(int coeff_count) const;
};

/// Out-of-band interference range for the h-order filter:
/// [(h-1)*f0, h*f0 - f_re/2] and [h*f0 + f_re/2, (h+1)*f0].
struct TransitionBand {
  int harmonic = 0;
  double lo1_hz = 0, hi1_hz = 0, lo2_hz = 0, hi2_hz = 0;

  static TransitionBand for_harmonic(const ModelConfig& cfg, int harmonic);
};

struct DesignRow {
  int harmonic = 0;
  double tft_max_gain = 0;
  double optimized_max_gain = 0;
  double reduction = 0;  ///< 1 - optimized/tft
  Eigen::VectorXd multipliers;
  bool improved = true;            ///< false when returning all-ones with a warning
  bool guard_active = false;       ///< passband guard rejected candidates
  bool no_free_multipliers = false;
};

struct DesignReport {
  double grid_step_hz = 0.1;
  std::vector<DesignRow> rows;
};

/// A designed bank of zero-order phasor extraction filters, one complex
/// length-N coefficient vector per harmonic order (h=1 is the unoptimized
/// least-squares fundamental filter).
struct FilterBank {
  int format_version = 1;
  ModelConfig cfg;
  std::map<int, Eigen::VectorXcd> filters;
  MultiplierSet multipliers;
  DesignReport report;
};

struct DesignOptions {
  double grid_step_hz = 0.1;        ///< transition band evaluation grid
  double multiplier_min = 0.2;      ///< coarse search range, log-spaced
  double multiplier_max = 20.0;
  double coarse_log_factor = 1.05;  ///< multiplicative coarse grid step
  double refine_initial_step = 0.1; ///< additive pattern-search step
  double refine_resolution = 0.005; ///< pattern search stops below this
  double tie_tolerance = 1e-6;      ///< objective ties broken toward all-ones
  double passband_guard_lo = 0.9;   ///< candidates must keep center gain inside
  double passband_guard_hi = 1.1;
  int polish_starts = 24;           ///< coarse candidates kept for local polish
  int threads = 0;                  ///< 0: HPL_THREADS env or hardware count
};

/// Shared machinery for one model configuration: the Taylor-basis SVD and the
/// per-harmonic row blocks l_h of the modulated-basis pseudo-inverse
/// (Q applied to the modulated left-singular blocks).
class DesignContext {
public:
  explicit DesignContext(const ModelConfig& cfg);
  ~DesignContext();
  DesignContext(DesignContext&&) noexcept;
  DesignContext& operator=(DesignContext&&) noexcept;

  const ModelConfig& config() const;
  const SvdFactors& svd() const;
  /// Superposition weights d_{1,k}/sigma_k, k = 1..K+1.
  const Eigen::VectorXd& weights() const;
  /// (K+1) x N complex row block for harmonic h in [1, H].
  const Eigen::MatrixXcd& l_matrix(int harmonic) const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Least-squares filter bank: row (h-1)(K+1)+1 of the pseudo-inverse of the
/// full modulated Taylor system, computed through a column-equilibrated SVD.
/// Throws NumericalError when the equilibrated normal matrix has condition
/// number above 1e12.
FilterBank tft_filter_bank(const ModelConfig& cfg);

/// l_h per harmonic (copy of the context block).
Eigen::MatrixXcd compute_l_matrix(const DesignContext& ctx, int harmonic);

/// Weighted row superposition sum_k d_{1,k}/(y_k sigma_k) * l_h[k,:].
/// All-ones multipliers reproduce the least-squares filter.
Eigen::VectorXcd compose_filter(const DesignContext& ctx, int harmonic,
                                const Eigen::VectorXd& multipliers);

/// Discrete-time response sum_n filter[n] e^{j 2 pi f n Ts} of a center-tagged
/// filter; unit gain at the harmonic passband center for the least-squares bank.
Complex frequency_response(const Eigen::VectorXcd& filter, double sample_period_s,
                           double freq_hz);
double gain_at(const Eigen::VectorXcd& filter, double sample_period_s, double freq_hz);

/// Maximum gain over both transition intervals sampled at grid_step_hz,
/// endpoints included.
double max_transition_gain(const Eigen::VectorXcd& filter, double sample_period_s,
                           const TransitionBand& band, double grid_step_hz);

/// Minimax transition-band optimization over the free odd multipliers
/// (y_{h,3}, y_{h,5}, ...; y_{h,1} and even entries fixed at one). Deterministic:
/// coarse log grid, multistart coordinate refinement, alternating line-search
/// polish, ties broken toward all-ones.
DesignRow optimize_multipliers(const DesignContext& ctx, int harmonic,
                               const DesignOptions& opts = {});

/// Full bank design: least-squares bank, SVD decomposition, per-harmonic
/// multiplier optimization for h in [2, H]. Per-harmonic searches run in
/// parallel (capped by HPL_THREADS).
FilterBank design_bank(const ModelConfig& cfg, const DesignOptions& opts = {});

}  // namespace hpl
