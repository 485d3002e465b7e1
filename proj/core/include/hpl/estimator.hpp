#pragma once

#include <Eigen/Dense>
#include <deque>
#include <span>
#include <vector>

#include "hpl/filter_design.hpp"

namespace hpl {

/// N contiguous samples with the time of the center sample as tag.
struct SampleWindow {
  Eigen::VectorXd samples;
  double t_tag_s = 0.0;
};

struct PhasorEstimate {
  int harmonic = 0;
  double t_tag_s = 0.0;
  Complex phasor;          ///< p.u.
  double amplitude = 0.0;  ///< |phasor|
  double phase_rad = 0.0;  ///< arg(phasor), wrapped to (-pi, pi]
};

/// One phasor per bank harmonic: 2 e^{-j 2 pi h f0 t_tag} (r_h . S), the
/// demodulation always at the nominal fundamental.
std::vector<PhasorEstimate> estimate_window(const SampleWindow& window,
                                            const FilterBank& bank);

/// Sliding-window streaming front end. Feed samples in arbitrary chunks;
/// a report is emitted every fs/f_re samples once a full window is available,
/// tagged at the window center. Holds only the last N samples.
class StreamingEstimator {
public:
  StreamingEstimator(const FilterBank& bank, double report_rate_hz,
                     double t_start_s);

  /// Consumes samples, returns reports completed by this chunk.
  std::vector<std::vector<PhasorEstimate>> push(std::span<const double> samples);

private:
  const FilterBank& bank_;
  std::deque<double> buffer_;
  long long absorbed_ = 0;      ///< total samples consumed
  long long next_tag_index_;    ///< absolute sample index of the next report tag
  long long stride_;
  double t_start_s_;
};

/// Batch variant: all reports whose windows fit inside the sample span.
std::vector<std::vector<PhasorEstimate>> stream_estimate(
    std::span<const double> samples, double t_start_s, const FilterBank& bank,
    double report_rate_hz);

}  // namespace hpl
