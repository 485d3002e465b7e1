#pragma once

#include <cstdint>

namespace hpl {

/// Parameters of the multi-harmonic Taylor signal model and the sliding
/// estimation window. All frequencies in Hz, window length in nominal
/// fundamental cycles.
struct ModelConfig {
  double f0_hz = 50.0;        ///< nominal fundamental frequency
  double fs_hz = 10000.0;     ///< sampling frequency
  double f_re_hz = 50.0;      ///< reporting rate, frames per second
  int max_harmonic = 13;      ///< highest modeled harmonic order H (>= 2)
  int taylor_order = 2;       ///< Taylor expansion order K (>= 0)
  double window_cycles = 3.0; ///< window length c in nominal cycles

  /// Window sample count: the nearest odd integer to c*fs/f0, ties rounded up.
  /// The window is symmetric around a center sample, N = 2*Nh + 1.
  int sample_count() const;
  int half_window() const { return (sample_count() - 1) / 2; }
  double sample_period_s() const { return 1.0 / fs_hz; }
  double window_length_s() const { return sample_count() / fs_hz; }
  int samples_per_report() const;
  int coefficients_per_harmonic() const { return taylor_order + 1; }
  /// Total unknowns 2*H*(K+1) of the stacked least-squares system.
  int system_parameter_count() const {
    return 2 * max_harmonic * (taylor_order + 1);
  }

  /// Throws ConfigError if any invariant is violated:
  /// c >= K+1, fs >= 2*H*f0 (Nyquist), f_re divides f0 and fs evenly,
  /// positive rates, H >= 2, K >= 0, c >= 1.
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

}  // namespace hpl
