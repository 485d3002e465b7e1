#include "hpl/model_config.hpp"

#include <cmath>
#include <sstream>

#include "hpl/errors.hpp"

namespace hpl {

namespace {
bool divides_evenly(double num, double den) {
  if (den <= 0.0) return false;
  const double q = num / den;
  return std::abs(q - std::round(q)) < 1e-9 * std::max(1.0, std::abs(q));
}
}  // namespace

int ModelConfig::sample_count() const {
  const double m = window_cycles * fs_hz / f0_hz;
  // Nearest odd integer, ties away from zero (600 -> 601).
  const long long k = static_cast<long long>(std::floor((m - 1.0) / 2.0 + 0.5 + 1e-9));
  return static_cast<int>(2 * k + 1);
}

int ModelConfig::samples_per_report() const {
  return static_cast<int>(std::llround(fs_hz / f_re_hz));
}

void ModelConfig::validate() const {
  std::ostringstream why;
  if (f0_hz <= 0.0) {
    why << "nominal frequency must be positive, got " << f0_hz;
  } else if (fs_hz <= 0.0) {
    why << "sampling frequency must be positive, got " << fs_hz;
  } else if (f_re_hz <= 0.0) {
    why << "reporting rate must be positive, got " << f_re_hz;
  } else if (max_harmonic < 2) {
    why << "max harmonic order must be >= 2, got " << max_harmonic;
  } else if (taylor_order < 0) {
    why << "Taylor order must be >= 0, got " << taylor_order;
  } else if (window_cycles < 1.0) {
    why << "window length must be >= 1 cycle, got " << window_cycles;
  } else if (window_cycles < taylor_order + 1) {
    why << "window of " << window_cycles << " cycles underdetermines Taylor order "
        << taylor_order << " (c >= K+1 required)";
  } else if (fs_hz < 2.0 * max_harmonic * f0_hz) {
    why << "sampling rate " << fs_hz << " Hz below Nyquist limit "
        << 2.0 * max_harmonic * f0_hz << " Hz for harmonic order " << max_harmonic;
  } else if (!divides_evenly(f0_hz, f_re_hz)) {
    why << "reporting rate " << f_re_hz << " Hz must divide f0 " << f0_hz << " Hz";
  } else if (!divides_evenly(fs_hz, f_re_hz)) {
    why << "fs/f_re must be an integer, got " << fs_hz / f_re_hz;
  }
  const auto msg = why.str();
  if (!msg.empty()) throw ConfigError(msg);
}

}  // namespace hpl
