#include "hpl/filter_design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <tuple>

#include "hpl/errors.hpp"
#include "hpl/threading.hpp"

namespace hpl {

namespace {

constexpr double kConditionLimit = 1e12;

// Modulated block matrix [E_1 X | ... | E_H X | E_1* X | ... | E_H* X].
Eigen::MatrixXcd modulated_blocks(const ModelConfig& cfg, const Eigen::MatrixXd& x) {
  const int cols = static_cast<int>(x.cols());
  const int h_max = cfg.max_harmonic;
  Eigen::MatrixXcd out(x.rows(), 2 * h_max * cols);
  for (int h = 1; h <= h_max; ++h) {
    const Eigen::VectorXcd diag = modulation_diagonal(cfg, h);
    out.middleCols((h - 1) * cols, cols) = diag.asDiagonal() * x;
    out.middleCols((h_max + h - 1) * cols, cols) = diag.conjugate().asDiagonal() * x;
  }
  return out;
}

std::vector<double> band_grid(const TransitionBand& band, double step) {
  if (step <= 0.0) throw ConfigError("gain evaluation grid step must be positive");
  std::vector<double> grid;
  for (auto [lo, hi] : {std::pair{band.lo1_hz, band.hi1_hz},
                        std::pair{band.lo2_hz, band.hi2_hz}}) {
    const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long k = 0; k <= count; ++k) grid.push_back(lo + k * step);
    if (grid.empty() || grid.back() < hi - 1e-9) grid.push_back(hi);
  }
  return grid;
}

// Response rows: out(i, k) = sum_n l(k, n) e^{j 2 pi f_i (n - Nh) Ts}
Eigen::MatrixXcd response_matrix(const Eigen::MatrixXcd& rows, double ts,
                                 const std::vector<double>& freqs) {
  const int n_samples = static_cast<int>(rows.cols());
  const int half = (n_samples - 1) / 2;
  Eigen::MatrixXcd phases(n_samples, static_cast<int>(freqs.size()));
  for (int c = 0; c < phases.cols(); ++c) {
    const double w = 2.0 * std::numbers::pi * freqs[c] * ts;
    for (int r = 0; r < n_samples; ++r) phases(r, c) = std::polar(1.0, w * (r - half));
  }
  return (rows * phases).transpose();  // freqs x (K+1)
}

}  // namespace

Eigen::VectorXd MultiplierSet::for_harmonic(int harmonic, int coeff_count) const {
  auto it = values.find(harmonic);
  if (it == values.end()) return Eigen::VectorXd::Ones(coeff_count);
  if (it->second.size() != coeff_count) {
    std::ostringstream why;
    why << "multiplier vector for h=" << harmonic << " has " << it->second.size()
        << " entries, expected " << coeff_count;
    throw ConfigError(why.str());
  }
  return it->second;
}

void MultiplierSet::validate(int coeff_count) const {
  for (const auto& [h, y] : values) {
    if (y.size() != coeff_count) {
      std::ostringstream why;
      why << "multiplier vector for h=" << h << " has " << y.size()
          << " entries, expected " << coeff_count;
      throw ConfigError(why.str());
    }
    for (int i = 0; i < y.size(); ++i) {
      if (!(y(i) > 0.0)) {
        std::ostringstream why;
        why << "multiplier y_{" << h << "," << i + 1 << "} must be positive, got "
            << y(i);
        throw ConfigError(why.str());
      }
      if (i % 2 == 1 && y(i) != 1.0) {
        std::ostringstream why;
        why << "even multiplier y_{" << h << "," << i + 1 << "} must stay one, got "
            << y(i);
        throw ConfigError(why.str());
      }
    }
  }
}

TransitionBand TransitionBand::for_harmonic(const ModelConfig& cfg, int harmonic) {
  if (harmonic < 1 || harmonic > cfg.max_harmonic) {
    std::ostringstream why;
    why << "harmonic " << harmonic << " outside [1, " << cfg.max_harmonic << "]";
    throw ConfigError(why.str());
  }
  TransitionBand band;
  band.harmonic = harmonic;
  const double half_report = cfg.f_re_hz / 2.0;
  band.lo1_hz = (harmonic - 1) * cfg.f0_hz;
  band.hi1_hz = harmonic * cfg.f0_hz - half_report;
  band.lo2_hz = harmonic * cfg.f0_hz + half_report;
  band.hi2_hz = (harmonic + 1) * cfg.f0_hz;
  if (band.hi1_hz < band.lo1_hz || band.hi2_hz < band.lo2_hz) {
    std::ostringstream why;
    why << "empty transition band for h=" << harmonic << " (f_re/2 = " << half_report
        << " Hz exceeds f0 = " << cfg.f0_hz << " Hz)";
    throw ConfigError(why.str());
  }
  return band;
}

struct DesignContext::Impl {
  ModelConfig cfg;
  SvdFactors factors;
  Eigen::VectorXd weights;
  std::vector<Eigen::MatrixXcd> l_blocks;  // h-1 -> (K+1) x N
};

DesignContext::DesignContext(const ModelConfig& cfg) : impl_(new Impl) {
  cfg.validate();
  impl_->cfg = cfg;
  impl_->factors = svd_taylor_basis(taylor_basis(cfg));
  const auto& f = impl_->factors;
  impl_->weights = f.right.row(0).transpose().array() / f.sigma.array();

  // Q per the Gram matrix of the modulated left-singular blocks; the h-row
  // blocks of Q * Ghat^H are the superposition rows l_h.
  const Eigen::MatrixXcd ghat = modulated_blocks(cfg, f.left);
  const Eigen::MatrixXcd gram = ghat.adjoint() * ghat;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo <= 0.0 || hi / lo > kConditionLimit) {
    std::ostringstream why;
    why << "modulated Gram matrix ill-conditioned (cond ~ " << hi / std::max(lo, 1e-300)
        << "); model too dense for this window";
    throw NumericalError(why.str());
  }
  const Eigen::MatrixXcd all_rows = Eigen::LLT<Eigen::MatrixXcd>(gram).solve(ghat.adjoint());

  const int cols = cfg.coefficients_per_harmonic();
  impl_->l_blocks.reserve(cfg.max_harmonic);
  for (int h = 1; h <= cfg.max_harmonic; ++h) {
    impl_->l_blocks.push_back(all_rows.middleRows((h - 1) * cols, cols));
  }
}

DesignContext::~DesignContext() = default;
DesignContext::DesignContext(DesignContext&&) noexcept = default;
DesignContext& DesignContext::operator=(DesignContext&&) noexcept = default;

const ModelConfig& DesignContext::config() const { return impl_->cfg; }
const SvdFactors& DesignContext::svd() const { return impl_->factors; }
const Eigen::VectorXd& DesignContext::weights() const { return impl_->weights; }

const Eigen::MatrixXcd& DesignContext::l_matrix(int harmonic) const {
  if (harmonic < 1 || harmonic > impl_->cfg.max_harmonic) {
    std::ostringstream why;
    why << "harmonic " << harmonic << " outside [1, " << impl_->cfg.max_harmonic << "]";
    throw ConfigError(why.str());
  }
  return impl_->l_blocks[harmonic - 1];
}

Eigen::MatrixXcd compute_l_matrix(const DesignContext& ctx, int harmonic) {
  return ctx.l_matrix(harmonic);
}

FilterBank tft_filter_bank(const ModelConfig& cfg) {
  cfg.validate();
  Eigen::MatrixXcd g = modulated_blocks(cfg, taylor_basis(cfg));

  // Column equilibration: exact diagonal scaling, undone on the output rows.
  Eigen::VectorXd col_norms(g.cols());
  for (int c = 0; c < g.cols(); ++c) {
    col_norms(c) = g.col(c).norm();
    g.col(c) /= col_norms(c);
  }
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cond = sv(0) / sv(sv.size() - 1);
  if (!(cond * cond <= kConditionLimit)) {
    std::ostringstream why;
    why << "normal matrix of the modulated Taylor system ill-conditioned "
        << "(cond ~ " << cond * cond << " after column equilibration)";
    throw NumericalError(why.str());
  }

  FilterBank bank;
  bank.cfg = cfg;
  bank.report.grid_step_hz = 0.0;
  const int cols = cfg.coefficients_per_harmonic();
  for (int h = 1; h <= cfg.max_harmonic; ++h) {
    const int row = (h - 1) * cols;  // zero-order phasor row of the h block
    Eigen::VectorXcd scaled =
        svd.matrixU() *
        (svd.singularValues().cwiseInverse().asDiagonal() *
         svd.matrixV().row(row).transpose().conjugate());
    bank.filters[h] = scaled.conjugate() / col_norms(row);
  }
  return bank;
}

Eigen::VectorXcd compose_filter(const DesignContext& ctx, int harmonic,
                                const Eigen::VectorXd& multipliers) {
  const int cols = ctx.config().coefficients_per_harmonic();
  if (multipliers.size() != cols) {
    std::ostringstream why;
    why << "expected " << cols << " multipliers, got " << multipliers.size();
    throw ConfigError(why.str());
  }
  if (!(multipliers.array() > 0.0).all()) {
    throw ConfigError("multipliers must be positive");
  }
  const Eigen::VectorXd w = ctx.weights().array() / multipliers.array();
  return ctx.l_matrix(harmonic).transpose() * w.cast<Complex>();
}

Complex frequency_response(const Eigen::VectorXcd& filter, double sample_period_s,
                           double freq_hz) {
  const int n_samples = static_cast<int>(filter.size());
  const int half = (n_samples - 1) / 2;
  const double w = 2.0 * std::numbers::pi * freq_hz * sample_period_s;
  Complex acc(0.0, 0.0);
  for (int r = 0; r < n_samples; ++r) acc += filter(r) * std::polar(1.0, w * (r - half));
  return acc;
}

double gain_at(const Eigen::VectorXcd& filter, double sample_period_s, double freq_hz) {
  return std::abs(frequency_response(filter, sample_period_s, freq_hz));
}

double max_transition_gain(const Eigen::VectorXcd& filter, double sample_period_s,
                           const TransitionBand& band, double grid_step_hz) {
  double best = 0.0;
  for (double f : band_grid(band, grid_step_hz)) {
    best = std::max(best, gain_at(filter, sample_period_s, f));
  }
  return best;
}

namespace {

// Minimax objective machinery for one harmonic: precomputed per-row responses
// over the transition-band grid and at the passband center.
class TransitionObjective {
public:
  TransitionObjective(const DesignContext& ctx, int harmonic, const DesignOptions& opts)
      : weights_(ctx.weights()),
        free_(free_indices(ctx.config().taylor_order)),
        guard_lo_(opts.passband_guard_lo),
        guard_hi_(opts.passband_guard_hi) {
    const auto& cfg = ctx.config();
    const auto band = TransitionBand::for_harmonic(cfg, harmonic);
    const auto grid = band_grid(band, opts.grid_step_hz);
    band_rows_ = response_matrix(ctx.l_matrix(harmonic), cfg.sample_period_s(), grid);
    center_row_ = response_matrix(ctx.l_matrix(harmonic), cfg.sample_period_s(),
                                  {harmonic * cfg.f0_hz});
  }

  static std::vector<int> free_indices(int taylor_order) {
    std::vector<int> idx;
    for (int k = 2; k <= taylor_order; k += 2) idx.push_back(k);
    return idx;
  }

  const std::vector<int>& free() const { return free_; }
  bool guard_tripped() const { return guard_tripped_; }

  Eigen::VectorXd expand(const Eigen::VectorXd& free_vals) const {
    Eigen::VectorXd y = Eigen::VectorXd::Ones(weights_.size());
    for (size_t i = 0; i < free_.size(); ++i) y(free_[i]) = free_vals(static_cast<int>(i));
    return y;
  }

  double operator()(const Eigen::VectorXd& free_vals) {
    const Eigen::VectorXcd w =
        (weights_.array() / expand(free_vals).array()).matrix().cast<Complex>();
    const double center = (center_row_ * w).cwiseAbs().value();
    if (center < guard_lo_ || center > guard_hi_) {
      guard_tripped_ = true;
      return std::numeric_limits<double>::infinity();
    }
    return (band_rows_ * w).cwiseAbs().maxCoeff();
  }

  // Batched coarse evaluation: columns of `candidates` are free-value vectors.
  Eigen::VectorXd evaluate_batch(const Eigen::MatrixXd& candidates) {
    Eigen::MatrixXcd w(weights_.size(), candidates.cols());
    for (int c = 0; c < candidates.cols(); ++c) {
      w.col(c) =
          (weights_.array() / expand(candidates.col(c)).array()).matrix().cast<Complex>();
    }
    const Eigen::VectorXd center = (center_row_ * w).cwiseAbs().transpose();
    const Eigen::VectorXd maxima =
        (band_rows_ * w).cwiseAbs().colwise().maxCoeff().transpose();
    Eigen::VectorXd values = maxima;
    for (int c = 0; c < candidates.cols(); ++c) {
      if (center(c) < guard_lo_ || center(c) > guard_hi_) {
        guard_tripped_ = true;
        values(c) = std::numeric_limits<double>::infinity();
      }
    }
    return values;
  }

  double tft_max_gain() const {
    return (band_rows_ * weights_.cast<Complex>()).cwiseAbs().maxCoeff();
  }

private:
  Eigen::VectorXd weights_;
  std::vector<int> free_;
  double guard_lo_, guard_hi_;
  Eigen::MatrixXcd band_rows_;   // grid x (K+1)
  Eigen::MatrixXcd center_row_;  // 1 x (K+1)
  bool guard_tripped_ = false;
};

struct Candidate {
  Eigen::VectorXd y;  // free values only
  double value = std::numeric_limits<double>::infinity();
  double dist = std::numeric_limits<double>::infinity();  // to all-ones
};

double distance_to_ones(const Eigen::VectorXd& y) {
  return (y.array() - 1.0).matrix().norm();
}

bool better(const Candidate& a, const Candidate& b, double tie) {
  if (a.value < b.value - tie) return true;
  if (std::abs(a.value - b.value) <= tie && a.dist < b.dist - 1e-12) return true;
  return false;
}

// Coordinate pattern search with step halving.
void pattern_refine(TransitionObjective& obj, Candidate& cand, const DesignOptions& opts) {
  double step = opts.refine_initial_step;
  while (step >= opts.refine_resolution - 1e-12) {
    bool moved = false;
    for (int i = 0; i < cand.y.size(); ++i) {
      for (double delta : {-step, step}) {
        const double v = cand.y(i) + delta;
        if (v < 0.05) continue;
        Candidate trial{cand.y, 0.0, 0.0};
        trial.y(i) = v;
        trial.value = obj(trial.y);
        trial.dist = distance_to_ones(trial.y);
        if (better(trial, cand, opts.tie_tolerance)) {
          cand = trial;
          moved = true;
        }
      }
    }
    if (!moved) step /= 2.0;
  }
}

// Alternating exact line minimization; follows diagonal valleys that defeat
// plain coordinate steps when run from several coarse starts.
void line_polish(TransitionObjective& obj, Candidate& cand, const DesignOptions& opts) {
  constexpr int kMaxSweeps = 60;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool moved = false;
    for (int i = 0; i < cand.y.size(); ++i) {
      const double y0 = cand.y(i);
      Candidate best = cand;
      auto scan = [&](double lo, double hi, double step) {
        for (double v = lo; v <= hi + 1e-12; v += step) {
          if (v < 0.05) continue;
          Candidate trial{cand.y, 0.0, 0.0};
          trial.y(i) = v;
          trial.value = obj(trial.y);
          trial.dist = distance_to_ones(trial.y);
          if (better(trial, best, opts.tie_tolerance)) best = trial;
        }
      };
      scan(y0 - 0.4, y0 + 0.4, 0.01);
      scan(best.y(i) - 0.01, best.y(i) + 0.01, 0.00125);
      if (std::abs(best.y(i) - y0) > 1e-9 && better(best, cand, opts.tie_tolerance)) {
        cand = best;
        moved = true;
      }
    }
    if (!moved) break;
  }
}

}  // namespace

DesignRow optimize_multipliers(const DesignContext& ctx, int harmonic,
                               const DesignOptions& opts) {
  const auto& cfg = ctx.config();
  if (cfg.taylor_order < 2) {
    throw ConfigError("multiplier optimization needs Taylor order >= 2 "
                      "(no free odd multiplier otherwise)");
  }
  TransitionObjective obj(ctx, harmonic, opts);
  const int n_free = static_cast<int>(obj.free().size());

  std::vector<double> points;
  for (double p = opts.multiplier_min; p <= opts.multiplier_max * (1.0 + 1e-12);
       p *= opts.coarse_log_factor) {
    points.push_back(p);
  }

  // Coarse pass over the full grid, keeping the best few for local polish.
  std::vector<Candidate> kept;
  const int keep = std::max(1, opts.polish_starts);
  std::vector<int> odometer(n_free, 0);
  Eigen::MatrixXd batch(n_free, 512);
  bool done = false;
  while (!done) {
    int filled = 0;
    while (filled < batch.cols() && !done) {
      for (int i = 0; i < n_free; ++i) batch(i, filled) = points[odometer[i]];
      ++filled;
      int pos = n_free - 1;
      while (pos >= 0 && ++odometer[pos] == static_cast<int>(points.size())) {
        odometer[pos--] = 0;
      }
      if (pos < 0) done = true;
    }
    const Eigen::VectorXd values = obj.evaluate_batch(batch.leftCols(filled));
    const auto ordering = [](const Candidate& a, const Candidate& b) {
      return std::tie(a.value, a.dist) < std::tie(b.value, b.dist);
    };
    for (int c = 0; c < filled; ++c) {
      Candidate cand{batch.col(c), values(c), distance_to_ones(batch.col(c))};
      if (!std::isfinite(cand.value)) continue;
      if (static_cast<int>(kept.size()) < keep) {
        kept.push_back(std::move(cand));
        std::sort(kept.begin(), kept.end(), ordering);
      } else if (ordering(cand, kept.back())) {
        kept.back() = std::move(cand);
        std::sort(kept.begin(), kept.end(), ordering);
      }
    }
  }

  Candidate best;
  for (auto cand : kept) {
    pattern_refine(obj, cand, opts);
    line_polish(obj, cand, opts);
    if (better(cand, best, opts.tie_tolerance)) best = cand;
  }

  Candidate ones{Eigen::VectorXd::Ones(n_free), 0.0, 0.0};
  ones.value = obj(ones.y);

  DesignRow row;
  row.harmonic = harmonic;
  row.tft_max_gain = obj.tft_max_gain();
  row.guard_active = obj.guard_tripped();
  if (!better(best, ones, opts.tie_tolerance)) {
    best = ones;
    row.improved = false;
  }
  row.optimized_max_gain = best.value;
  row.reduction = 1.0 - row.optimized_max_gain / row.tft_max_gain;
  row.multipliers = obj.expand(best.y);
  return row;
}

FilterBank design_bank(const ModelConfig& cfg, const DesignOptions& opts) {
  cfg.validate();
  FilterBank bank = tft_filter_bank(cfg);
  bank.report.grid_step_hz = opts.grid_step_hz;

  if (cfg.taylor_order < 2) {
    // Only y_{h,1} exists; nothing to optimize.
    for (int h = 2; h <= cfg.max_harmonic; ++h) {
      DesignRow row;
      row.harmonic = h;
      const auto band = TransitionBand::for_harmonic(cfg, h);
      row.tft_max_gain = max_transition_gain(bank.filters[h], cfg.sample_period_s(),
                                             band, opts.grid_step_hz);
      row.optimized_max_gain = row.tft_max_gain;
      row.reduction = 0.0;
      row.multipliers = Eigen::VectorXd::Ones(cfg.coefficients_per_harmonic());
      row.improved = false;
      row.no_free_multipliers = true;
      bank.report.rows.push_back(std::move(row));
    }
    return bank;
  }

  DesignContext ctx(cfg);
  std::vector<DesignRow> rows(cfg.max_harmonic - 1);
  parallel_for(static_cast<int>(rows.size()), opts.threads, [&](int i) {
    rows[i] = optimize_multipliers(ctx, i + 2, opts);
  });
  for (auto& row : rows) {
    bank.multipliers.values[row.harmonic] = row.multipliers;
    bank.filters[row.harmonic] = compose_filter(ctx, row.harmonic, row.multipliers);
    bank.report.rows.push_back(std::move(row));
  }
  return bank;
}

}  // namespace hpl
