#pragma once
// Chain quality and posterior summaries over stored draws.

#include "hbi/forward.hpp"
#include "hbi/sampler.hpp"

#include <span>
#include <vector>

namespace hbi {

enum class AcfMode {
  // Biased sample autocovariance over lag-0 autocovariance; C(0) = 1.
  standard,
  // (1/||x||) sum_{k=1+l}^{N-l} (x^k - mean)(x^{k-l} - mean) with the
  // uncentered norm ||x|| = (sum (x^k)^2)^{1/2}, kept as a literal variant.
  paper_literal,
};

struct Autocorrelation {
  std::vector<double> values;  // lags 0..max_lag
  bool degenerate = false;     // zero-variance series (standard mode)
};

// Requires N >= 2 and 0 <= max_lag < N (DomainError otherwise).
Autocorrelation autocorrelation(std::span<const double> series, int max_lag,
                                AcfMode mode = AcfMode::standard);

// Linear interpolation between order statistics (sorted input, p in [0,1]).
double quantile_sorted(std::span<const double> sorted, double p);

struct Envelope {
  Vector lo;
  Vector hi;
  Vector mean;
};

// Pointwise (1-level)/2 and 1-(1-level)/2 quantiles and mean over the rows of
// draws.  Rows flagged in `excluded` (if non-empty) are skipped.
Envelope credible_envelope(const Matrix& draws, double level,
                           std::span<const std::uint8_t> excluded = {});

// One standard deviation above the mean of the gamma reference hyperprior.
double threshold_delta(double beta1, double vartheta);

// Number of entries strictly above delta.
int compressibility_count(std::span<const double> theta, double delta);

struct CompressibilityHistogram {
  std::vector<int> counts_per_draw;  // count for each retained draw
  std::vector<long> frequency;       // frequency[c] = number of draws with count c, c = 0..n
  int mode() const;                  // smallest c with maximal frequency
};

CompressibilityHistogram compressibility_histogram(const Matrix& theta, double delta,
                                                   std::span<const std::uint8_t> excluded = {});

struct ReportOptions {
  int max_lag = 100;
  std::vector<int> probes{30, 50};  // 1-based component indices
  double level = 0.90;
  double beta1 = 1.501;
  double vartheta1 = 0.05;
};

struct ProbeAutocorrelation {
  int index;  // 1-based
  Autocorrelation x;
  Autocorrelation theta;
  Autocorrelation x_literal;
  Autocorrelation theta_literal;
};

struct DiagnosticsReport {
  double acceptance_rate = 0.0;
  long stored_draws = 0;
  long excluded_draws = 0;
  int max_lag = 0;
  bool lags_truncated = false;
  std::vector<ProbeAutocorrelation> probes;
  Envelope z;
  Envelope x;
  Envelope theta;
  double delta = 0.0;
  CompressibilityHistogram compressibility;
};

// Pure function of the chain output.  ConfigError for empty chains or
// out-of-range probe indices; max_lag is clipped to stored_draws - 1.
DiagnosticsReport make_report(const SampleSet& samples, const PhysicalDraws& physical,
                              const ReportOptions& options);

}  // namespace hbi
