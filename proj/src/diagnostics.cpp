#include "hbi/diagnostics.hpp"

#include "hbi/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace hbi {

Autocorrelation autocorrelation(std::span<const double> series, int max_lag, AcfMode mode) {
  const auto n = static_cast<long>(series.size());
  if (n < 2) throw DomainError("autocorrelation: need at least two samples");
  if (max_lag < 0 || max_lag >= n) throw DomainError("autocorrelation: max_lag must lie in [0, N)");

  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  Autocorrelation out;
  out.values.resize(static_cast<std::size_t>(max_lag) + 1);

  if (mode == AcfMode::standard) {
    auto autocov = [&](long lag) {
      double s = 0.0;
      for (long k = lag; k < n; ++k) s += (series[k] - mean) * (series[k - lag] - mean);
      return s / static_cast<double>(n);
    };
    const double c0 = autocov(0);
    if (c0 == 0.0) {
      out.degenerate = true;
      out.values.assign(out.values.size(), 0.0);
      out.values[0] = 1.0;
      return out;
    }
    for (long lag = 0; lag <= max_lag; ++lag) out.values[static_cast<std::size_t>(lag)] = autocov(lag) / c0;
    return out;
  }

  double norm = 0.0;
  for (double x : series) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    out.degenerate = true;
    out.values.assign(out.values.size(), 0.0);
    return out;
  }
  // 1-based k from 1 + lag to N - lag, i.e. 0-based lag .. n - lag - 1.
  for (long lag = 0; lag <= max_lag; ++lag) {
    double s = 0.0;
    for (long k = lag; k <= n - lag - 1; ++k) s += (series[k] - mean) * (series[k - lag] - mean);
    out.values[static_cast<std::size_t>(lag)] = s / norm;
  }
  return out;
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw DomainError("quantile: empty sample");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Envelope credible_envelope(const Matrix& draws, double level, std::span<const std::uint8_t> excluded) {
  if (!(level >= 0.0 && level < 1.0)) throw DomainError("credible_envelope: level must lie in [0, 1)");
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < draws.rows(); ++i) {
    if (excluded.empty() || excluded[static_cast<std::size_t>(i)] == 0) rows.push_back(i);
  }
  if (rows.size() < 2) throw DomainError("credible_envelope: need at least two retained draws");

  const double tail = 0.5 * (1.0 - level);
  Envelope env{Vector(draws.cols()), Vector(draws.cols()), Vector(draws.cols())};
  std::vector<double> column(rows.size());
  for (Eigen::Index j = 0; j < draws.cols(); ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      column[i] = draws(rows[i], j);
      sum += column[i];
    }
    std::sort(column.begin(), column.end());
    env.lo[j] = quantile_sorted(column, tail);
    env.hi[j] = quantile_sorted(column, 1.0 - tail);
    env.mean[j] = sum / static_cast<double>(rows.size());
  }
  return env;
}

double threshold_delta(double beta1, double vartheta) {
  return beta1 * vartheta + std::sqrt(beta1) * vartheta;
}

int compressibility_count(std::span<const double> theta, double delta) {
  return static_cast<int>(std::count_if(theta.begin(), theta.end(), [&](double t) { return t > delta; }));
}

int CompressibilityHistogram::mode() const {
  if (frequency.empty()) return 0;
  return static_cast<int>(std::max_element(frequency.begin(), frequency.end()) - frequency.begin());
}

CompressibilityHistogram compressibility_histogram(const Matrix& theta, double delta,
                                                   std::span<const std::uint8_t> excluded) {
  CompressibilityHistogram h;
  h.frequency.assign(static_cast<std::size_t>(theta.cols()) + 1, 0);
  std::vector<double> row(static_cast<std::size_t>(theta.cols()));
  for (Eigen::Index i = 0; i < theta.rows(); ++i) {
    if (!excluded.empty() && excluded[static_cast<std::size_t>(i)] != 0) continue;
    for (Eigen::Index j = 0; j < theta.cols(); ++j) row[static_cast<std::size_t>(j)] = theta(i, j);
    const int c = compressibility_count(row, delta);
    h.counts_per_draw.push_back(c);
    ++h.frequency[static_cast<std::size_t>(c)];
  }
  return h;
}

DiagnosticsReport make_report(const SampleSet& samples, const PhysicalDraws& physical,
                              const ReportOptions& options) {
  const auto stored = static_cast<long>(samples.stored());
  if (stored == 0) throw ConfigError("diagnose: the chain stored no draws");
  if (stored < 2) throw ConfigError("diagnose: need at least two stored draws");
  const auto n = static_cast<int>(samples.n());
  for (int p : options.probes) {
    if (p < 1 || p > n)
      throw ConfigError("diagnose: probe index " + std::to_string(p) + " outside 1.." + std::to_string(n));
  }
  if (options.max_lag < 0) throw ConfigError("diagnose: lags must be non-negative");

  DiagnosticsReport rep;
  rep.acceptance_rate = samples.acceptance_rate();
  rep.stored_draws = stored;
  rep.excluded_draws = std::count(physical.excluded.begin(), physical.excluded.end(), 1);
  rep.max_lag = options.max_lag;
  if (rep.max_lag > stored - 1) {
    rep.max_lag = static_cast<int>(stored - 1);
    rep.lags_truncated = true;
  }

  const std::span<const std::uint8_t> excl(physical.excluded);
  for (int p : options.probes) {
    const auto col = static_cast<Eigen::Index>(p - 1);
    std::vector<double> xs;
    std::vector<double> ts;
    for (Eigen::Index i = 0; i < physical.x.rows(); ++i) {
      if (excl[static_cast<std::size_t>(i)] != 0) continue;
      xs.push_back(physical.x(i, col));
      ts.push_back(physical.theta(i, col));
    }
    if (xs.size() < 2) throw ConfigError("diagnose: fewer than two usable draws");
    const int lag = std::min<int>(rep.max_lag, static_cast<int>(xs.size()) - 1);
    rep.probes.push_back({p, autocorrelation(xs, lag), autocorrelation(ts, lag),
                          autocorrelation(xs, lag, AcfMode::paper_literal),
                          autocorrelation(ts, lag, AcfMode::paper_literal)});
  }
  rep.z = credible_envelope(physical.z, options.level, excl);
  rep.x = credible_envelope(physical.x, options.level, excl);
  rep.theta = credible_envelope(physical.theta, options.level, excl);
  rep.delta = threshold_delta(options.beta1, options.vartheta1);
  rep.compressibility = compressibility_histogram(physical.theta, rep.delta, excl);
  return rep;
}

}  // namespace hbi
