#include "hbi/forward.hpp"

#include "hbi/error.hpp"

#include <cmath>
#include <random>
#include <string>

namespace hbi {

std::vector<Jump> DeconvolutionConfig::default_jumps() {
  return {{0.10, 1.0}, {0.25, -1.5}, {0.45, 0.8}, {0.60, 0.7}, {0.80, -1.0}};
}

void DeconvolutionConfig::validate() const {
  if (!(kernel_width > 0.0)) throw ConfigError("problem.kernel_width must be positive");
  if (!std::isfinite(kernel_amplitude)) throw ConfigError("problem.kernel_amplitude must be finite");
  if (n < 1) throw ConfigError("problem.n must be at least 1");
  if (m < 1) throw ConfigError("problem.m must be at least 1");
  if (obs_stride < 1) throw ConfigError("problem.obs_stride must be at least 1");
  if (1 + static_cast<long>(obs_stride) * (m - 1) > n)
    throw ConfigError("problem.obs_stride: observation node 1 + " + std::to_string(obs_stride) +
                      "*(m-1) exceeds n = " + std::to_string(n));
  if (fine_n < n)
    throw ConfigError("problem.fine_n must be at least n (data grid coarser than model grid)");
  if (!(sigma > 0.0)) throw ConfigError("problem.sigma must be positive");
  for (std::size_t i = 0; i < signal_jumps.size(); ++i) {
    const Jump& jmp = signal_jumps[i];
    if (!(jmp.location > 0.0 && jmp.location < 1.0))
      throw ConfigError("problem.signal_jumps[" + std::to_string(i) + "].location must lie in (0,1)");
    if (!std::isfinite(jmp.increment))
      throw ConfigError("problem.signal_jumps[" + std::to_string(i) + "].increment must be finite");
    if (i > 0 && !(jmp.location > signal_jumps[i - 1].location))
      throw ConfigError("problem.signal_jumps locations must be strictly increasing");
  }
}

InverseProblem::InverseProblem(Matrix a_hat, Vector b_hat, double sigma)
    : a_hat_(std::move(a_hat)), b_hat_(std::move(b_hat)), sigma_(sigma) {
  if (a_hat_.rows() != b_hat_.size())
    throw DimensionError("InverseProblem: A_hat has " + std::to_string(a_hat_.rows()) +
                         " rows but b_hat has " + std::to_string(b_hat_.size()) + " entries");
  if (a_hat_.cols() == 0) throw DimensionError("InverseProblem: empty forward map");
}

double kernel_eval(double t, const DeconvolutionConfig& cfg) {
  const double w = cfg.kernel_width;
  return cfg.kernel_amplitude * std::exp(-t * t / (2.0 * w * w));
}

double generative_signal(double s, const DeconvolutionConfig& cfg) {
  double g = 0.0;
  for (const Jump& jmp : cfg.signal_jumps) {
    if (jmp.location <= s) g += jmp.increment;
  }
  return g;
}

double coarse_node(int k, int n) { return (k - 0.5) / n; }

double observation_time(int j, const DeconvolutionConfig& cfg) {
  return coarse_node(1 + cfg.obs_stride * (j - 1), cfg.n);
}

Benchmark build_problem(const DeconvolutionConfig& cfg) {
  cfg.validate();
  const int n = cfg.n;
  const int m = cfg.m;

  Vector z_true(n);
  for (int k = 1; k <= n; ++k) z_true[k - 1] = generative_signal(coarse_node(k, n), cfg);

  std::vector<double> g_fine(static_cast<std::size_t>(cfg.fine_n));
  for (int i = 1; i <= cfg.fine_n; ++i)
    g_fine[static_cast<std::size_t>(i - 1)] = generative_signal(coarse_node(i, cfg.fine_n), cfg);

  Matrix a(m, n);
  Vector b_noiseless(m);
  const double fine_weight = 1.0 / cfg.fine_n;
  for (int j = 1; j <= m; ++j) {
    const double t = observation_time(j, cfg);
    for (int k = 1; k <= n; ++k) a(j - 1, k - 1) = kernel_eval(t - coarse_node(k, n), cfg) / n;
    double acc = 0.0;
    for (int i = 1; i <= cfg.fine_n; ++i) {
      const double g = g_fine[static_cast<std::size_t>(i - 1)];
      if (g != 0.0) acc += kernel_eval(t - coarse_node(i, cfg.fine_n), cfg) * g;
    }
    b_noiseless[j - 1] = fine_weight * acc;
  }

  std::mt19937_64 rng(cfg.rng_seed);
  std::normal_distribution<double> normal(0.0, cfg.sigma);
  Vector b(m);
  for (int j = 0; j < m; ++j) b[j] = b_noiseless[j] + normal(rng);

  // A L^{-1}: column k of the product is the sum of columns k..n of A.
  Matrix a_int(m, n);
  for (int j = 0; j < m; ++j) {
    double acc = 0.0;
    for (int k = n - 1; k >= 0; --k) {
      acc += a(j, k);
      a_int(j, k) = acc;
    }
  }

  InverseProblem prob(a_int / cfg.sigma, b / cfg.sigma, cfg.sigma);
  GroundTruth truth{z_true, apply_difference(z_true), b_noiseless, b};
  return Benchmark{std::move(prob), std::move(truth), std::move(a)};
}

Vector apply_difference(const Vector& z) {
  Vector x(z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) x[k] = k == 0 ? z[0] : z[k] - z[k - 1];
  return x;
}

Vector integrate_increments(const Vector& x) {
  Vector z(x.size());
  double acc = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    acc += x[k];
    z[k] = acc;
  }
  return z;
}

Vector apply_scaled_forward(const Vector& xi, const InverseProblem& prob, const Vector& vartheta) {
  if (static_cast<std::size_t>(xi.size()) != prob.n() || vartheta.size() != xi.size())
    throw DimensionError("apply_scaled_forward: xi (" + std::to_string(xi.size()) +
                         "), vartheta (" + std::to_string(vartheta.size()) + ") and A_hat (" +
                         std::to_string(prob.n()) + " columns) disagree");
  return prob.a_hat() * (vartheta.array().sqrt() * xi.array()).matrix();
}

Vector sensitivity_vartheta(const InverseProblem& prob, double c) {
  if (!(c > 0.0)) throw DomainError("sensitivity_vartheta: C must be positive");
  Vector out(static_cast<Eigen::Index>(prob.n()));
  for (Eigen::Index j = 0; j < out.size(); ++j) {
    const double norm2 = prob.a_hat().col(j).squaredNorm();
    if (norm2 == 0.0)
      throw DomainError("sensitivity_vartheta: column " + std::to_string(j) + " of A_hat is zero");
    out[j] = c / norm2;
  }
  return out;
}

}  // namespace hbi
