#include "hbi/hypermodel.hpp"

#include "hbi/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace hbi {

Hypermodel::Hypermodel(double r, double beta, double vartheta)
    : Hypermodel(r, beta, Vector::Constant(1, vartheta)) {}

Hypermodel::Hypermodel(double r, double beta, Vector vartheta)
    : r_(r), beta_(beta), vartheta_(std::move(vartheta)) {
  if (!(r_ != 0.0) || !std::isfinite(r_)) throw DomainError("hypermodel: r must be nonzero");
  if (!(beta_ > 0.0) || !std::isfinite(beta_))
    throw DomainError("hypermodel: beta must be positive, got " + std::to_string(beta_));
  if (vartheta_.size() == 0) throw DomainError("hypermodel: empty vartheta");
  for (Eigen::Index j = 0; j < vartheta_.size(); ++j) {
    if (!(vartheta_[j] > 0.0) || !std::isfinite(vartheta_[j]))
      throw DomainError("hypermodel: vartheta[" + std::to_string(j) + "] must be positive");
  }
}

Vector Hypermodel::vartheta_vector(std::size_t n) const {
  if (scalar_scale()) return Vector::Constant(static_cast<Eigen::Index>(n), vartheta_[0]);
  if (static_cast<std::size_t>(vartheta_.size()) != n)
    throw DimensionError("hypermodel: vartheta has " + std::to_string(vartheta_.size()) +
                         " entries, problem has " + std::to_string(n));
  return vartheta_;
}

double Hypermodel::baseline_lambda() const {
  require_map_compatible();
  return std::pow(baseline_base(), 1.0 / r_);
}

void Hypermodel::require_map_compatible() const {
  if (!(baseline_base() > 0.0))
    throw DomainError("hypermodel: beta - 3/(2r) must be positive (r=" + std::to_string(r_) +
                      ", beta=" + std::to_string(beta_) + ")");
}

double gg_log_pdf(double theta, const Hypermodel& hm, std::size_t j) {
  if (!(theta > 0.0) || !std::isfinite(theta))
    throw DomainError("gg_log_pdf: theta must be positive and finite");
  const double scale = hm.vartheta(j);
  const double log_ratio = std::log(theta / scale);
  return std::log(std::fabs(hm.r())) - std::lgamma(hm.beta()) - std::log(scale) +
         (hm.r() * hm.beta() - 1.0) * log_ratio - std::exp(hm.r() * log_ratio);
}

double marginal_mean(const Hypermodel& hm, std::size_t j) {
  const double shifted = hm.beta() + 1.0 / hm.r();
  if (!(shifted > 0.0))
    throw DomainError("marginal_mean: beta + 1/r <= 0, the mean is infinite");
  return hm.vartheta(j) * std::exp(std::lgamma(shifted) - std::lgamma(hm.beta()));
}

Vector marginal_means(const Hypermodel& hm, std::size_t n) {
  Vector out(static_cast<Eigen::Index>(n));
  const Vector scale = hm.vartheta_vector(n);
  const double factor = marginal_mean(hm, 0) / hm.vartheta(0);
  for (Eigen::Index j = 0; j < out.size(); ++j) out[j] = scale[j] * factor;
  return out;
}

double lambda_update_closed(double xi, const Hypermodel& hm) {
  if (hm.r() == 1.0) {
    const double eta = hm.beta() - 1.5;
    if (!(eta > 0.0)) throw DomainError("lambda_update_closed: r = 1 requires beta > 3/2");
    return 0.5 * (eta + std::sqrt(eta * eta + 2.0 * xi * xi));
  }
  if (hm.r() == -1.0) {
    const double kappa = hm.beta() + 1.5;
    return (0.5 * xi * xi + 1.0) / kappa;
  }
  throw DomainError("lambda_update_closed: no closed form for r = " + std::to_string(hm.r()));
}

namespace {

constexpr double kMaxSubstep = 1e-3;
constexpr double kRelativeSubstep = 5e-3;

struct PhiOde {
  double r;
  double two_r2;

  double rhs(double t, double phi) const {
    return 2.0 * t * phi / (two_r2 * std::pow(phi, r + 1.0) + t * t);
  }

  // Local t-scale on which phi changes by O(1) relative amount.
  double scale(double t, double phi) const {
    return std::sqrt(two_r2 * std::pow(phi, r + 1.0)) + t;
  }

  double rk4(double t, double phi, double h) const {
    const double k1 = rhs(t, phi);
    const double k2 = rhs(t + 0.5 * h, phi + 0.5 * h * k1);
    const double k3 = rhs(t + 0.5 * h, phi + 0.5 * h * k2);
    const double k4 = rhs(t + h, phi + h * k3);
    return phi + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
};

}  // namespace

std::vector<double> lambda_update_ode(std::span<const double> xi_abs_sorted,
                                      const Hypermodel& hm) {
  for (std::size_t i = 0; i < xi_abs_sorted.size(); ++i) {
    if (!(xi_abs_sorted[i] >= 0.0) || !std::isfinite(xi_abs_sorted[i]))
      throw DomainError("lambda_update_ode: evaluation points must be finite and non-negative");
    if (i > 0 && xi_abs_sorted[i] < xi_abs_sorted[i - 1])
      throw DomainError("lambda_update_ode: evaluation points must be sorted ascending");
  }
  const PhiOde ode{hm.r(), 2.0 * hm.r() * hm.r()};
  double t = 0.0;
  double phi = hm.baseline_lambda();

  std::vector<double> out;
  out.reserve(xi_abs_sorted.size());
  for (const double target : xi_abs_sorted) {
    while (t < target) {
      double h = std::min(kMaxSubstep, kRelativeSubstep * ode.scale(t, phi));
      const bool last = t + h >= target;
      if (last) h = target - t;
      phi = ode.rk4(t, phi, h);
      t = last ? target : t + h;
      if (!std::isfinite(phi) || !(phi > 0.0))
        throw NumericalError("lambda_update_ode: integration left the positive reals at t=" +
                             std::to_string(t));
    }
    out.push_back(phi);
  }
  return out;
}

Vector lambda_update(const Vector& xi, const Hypermodel& hm) {
  Vector lambda(xi.size());
  if (hm.r() == 1.0 || hm.r() == -1.0) {
    for (Eigen::Index j = 0; j < xi.size(); ++j) lambda[j] = lambda_update_closed(xi[j], hm);
    return lambda;
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(xi.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::fabs(xi[a]) < std::fabs(xi[b]);
  });
  std::vector<double> sorted(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) sorted[i] = std::fabs(xi[order[i]]);
  const std::vector<double> phi = lambda_update_ode(sorted, hm);
  for (std::size_t i = 0; i < order.size(); ++i) lambda[order[i]] = phi[i];
  return lambda;
}

double optimality_residual(double xi, double lambda, const Hypermodel& hm) {
  const double r = hm.r();
  return -0.5 * xi * xi / (lambda * lambda) + r * std::pow(lambda, r - 1.0) -
         hm.log_coefficient() / lambda;
}

namespace {

// log of Gamma(beta + 1/r) / (Gamma(beta) (beta - 3/(2r))^(1/r)); the matched
// beta solves log_ratio(beta) = log(1 + 3/(2 eta)).
double log_ratio(double beta, double r) {
  return std::lgamma(beta + 1.0 / r) - std::lgamma(beta) - std::log(beta - 1.5 / r) / r;
}

double solve_beta(double r, double log_target) {
  const double boundary = r > 0.0 ? 1.5 / r : -1.0 / r;
  auto f = [&](double offset) { return log_ratio(boundary + offset, r) - log_target; };

  // f -> +inf at the boundary and f -> -log_target < 0 as beta -> inf.
  double lo = 1e-3 * std::max(1.0, boundary);
  int guard = 0;
  while (!(f(lo) > 0.0)) {
    lo *= 0.5;
    if (++guard > 200 || lo == 0.0)
      throw NumericalError("match_hyperparameters: no bracketing root near the validity boundary");
  }
  double hi = lo;
  guard = 0;
  while (!(f(hi) < 0.0)) {
    hi *= 2.0;
    if (++guard > 2000 || !std::isfinite(hi))
      throw NumericalError("match_hyperparameters: no bracketing root for r = " +
                           std::to_string(r));
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (std::fabs(fm) < 1e-14 || mid == lo || mid == hi) return boundary + mid;
    (fm > 0.0 ? lo : hi) = mid;
  }
  return boundary + 0.5 * (lo + hi);
}

}  // namespace

Hypermodel match_hyperparameters(double r_target, double beta1, double vartheta1) {
  const double eta = beta1 - 1.5;
  if (!(eta > 0.0))
    throw DomainError("match_hyperparameters: reference model needs beta1 > 3/2");
  if (!(vartheta1 > 0.0)) throw DomainError("match_hyperparameters: vartheta1 must be positive");
  if (!(r_target != 0.0) || !std::isfinite(r_target))
    throw DomainError("match_hyperparameters: r_target must be nonzero");

  const double m = 1.0 + 1.5 / eta;
  double beta = 0.0;
  double vartheta = 0.0;
  if (r_target == 1.0) {
    beta = beta1;
    vartheta = vartheta1;
  } else if (r_target == 0.5) {
    beta = (6.0 * m + 1.0 + std::sqrt(48.0 * m + 1.0)) / (2.0 * (m - 1.0));
    vartheta = vartheta1 * eta / ((beta - 3.0) * (beta - 3.0));
  } else if (r_target == -0.5) {
    // The other root of the quadratic violates beta + 1/r > 0.
    beta = (6.0 + 3.0 * m + std::sqrt(m * m + 80.0 * m)) / (2.0 * (m - 1.0));
    vartheta = vartheta1 * eta * (beta + 3.0) * (beta + 3.0);
  } else if (r_target == -1.0) {
    beta = 1.0 + 5.0 * eta / 3.0;
    vartheta = vartheta1 * eta * (beta + 1.5);
  } else {
    beta = solve_beta(r_target, std::log(m));
    vartheta = vartheta1 * eta / std::pow(beta - 1.5 / r_target, 1.0 / r_target);
  }
  if (!std::isfinite(beta) || !std::isfinite(vartheta) || !(vartheta > 0.0))
    throw NumericalError("match_hyperparameters: infeasible for r = " + std::to_string(r_target));
  return Hypermodel(r_target, beta, vartheta);
}

CompatibilityResiduals compatibility_residuals(const Hypermodel& matched, double beta1,
                                               double vartheta1) {
  const double eta = beta1 - 1.5;
  const double baseline = matched.vartheta(0) * matched.baseline_lambda();
  const double mean = marginal_mean(matched, 0);
  const double want_baseline = vartheta1 * eta;
  const double want_mean = vartheta1 * (eta + 1.5);
  return {std::fabs(baseline - want_baseline) / want_baseline,
          std::fabs(mean - want_mean) / want_mean};
}

}  // namespace hbi
