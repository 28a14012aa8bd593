#pragma once
// Generalized gamma hyperprior on the prior variances theta_j,
//
//   pi(theta_j) = |r| / (Gamma(beta) vartheta_j) (theta_j/vartheta_j)^(r beta - 1)
//                 exp(-(theta_j/vartheta_j)^r),
//
// together with the per-component variance updates of the alternating MAP
// solver and the rule that matches a hypermodel with r != 1 to a gamma
// (r = 1) reference model.

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <vector>

namespace hbi {

using Vector = Eigen::VectorXd;

class Hypermodel {
 public:
  // Throws DomainError unless r != 0, beta > 0 and every vartheta_j > 0.
  Hypermodel(double r, double beta, double vartheta);
  Hypermodel(double r, double beta, Vector vartheta);

  double r() const { return r_; }
  double beta() const { return beta_; }

  // Scalar vartheta is broadcast to every component.
  bool scalar_scale() const { return vartheta_.size() == 1; }
  double vartheta(std::size_t j) const {
    return scalar_scale() ? vartheta_[0] : vartheta_[static_cast<Eigen::Index>(j)];
  }
  const Vector& vartheta_raw() const { return vartheta_; }
  Vector vartheta_vector(std::size_t n) const;

  // r beta - 3/2, the coefficient of log(lambda) in the Gibbs energy.
  double log_coefficient() const { return r_ * beta_ - 1.5; }

  // beta - 3/(2r); must be positive for the variance update to exist.
  double baseline_base() const { return beta_ - 1.5 / r_; }

  // lambda at xi = 0, i.e. (beta - 3/(2r))^(1/r).
  double baseline_lambda() const;

  // Throws DomainError if beta - 3/(2r) <= 0.
  void require_map_compatible() const;

 private:
  double r_;
  double beta_;
  Vector vartheta_;
};

// log density of the generalized gamma at theta > 0 with scale vartheta_j.
double gg_log_pdf(double theta, const Hypermodel& hm, std::size_t j = 0);

// E[theta_j] = vartheta_j Gamma(beta + 1/r) / Gamma(beta).  DomainError if
// beta + 1/r <= 0 (infinite mean).
double marginal_mean(const Hypermodel& hm, std::size_t j = 0);
Vector marginal_means(const Hypermodel& hm, std::size_t n);

// Closed-form minimizer of xi^2/(2 lambda) + lambda^r - (r beta - 3/2) log lambda
// for r = 1 (gamma) and r = -1 (inverse gamma).
double lambda_update_closed(double xi, const Hypermodel& hm);

// phi(t) at each point of an ascending, non-negative sequence, where phi solves
//   phi'(t) = 2 t phi / (2 r^2 phi^(r+1) + t^2),  phi(0) = (beta - 3/(2r))^(1/r).
// Integrated with classical RK4; substeps never exceed 1e-3 in t and are
// further shortened near the origin where phi varies on the scale
// sqrt(2 r^2 phi^(r+1)).
std::vector<double> lambda_update_ode(std::span<const double> xi_abs_sorted,
                                      const Hypermodel& hm);

// Componentwise update for arbitrary xi: closed form when r = +-1, otherwise
// sort |xi|, integrate, and scatter back.
Vector lambda_update(const Vector& xi, const Hypermodel& hm);

// d/dlambda [xi^2/(2 lambda) + lambda^r - (r beta - 3/2) log lambda].
double optimality_residual(double xi, double lambda, const Hypermodel& hm);

// Build the hypermodel with shape exponent r_target whose baseline variance
// (value at x_j = 0) and marginal mean both agree with the gamma reference
// model (r = 1, beta1, vartheta1).  Requires eta = beta1 - 3/2 > 0.
Hypermodel match_hyperparameters(double r_target, double beta1, double vartheta1);

struct CompatibilityResiduals {
  double baseline;  // relative mismatch of vartheta (beta - 3/(2r))^(1/r)
  double mean;      // relative mismatch of the marginal means
};
CompatibilityResiduals compatibility_residuals(const Hypermodel& matched,
                                               double beta1, double vartheta1);

}  // namespace hbi
