#include "hbi/ias.hpp"

#include "hbi/error.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <string>

namespace hbi {

namespace {

void check_dims(const Vector& v, const InverseProblem& prob, const char* what) {
  if (static_cast<std::size_t>(v.size()) != prob.n())
    throw DimensionError(std::string(what) + " has " + std::to_string(v.size()) +
                         " entries, problem has n = " + std::to_string(prob.n()));
}

void check_positive(const Vector& lambda, const char* where) {
  for (Eigen::Index j = 0; j < lambda.size(); ++j) {
    if (!(lambda[j] > 0.0))
      throw DomainError(std::string(where) + ": lambda[" + std::to_string(j) + "] must be positive");
  }
}

}  // namespace

double gibbs_energy(const Vector& xi, const Vector& lambda, const InverseProblem& prob,
                    const Hypermodel& hm) {
  check_dims(xi, prob, "xi");
  check_dims(lambda, prob, "lambda");
  check_positive(lambda, "gibbs_energy");
  const Vector vartheta = hm.vartheta_vector(prob.n());
  const Vector residual = prob.b_hat() - apply_scaled_forward(xi, prob, vartheta);
  const double r = hm.r();
  double prior = 0.0;
  for (Eigen::Index j = 0; j < xi.size(); ++j) {
    const double l = lambda[j];
    prior += 0.5 * xi[j] * xi[j] / l + std::pow(l, r) - hm.log_coefficient() * std::log(l);
  }
  return 0.5 * residual.squaredNorm() + prior;
}

Vector xi_update(const Vector& lambda, const InverseProblem& prob, const Vector& vartheta) {
  check_dims(lambda, prob, "lambda");
  check_dims(vartheta, prob, "vartheta");
  check_positive(lambda, "xi_update");
  const auto m = static_cast<Eigen::Index>(prob.m());

  // w minimizes |A S w - b|^2 + |w|^2 with S = diag(sqrt(vartheta*lambda)); push-through gives
  // w = (A S)^T (A S^2 A^T + I)^{-1} b, an m x m SPD system whose spectrum is bounded below by 1
  const Vector prior_sd = lambda.array().sqrt();
  const Matrix as = prob.a_hat() * (vartheta.array() * lambda.array()).sqrt().matrix().asDiagonal();
  Matrix gram = Matrix::Identity(m, m);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(as);
  const Eigen::LLT<Matrix> llt(gram.selfadjointView<Eigen::Lower>());
  if (llt.info() != Eigen::Success) throw NumericalError("xi_update: factorization failed");
  const Vector w = as.transpose() * llt.solve(prob.b_hat());
  return (prior_sd.array() * w.array()).matrix();
}

IASResult ias_run(const InverseProblem& prob, const Hypermodel& hm, const Vector& lambda0,
                  const IASOptions& options) {
  hm.require_map_compatible();
  check_dims(lambda0, prob, "lambda0");
  check_positive(lambda0, "ias_run");
  if (!(options.tol > 0.0)) throw DomainError("ias_run: tol must be positive");
  if (options.max_iter < 1) throw DomainError("ias_run: max_iter must be at least 1");

  const Vector vartheta = hm.vartheta_vector(prob.n());
  IASResult result;
  Vector lambda = lambda0;
  Vector theta_prev = (vartheta.array() * lambda.array()).matrix();

  for (int t = 1; t <= options.max_iter; ++t) {
    IASState state;
    state.iteration = t;
    state.xi = xi_update(lambda, prob, vartheta);
    state.energy_after_xi = gibbs_energy(state.xi, lambda, prob, hm);
    state.lambda = lambda_update(state.xi, hm);
    state.energy = gibbs_energy(state.xi, state.lambda, prob, hm);
    if (!std::isfinite(state.energy))
      throw NumericalError("ias_run: non-finite Gibbs energy at iteration " + std::to_string(t));

    const Vector theta = (vartheta.array() * state.lambda.array()).matrix();
    state.theta_change = (theta_prev - theta).norm() / theta_prev.norm();
    lambda = state.lambda;
    theta_prev = theta;
    const bool done = state.theta_change < options.tol;
    result.trace.push_back(std::move(state));
    if (done) {
      result.converged = true;
      break;
    }
  }
  return result;
}

void HybridSchedule::validate() const {
  if (phase1.r() != 1.0) throw ConfigError("hybrid schedule: phase 1 must use r = 1");
  if (!(tol > 0.0)) throw ConfigError("hybrid schedule: tol must be positive");
  if (max_iter < 1) throw ConfigError("hybrid schedule: max_iter must be at least 1");
}

HybridResult hybrid_run(const InverseProblem& prob, const HybridSchedule& schedule,
                        std::optional<Vector> lambda0) {
  schedule.validate();
  const IASOptions options{schedule.tol, schedule.max_iter};
  const auto n = static_cast<Eigen::Index>(prob.n());
  HybridResult out;
  out.phase1 = ias_run(prob, schedule.phase1, lambda0.value_or(Vector::Ones(n)), options);
  if (schedule.phase2) {
    const Vector theta = (schedule.phase1.vartheta_vector(prob.n()).array() *
                          out.phase1.final_state().lambda.array()).matrix();
    const Vector start =
        (theta.array() / schedule.phase2->vartheta_vector(prob.n()).array()).matrix();
    out.phase2 = ias_run(prob, *schedule.phase2, start, options);
  }
  return out;
}

}  // namespace hbi
