#pragma once
// Iterative alternating sequential (IAS) MAP solver for the scaled posterior
//
//   E(xi, lambda) = 1/2 ||b_hat - A_hat D^{1/2} xi||^2 + 1/2 sum xi_j^2/lambda_j
//                   + sum lambda_j^r - (r beta - 3/2) sum log lambda_j,
//
// alternating an exact least-squares xi-update with the componentwise
// lambda-update, plus the two-phase hybrid scheme that switches from the
// gamma (r = 1) model to a matched greedier model.

#include "hbi/forward.hpp"
#include "hbi/hypermodel.hpp"

#include <optional>
#include <vector>

namespace hbi {

struct IASState {
  Vector xi;
  Vector lambda;
  int iteration = 0;
  double energy = 0.0;           // E(xi^t, lambda^t)
  double energy_after_xi = 0.0;  // E(xi^t, lambda^{t-1})
  double theta_change = 0.0;     // ||theta^{t-1} - theta^t|| / ||theta^{t-1}||
};

struct IASOptions {
  double tol = 0.005;
  int max_iter = 500;
};

struct IASResult {
  std::vector<IASState> trace;  // one entry per completed iteration, t = 1, 2, ...
  bool converged = false;

  bool empty() const { return trace.empty(); }
  const IASState& final_state() const { return trace.back(); }
  int iterations() const { return static_cast<int>(trace.size()); }
};

double gibbs_energy(const Vector& xi, const Vector& lambda, const InverseProblem& prob,
                    const Hypermodel& hm);

// argmin_xi 1/2 ||b_hat - A_hat D^{1/2} xi||^2 + 1/2 sum xi_j^2/lambda_j.
// Solved for w = D_lambda^{-1/2} xi through the m x m system (A S^2 A^T + I), S = D_{vartheta lambda}^{1/2},
// then xi = D_lambda^{1/2} w.
Vector xi_update(const Vector& lambda, const InverseProblem& prob, const Vector& vartheta);

// Runs until the relative change of theta = vartheta * lambda drops below
// options.tol or options.max_iter iterations have been taken.  Hitting
// max_iter leaves converged = false.
IASResult ias_run(const InverseProblem& prob, const Hypermodel& hm, const Vector& lambda0,
                  const IASOptions& options = {});

struct HybridSchedule {
  Hypermodel phase1;                 // r = 1
  std::optional<Hypermodel> phase2;  // typically from match_hyperparameters
  double tol = 0.005;
  int max_iter = 500;

  void validate() const;
};

struct HybridResult {
  IASResult phase1;
  IASResult phase2;  // empty when the schedule has no second phase

  bool converged() const { return phase1.converged && (phase2.empty() || phase2.converged); }
  const IASState& final_state() const {
    return phase2.empty() ? phase1.final_state() : phase2.final_state();
  }
};

// Phase I starts from lambda0 (default lambda = 1, i.e. theta = vartheta).
// Phase II restarts from the final Phase I theta expressed in its own scaling.
HybridResult hybrid_run(const InverseProblem& prob, const HybridSchedule& schedule,
                        std::optional<Vector> lambda0 = std::nullopt);

}  // namespace hbi
