#pragma once
// Posterior sampling in the whitened coordinates (v, tau), where
//
//   v_j^2 = xi_j^2 / lambda_j,   tau_j^2 = 2 lambda_j^r,
//
// turns the scaled posterior into exp(-Phi(v, tau)) N(0, I_2n) with
//
//   Phi(v, tau) = 1/2 ||b_hat - A_hat 2^{-1/(2r)} D^{1/2} (v |tau|^{1/r})||^2
//                 - (2 beta - 1) sum log |tau_j|.
//
// Two Metropolis-Hastings kernels preserve the Gaussian reference measure,
// so the acceptance probability only involves Phi:
//   * pCN:         y = sqrt(1 - h^2) x + h w
//   * radial pCN:  per pair (tau_j, v_j) a pCN move on the polar radius and a
//                  Gaussian random walk on the phase angle.

#include "hbi/forward.hpp"
#include "hbi/hypermodel.hpp"
#include "hbi/kernels.hpp"

#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace hbi {

struct ReparamPoint {
  Vector v;
  Vector tau;

  std::size_t size() const { return static_cast<std::size_t>(v.size()); }
};

ReparamPoint to_reparam(const Vector& xi, const Vector& lambda, double r);

struct ScaledPoint {
  Vector xi;
  Vector lambda;      // +inf where tau_j = 0 and r < 0, 0 where tau_j = 0 and r > 0
  bool boundary = false;  // some tau_j = 0: zero posterior density
};

ScaledPoint from_reparam(const ReparamPoint& p, double r);

// log |det d(lambda_j, xi_j)/d(tau_j, v_j)|
//   = log(2^{1 - 3/(2r)} / |r|) + (3/r - 1) log |tau_j|.
double jacobian_logdet(double v, double tau, double r);

template <class P>
concept Potential = requires(P& p, const ReparamPoint& x) {
  { p(x) } -> std::convertible_to<double>;
};

// Phi for the linear forward map.  Holds scratch buffers, so each chain needs
// its own instance; the problem it was built from is not referenced later.
class LinearPotential {
 public:
  LinearPotential(const InverseProblem& prob, const Hypermodel& hm);

  double operator()(const ReparamPoint& p);

  // ||b_hat - f(...)||^2 / 2 alone.
  double misfit(const ReparamPoint& p);

 private:
  Matrix forward_;  // 2^{-1/(2r)} A_hat D_vartheta^{1/2}
  Vector b_hat_;
  double exponent_;    // 1/r
  double log_weight_;  // 2 beta - 1
  Vector u_;
  Vector y_;
};

// Phi = 0: the chain then targets N(0, I_2n) exactly.
struct ZeroPotential {
  double operator()(const ReparamPoint&) const { return 0.0; }
};

// One stream per chain, derived from a 64-bit seed through splitmix64.
class ChainRng {
 public:
  explicit ChainRng(std::uint64_t seed);

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  void fill_normal(std::span<double> out) {
    for (double& x : out) x = normal_(engine_);
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t& state);

enum class KernelKind { pcn, radial_pcn };

std::string_view kernel_name(KernelKind kind);
KernelKind parse_kernel(std::string_view name);  // ConfigError on unknown names

struct ChainConfig {
  KernelKind kernel = KernelKind::pcn;
  double h = 0.05;
  double k = 0.05;  // radial step, radial_pcn only
  long total_steps = 1'000'000;
  long thin = 100;
  std::uint64_t seed = 1;

  // pcn: 0 < h <= 1.  radial_pcn: h > 0, 0 < k < 1.  thin >= 1, total_steps >= 0.
  void validate() const;
  long stored_steps() const { return total_steps / thin; }
};

struct ChainState {
  ReparamPoint point;
  double phi = 0.0;
};

struct Transition {
  ChainState next;
  bool accepted = false;
};

struct SampleSet {
  Matrix draws;  // stored_steps x 2n, each row (v_1..v_n, tau_1..tau_n)
  Vector phi;    // Phi at each stored draw
  long accept_count = 0;
  long total_proposals = 0;
  ChainConfig config;
  ReparamPoint init;

  std::size_t n() const { return static_cast<std::size_t>(draws.cols() / 2); }
  std::size_t stored() const { return static_cast<std::size_t>(draws.rows()); }
  double acceptance_rate() const {
    return total_proposals == 0 ? 0.0 : static_cast<double>(accept_count) / total_proposals;
  }
  ReparamPoint draw(std::size_t i) const;
};

struct PhysicalDraws {
  Matrix x;      // D^{1/2} xi
  Matrix theta;  // D lambda
  Matrix z;      // L^{-1} x
  std::vector<std::uint8_t> excluded;  // 1 where the draw sits on the tau_j = 0 boundary
};

PhysicalDraws samples_to_physical(const SampleSet& samples, const Vector& vartheta, double r);

namespace detail {

// Reusable buffers for the in-place kernels.
struct StepWorkspace {
  ReparamPoint proposal;
  Vector noise;

  void resize(std::size_t n, std::size_t noise_size) {
    const auto nn = static_cast<Eigen::Index>(n);
    proposal.v.resize(nn);
    proposal.tau.resize(nn);
    noise.resize(static_cast<Eigen::Index>(noise_size));
  }
};

inline std::span<double> span_of(Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}
inline std::span<const double> span_of(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

inline void propose_pcn(const ReparamPoint& x, double h, ChainRng& rng, StepWorkspace& ws) {
  const std::size_t n = x.size();
  ws.resize(n, 2 * n);
  rng.fill_normal(span_of(ws.noise));
  const double keep = std::sqrt(1.0 - h * h);
  auto noise = span_of(std::as_const(ws.noise));
  kernels::axpby(keep, span_of(x.v), h, noise.first(n), span_of(ws.proposal.v));
  kernels::axpby(keep, span_of(x.tau), h, noise.subspan(n, n), span_of(ws.proposal.tau));
}

inline void propose_radial(const ReparamPoint& x, double h, double k, ChainRng& rng,
                           StepWorkspace& ws) {
  const std::size_t n = x.size();
  ws.resize(n, 3 * n);
  rng.fill_normal(span_of(ws.noise));
  const double keep = std::sqrt(1.0 - k * k);
  for (std::size_t j = 0; j < n; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double tau = x.tau[jj];
    const double v = x.v[jj];
    const double w1 = ws.noise[static_cast<Eigen::Index>(3 * j)];
    const double w2 = ws.noise[static_cast<Eigen::Index>(3 * j + 1)];
    const double omega = ws.noise[static_cast<Eigen::Index>(3 * j + 2)];
    // Norm form of ((1-k^2) r^2 + 2k sqrt(1-k^2) r w1 + k^2 |w|^2)^{1/2}.
    const double radius = std::hypot(keep * std::hypot(tau, v) + k * w1, k * w2);
    const double angle = std::atan2(v, tau) + h * omega;
    ws.proposal.tau[jj] = radius * std::cos(angle);
    ws.proposal.v[jj] = radius * std::sin(angle);
  }
}

// Accept with probability min(1, exp(phi_current - phi_proposal)).  Always
// consumes exactly one uniform so the stream layout does not depend on Phi.
inline bool accept(double phi_current, double phi_proposal, ChainRng& rng) {
  const double u = rng.uniform();
  return std::log(u) < phi_current - phi_proposal;
}

template <Potential P>
bool finish_step(ChainState& state, StepWorkspace& ws, P& potential, ChainRng& rng) {
  const double phi_y = static_cast<double>(potential(std::as_const(ws.proposal)));
  if (!accept(state.phi, phi_y, rng)) return false;
  std::swap(state.point, ws.proposal);
  state.phi = phi_y;
  return true;
}

}  // namespace detail

template <Potential P>
Transition pcn_step(const ChainState& current, double h, P& potential, ChainRng& rng) {
  detail::StepWorkspace ws;
  Transition out{current, false};
  detail::propose_pcn(current.point, h, rng, ws);
  out.accepted = detail::finish_step(out.next, ws, potential, rng);
  return out;
}

template <Potential P>
Transition radial_pcn_step(const ChainState& current, double h, double k, P& potential,
                           ChainRng& rng) {
  detail::StepWorkspace ws;
  Transition out{current, false};
  detail::propose_radial(current.point, h, k, rng, ws);
  out.accepted = detail::finish_step(out.next, ws, potential, rng);
  return out;
}

void check_chain_init(const ReparamPoint& init, double phi);

template <Potential P>
SampleSet run_chain(const ReparamPoint& init, const ChainConfig& cfg, P& potential) {
  cfg.validate();
  const double phi0 = static_cast<double>(potential(init));
  check_chain_init(init, phi0);

  const std::size_t n = init.size();
  const auto stored = static_cast<Eigen::Index>(cfg.stored_steps());
  SampleSet out;
  out.config = cfg;
  out.init = init;
  out.draws.resize(stored, static_cast<Eigen::Index>(2 * n));
  out.phi.resize(stored);

  ChainRng rng(cfg.seed);
  ChainState state{init, phi0};
  detail::StepWorkspace ws;
  Eigen::Index row = 0;
  for (long step = 1; step <= cfg.total_steps; ++step) {
    if (cfg.kernel == KernelKind::pcn)
      detail::propose_pcn(state.point, cfg.h, rng, ws);
    else
      detail::propose_radial(state.point, cfg.h, cfg.k, rng, ws);
    if (detail::finish_step(state, ws, potential, rng)) ++out.accept_count;
    ++out.total_proposals;
    if (step % cfg.thin == 0 && row < stored) {
      const auto nn = static_cast<Eigen::Index>(n);
      out.draws.row(row).head(nn) = state.point.v.transpose();
      out.draws.row(row).tail(nn) = state.point.tau.transpose();
      out.phi[row] = state.phi;
      ++row;
    }
  }
  return out;
}

SampleSet run_chain(const ReparamPoint& init, const ChainConfig& cfg, const InverseProblem& prob,
                    const Hypermodel& hm);

}  // namespace hbi
