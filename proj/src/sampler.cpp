#include "hbi/sampler.hpp"

#include "hbi/error.hpp"

#include <string>

namespace hbi {

ReparamPoint to_reparam(const Vector& xi, const Vector& lambda, double r) {
  if (xi.size() != lambda.size()) throw DimensionError("to_reparam: xi and lambda sizes differ");
  ReparamPoint p{Vector(xi.size()), Vector(xi.size())};
  for (Eigen::Index j = 0; j < xi.size(); ++j) {
    if (!(lambda[j] > 0.0))
      throw DomainError("to_reparam: lambda[" + std::to_string(j) + "] must be positive");
    p.v[j] = xi[j] / std::sqrt(lambda[j]);
    p.tau[j] = std::sqrt(2.0 * std::pow(lambda[j], r));
  }
  return p;
}

ScaledPoint from_reparam(const ReparamPoint& p, double r) {
  if (p.v.size() != p.tau.size()) throw DimensionError("from_reparam: v and tau sizes differ");
  ScaledPoint out{Vector(p.v.size()), Vector(p.v.size()), false};
  const double inv_r = 1.0 / r;
  const double prefactor = std::pow(2.0, -0.5 * inv_r);
  for (Eigen::Index j = 0; j < p.v.size(); ++j) {
    const double a = std::fabs(p.tau[j]);
    if (a == 0.0) {
      out.boundary = true;
      out.lambda[j] = r < 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
      out.xi[j] = r < 0.0 ? std::numeric_limits<double>::quiet_NaN() : 0.0;
      continue;
    }
    out.lambda[j] = std::pow(0.5 * a * a, inv_r);
    out.xi[j] = p.v[j] * std::pow(a, inv_r) * prefactor;
  }
  return out;
}

double jacobian_logdet(double /*v*/, double tau, double r) {
  if (tau == 0.0 || !std::isfinite(tau)) throw DomainError("jacobian_logdet: tau must be nonzero");
  return (1.0 - 1.5 / r) * std::log(2.0) - std::log(std::fabs(r)) +
         (3.0 / r - 1.0) * std::log(std::fabs(tau));
}

LinearPotential::LinearPotential(const InverseProblem& prob, const Hypermodel& hm)
    : forward_(prob.a_hat()),
      b_hat_(prob.b_hat()),
      exponent_(1.0 / hm.r()),
      log_weight_(2.0 * hm.beta() - 1.0),
      u_(static_cast<Eigen::Index>(prob.n())),
      y_(static_cast<Eigen::Index>(prob.m())) {
  const Vector vartheta = hm.vartheta_vector(prob.n());
  const double prefactor = std::pow(2.0, -0.5 * exponent_);
  for (Eigen::Index k = 0; k < forward_.cols(); ++k)
    forward_.col(k) *= prefactor * std::sqrt(vartheta[k]);
}

double LinearPotential::misfit(const ReparamPoint& p) {
  if (p.v.size() != forward_.cols() || p.tau.size() != forward_.cols())
    throw DimensionError("potential: point dimension does not match the forward map");
  kernels::power_product(detail::span_of(p.v), detail::span_of(p.tau), exponent_,
                         detail::span_of(u_));
  kernels::gemv({forward_.data(), static_cast<std::size_t>(forward_.size())},
                static_cast<std::size_t>(forward_.rows()), static_cast<std::size_t>(forward_.cols()),
                detail::span_of(std::as_const(u_)), detail::span_of(y_));
  return 0.5 * kernels::residual_sq_norm(detail::span_of(b_hat_), detail::span_of(std::as_const(y_)));
}

double LinearPotential::operator()(const ReparamPoint& p) {
  double log_sum = 0.0;
  for (Eigen::Index j = 0; j < p.tau.size(); ++j) {
    const double a = std::fabs(p.tau[j]);
    if (a == 0.0) return std::numeric_limits<double>::infinity();
    log_sum += std::log(a);
  }
  return misfit(p) - log_weight_ * log_sum;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {
std::vector<std::uint32_t> seed_words(std::uint64_t seed) {
  std::uint64_t state = seed;
  std::vector<std::uint32_t> words;
  for (int i = 0; i < 4; ++i) {
    const std::uint64_t x = splitmix64(state);
    words.push_back(static_cast<std::uint32_t>(x));
    words.push_back(static_cast<std::uint32_t>(x >> 32));
  }
  return words;
}
}  // namespace

ChainRng::ChainRng(std::uint64_t seed) {
  const std::vector<std::uint32_t> words = seed_words(seed);
  std::seed_seq seq(words.begin(), words.end());
  engine_.seed(seq);
}

std::string_view kernel_name(KernelKind kind) {
  return kind == KernelKind::pcn ? "pcn" : "radial_pcn";
}

KernelKind parse_kernel(std::string_view name) {
  if (name == "pcn") return KernelKind::pcn;
  if (name == "radial_pcn") return KernelKind::radial_pcn;
  throw ConfigError("unknown kernel '" + std::string(name) + "' (expected pcn or radial_pcn)");
}

void ChainConfig::validate() const {
  if (kernel == KernelKind::pcn) {
    if (!(h > 0.0 && h <= 1.0)) throw ConfigError("chain: pcn step h must lie in (0, 1]");
  } else {
    if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("chain: angular step h must be positive");
    if (!(k > 0.0 && k < 1.0)) throw ConfigError("chain: radial step k must lie in (0, 1)");
  }
  if (thin < 1) throw ConfigError("chain: thin must be at least 1");
  if (total_steps < 0) throw ConfigError("chain: total_steps must be non-negative");
}

ReparamPoint SampleSet::draw(std::size_t i) const {
  const auto nn = static_cast<Eigen::Index>(n());
  const auto row = static_cast<Eigen::Index>(i);
  return {draws.row(row).head(nn).transpose(), draws.row(row).tail(nn).transpose()};
}

void check_chain_init(const ReparamPoint& init, double phi) {
  if (init.v.size() != init.tau.size()) throw DimensionError("chain init: v and tau sizes differ");
  if (!init.v.allFinite() || !init.tau.allFinite())
    throw DomainError("chain init: non-finite coordinates");
  if (!std::isfinite(phi)) throw DomainError("chain init: potential is not finite at the initial point");
}

SampleSet run_chain(const ReparamPoint& init, const ChainConfig& cfg, const InverseProblem& prob,
                    const Hypermodel& hm) {
  LinearPotential potential(prob, hm);
  return run_chain(init, cfg, potential);
}

PhysicalDraws samples_to_physical(const SampleSet& samples, const Vector& vartheta, double r) {
  const auto n = static_cast<Eigen::Index>(samples.n());
  if (vartheta.size() != n) throw DimensionError("samples_to_physical: vartheta size mismatch");
  const auto rows = static_cast<Eigen::Index>(samples.stored());
  PhysicalDraws out{Matrix(rows, n), Matrix(rows, n), Matrix(rows, n),
                    std::vector<std::uint8_t>(static_cast<std::size_t>(rows), 0)};
  const Vector sd = vartheta.array().sqrt();
  for (Eigen::Index i = 0; i < rows; ++i) {
    const ScaledPoint s = from_reparam(samples.draw(static_cast<std::size_t>(i)), r);
    const Vector x = (sd.array() * s.xi.array()).matrix();
    out.x.row(i) = x.transpose();
    out.theta.row(i) = (vartheta.array() * s.lambda.array()).matrix().transpose();
    out.z.row(i) = integrate_increments(x).transpose();
    out.excluded[static_cast<std::size_t>(i)] = s.boundary ? 1 : 0;
  }
  return out;
}

}  // namespace hbi
