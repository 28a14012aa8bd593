#include "hbi/error.hpp"
#include "hbi/ias.hpp"
#include "hbi/sampler.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace hbi;

namespace {

const Benchmark& benchmark() {
  static const Benchmark bm = build_problem(DeconvolutionConfig{});
  return bm;
}

std::vector<Hypermodel> table_models() {
  return {Hypermodel(1.0, 1.501, 0.05), match_hyperparameters(0.5, 1.501, 0.05),
          match_hyperparameters(-0.5, 1.501, 0.05), match_hyperparameters(-1.0, 1.501, 0.05)};
}

ReparamPoint gaussian_point(std::size_t n, ChainRng& rng) {
  ReparamPoint p{Vector(static_cast<Eigen::Index>(n)), Vector(static_cast<Eigen::Index>(n))};
  for (auto& x : p.v) x = rng.normal();
  for (auto& x : p.tau) x = rng.normal();
  return p;
}

double rayleigh_cdf(double r) { return 1.0 - std::exp(-0.5 * r * r); }

}  // namespace

TEST_CASE("reparametrization special points") {
  Vector xi(2), lam(2);
  xi << 0.0, 2.0;
  lam << 1.0, 4.0;
  const ReparamPoint p = to_reparam(xi, lam, 1.0);
  CHECK(p.v[0] == 0.0);
  CHECK(p.tau[0] == doctest::Approx(std::sqrt(2.0)));
  CHECK(p.v[1] == doctest::Approx(1.0));
  CHECK(p.tau[1] == doctest::Approx(std::sqrt(8.0)));
  lam[0] = 0.0;
  CHECK_THROWS_AS(to_reparam(xi, lam, 1.0), DomainError);

  const ReparamPoint unit{Vector::Ones(3), Vector::Constant(3, std::sqrt(2.0))};
  const ScaledPoint s = from_reparam(unit, 1.0);
  CHECK(s.lambda.isApprox(Vector::Ones(3)));
  CHECK(s.xi.isApprox(Vector::Ones(3)));
  CHECK_FALSE(s.boundary);

  const ReparamPoint q{(Vector(2) << 0.7, -1.3).finished(), (Vector(2) << 0.4, -2.0).finished()};
  const ScaledPoint inv = from_reparam(q, -1.0);
  for (int j = 0; j < 2; ++j) CHECK(inv.xi[j] == doctest::Approx(std::sqrt(2.0) * q.v[j] / std::fabs(q.tau[j])));
  const ScaledPoint gam = from_reparam(q, 1.0);
  for (int j = 0; j < 2; ++j) {
    CHECK(std::sqrt(0.05) * gam.xi[j] == doctest::Approx(std::sqrt(0.05) * q.v[j] * std::fabs(q.tau[j]) / std::sqrt(2.0)));
    CHECK(0.05 * gam.lambda[j] == doctest::Approx(0.05 * q.tau[j] * q.tau[j] / 2.0));
  }
}

TEST_CASE("boundary points") {
  const ReparamPoint p{Vector::Ones(2), (Vector(2) << 0.0, 1.0).finished()};
  const ScaledPoint neg = from_reparam(p, -1.0);
  CHECK(neg.boundary);
  CHECK(std::isinf(neg.lambda[0]));
  const ScaledPoint pos = from_reparam(p, 1.0);
  CHECK(pos.boundary);
  CHECK(pos.lambda[0] == 0.0);
  CHECK(pos.xi[0] == 0.0);
  CHECK_THROWS_AS(jacobian_logdet(1.0, 0.0, 1.0), DomainError);
}

TEST_CASE("round trip through the reparametrization") {
  ChainRng rng(3);
  for (double r : {1.0, 0.5, -0.5, -1.0}) {
    Vector xi(50), lam(50);
    for (Eigen::Index j = 0; j < 50; ++j) {
      xi[j] = 3.0 * rng.normal();
      lam[j] = std::exp(2.0 * rng.normal());
    }
    const ScaledPoint back = from_reparam(to_reparam(xi, lam, r), r);
    CHECK(((back.xi - xi).array().abs() <= 1e-12 * xi.array().abs().max(1.0)).all());
    CHECK(((back.lambda - lam).array().abs() <= 1e-12 * lam.array()).all());
  }
}

TEST_CASE("Jacobian log-determinant") {
  CHECK(jacobian_logdet(0.3, std::sqrt(2.0), 1.0) == doctest::Approx(0.5 * std::log(2.0)));
  CHECK(jacobian_logdet(0.3, 1.0, -1.0) == doctest::Approx(2.5 * std::log(2.0)));

  SUBCASE("matches a central-difference Jacobian") {
    ChainRng rng(17);
    for (double r : {1.0, 0.5, -0.5, -1.0, 0.8, -2.0}) {
      for (int trial = 0; trial < 20; ++trial) {
        const double v = rng.normal();
        double tau = rng.normal();
        if (std::fabs(tau) < 0.2) tau = std::copysign(0.2, tau);
        const auto map = [&](double vv, double tt) {
          const ScaledPoint s = from_reparam({Vector::Constant(1, vv), Vector::Constant(1, tt)}, r);
          return std::pair{s.lambda[0], s.xi[0]};
        };
        const double eps = 1e-6;
        const auto [lt_p, xt_p] = map(v, tau + eps);
        const auto [lt_m, xt_m] = map(v, tau - eps);
        const auto [lv_p, xv_p] = map(v + eps, tau);
        const auto [lv_m, xv_m] = map(v - eps, tau);
        const double det = ((lt_p - lt_m) * (xv_p - xv_m) - (lv_p - lv_m) * (xt_p - xt_m)) / (4 * eps * eps);
        CHECK(std::fabs(det) == doctest::Approx(std::exp(jacobian_logdet(v, tau, r))).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("potential") {
  const auto& prob = benchmark().problem;
  for (const auto& hm : table_models()) {
    LinearPotential phi(prob, hm);
    const ReparamPoint p{Vector::Zero(128), Vector::Ones(128)};
    CHECK(phi(p) == doctest::Approx(0.5 * prob.b_hat().squaredNorm()));
    ReparamPoint z = p;
    z.tau[5] = 0.0;
    CHECK(std::isinf(phi(z)));
  }

  SUBCASE("agrees with the explicit formulas for the four models") {
    const auto models = table_models();
    ChainRng rng(8);
    const Vector vt = Vector::Ones(128);
    for (int trial = 0; trial < 10; ++trial) {
      const ReparamPoint p = gaussian_point(128, rng);
      const Vector a = p.tau.cwiseAbs();
      const Vector args[4] = {
          (p.v.array() * a.array()).matrix() / std::sqrt(2.0),
          (p.v.array() * a.array().square()).matrix() / 2.0,
          2.0 * (p.v.array() / a.array().square()).matrix(),
          std::sqrt(2.0) * (p.v.array() / a.array()).matrix(),
      };
      for (int i = 0; i < 4; ++i) {
        const Hypermodel& hm = models[static_cast<std::size_t>(i)];
        const Vector x = std::sqrt(hm.vartheta(0)) * args[i];
        const double expected = 0.5 * (prob.b_hat() - prob.a_hat() * x).squaredNorm() -
                                (2.0 * hm.beta() - 1.0) * a.array().log().sum();
        LinearPotential phi(prob, hm);
        CHECK(phi(p) == doctest::Approx(expected).epsilon(1e-12));
      }
    }
  }

  SUBCASE("reference Gaussian times exp(-Phi) is the transformed posterior") {
    ChainRng rng(21);
    for (const auto& hm : table_models()) {
      CAPTURE(hm.r());
      LinearPotential phi(prob, hm);
      double offset = 0.0;
      for (int trial = 0; trial < 100; ++trial) {
        const ReparamPoint p = gaussian_point(128, rng);
        const double lhs = -phi(p) - 0.5 * p.v.squaredNorm() - 0.5 * p.tau.squaredNorm();
        const ScaledPoint s = from_reparam(p, hm.r());
        double logj = 0.0;
        for (Eigen::Index j = 0; j < 128; ++j) logj += jacobian_logdet(p.v[j], p.tau[j], hm.r());
        const double rhs = logj - gibbs_energy(s.xi, s.lambda, prob, hm);
        if (trial == 0) offset = lhs - rhs;
        CHECK(std::fabs(lhs - rhs - offset) <= 1e-10 * std::max(1.0, std::fabs(lhs)));
      }
    }
  }
}

TEST_CASE("seeded streams are reproducible and distinct") {
  ChainRng a(5), b(5), c(6);
  for (int i = 0; i < 10; ++i) {
    const double x = a.normal();
    CHECK(x == b.normal());
    CHECK(x != c.normal());
  }
  std::uint64_t s1 = 0, s2 = 0;
  CHECK(splitmix64(s1) == splitmix64(s2));
  CHECK(splitmix64(s1) != 0);
}

TEST_CASE("chain configuration") {
  ChainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.h = 1.0;
  CHECK_NOTHROW(cfg.validate());
  cfg.h = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.h = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.kernel = KernelKind::radial_pcn;
  cfg.h = 3.0;
  CHECK_NOTHROW(cfg.validate());
  cfg.k = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.thin = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.total_steps = 1050;
  cfg.thin = 100;
  CHECK(cfg.stored_steps() == 10);
  CHECK(parse_kernel("radial_pcn") == KernelKind::radial_pcn);
  CHECK(kernel_name(KernelKind::pcn) == "pcn");
  CHECK_THROWS_AS(parse_kernel("mala"), ConfigError);
}

TEST_CASE("pCN with zero potential preserves the standard Gaussian") {
  ZeroPotential zero;
  ChainRng init_rng(100);
  const ReparamPoint init = gaussian_point(128, init_rng);
  ChainConfig cfg;
  cfg.h = 0.5;
  cfg.total_steps = 100000;
  cfg.thin = 1;
  cfg.seed = 77;
  const SampleSet s = run_chain(init, cfg, zero);
  CHECK(s.accept_count == s.total_proposals);
  CHECK(s.stored() == 100000);
  int bad = 0;
  for (Eigen::Index c = 0; c < s.draws.cols(); ++c) {
    const double mean = s.draws.col(c).mean();
    const double var = (s.draws.col(c).array() - mean).square().mean();
    bad += !(std::fabs(mean) <= 0.05 && var >= 0.9 && var <= 1.1);
  }
  CHECK(bad == 0);
}

TEST_CASE("expected squared jump of pCN") {
  ZeroPotential zero;
  ChainRng init_rng(101);
  ChainConfig cfg;
  cfg.h = 0.05;
  cfg.total_steps = 100000;
  cfg.thin = 1;
  const SampleSet s = run_chain(gaussian_point(128, init_rng), cfg, zero);
  double sum = 0.0;
  for (Eigen::Index i = 1; i < s.draws.rows(); ++i) sum += (s.draws.row(i) - s.draws.row(i - 1)).squaredNorm();
  const double expected = 2.0 * (1.0 - std::sqrt(1.0 - 0.05 * 0.05)) * 256.0;
  CHECK(expected == doctest::Approx(0.6404).epsilon(1e-3));
  CHECK(sum / static_cast<double>(s.draws.rows() - 1) == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("pCN with h = 1 proposes independent points") {
  ZeroPotential zero;
  ChainRng init_rng(3);
  ChainConfig cfg;
  cfg.h = 1.0;
  cfg.total_steps = 20000;
  cfg.thin = 1;
  const SampleSet s = run_chain(gaussian_point(4, init_rng), cfg, zero);
  const Vector x = s.draws.col(0);
  const double mean = x.mean();
  double c0 = 0.0, c1 = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) c0 += (x[i] - mean) * (x[i] - mean);
  for (Eigen::Index i = 1; i < x.size(); ++i) c1 += (x[i] - mean) * (x[i - 1] - mean);
  CHECK(std::fabs(c1 / c0) < 0.03);
}

TEST_CASE("pCN proposal is reversible with respect to the Gaussian reference") {
  ChainRng rng(4);
  const double h = 0.3, keep = std::sqrt(1.0 - h * h);
  for (int trial = 0; trial < 50; ++trial) {
    const ReparamPoint x = gaussian_point(6, rng);
    const ReparamPoint y = gaussian_point(6, rng);
    const auto log_q = [&](const ReparamPoint& to, const ReparamPoint& from) {
      return -0.5 * ((to.v - keep * from.v).squaredNorm() + (to.tau - keep * from.tau).squaredNorm()) / (h * h);
    };
    const auto log_pi = [](const ReparamPoint& p) { return -0.5 * (p.v.squaredNorm() + p.tau.squaredNorm()); };
    CHECK(std::fabs(log_q(y, x) + log_pi(x) - log_q(x, y) - log_pi(y)) < 1e-10);
  }
}

TEST_CASE("radial move edge cases") {
  ChainRng rng(9);
  const ReparamPoint x = gaussian_point(16, rng);
  detail::StepWorkspace ws;
  detail::propose_radial(x, 0.4, 0.0, rng, ws);
  for (Eigen::Index j = 0; j < 16; ++j)
    CHECK(std::hypot(ws.proposal.tau[j], ws.proposal.v[j]) == doctest::Approx(std::hypot(x.tau[j], x.v[j])).epsilon(1e-14));

  std::vector<double> radii;
  for (int rep = 0; rep < 2000; ++rep) {
    detail::propose_radial(x, 0.4, 1.0, rng, ws);
    radii.push_back(std::hypot(ws.proposal.tau[0], ws.proposal.v[0]));
  }
  CHECK(oracle::ks_pvalue(radii, rayleigh_cdf) > 0.01);
}

TEST_CASE("radial-angular kernel with zero potential keeps Rayleigh radius and uniform angle") {
  ZeroPotential zero;
  ChainRng init_rng(200);
  ChainConfig cfg;
  cfg.kernel = KernelKind::radial_pcn;
  cfg.h = 0.5;
  cfg.k = 0.5;
  cfg.total_steps = 100000;
  cfg.thin = 100;
  cfg.seed = 31;
  const ReparamPoint init = gaussian_point(8, init_rng);
  const SampleSet s = run_chain(init, cfg, zero);
  std::vector<double> radius, angle;
  for (std::size_t i = 0; i < s.stored(); ++i) {
    const ReparamPoint p = s.draw(i);
    for (Eigen::Index j = 0; j < 8; ++j) {
      radius.push_back(std::hypot(p.tau[j], p.v[j]));
      angle.push_back(std::atan2(p.v[j], p.tau[j]));
    }
  }
  CHECK(oracle::ks_pvalue(radius, rayleigh_cdf) > 0.01);
  CHECK(oracle::ks_pvalue(angle, [](double a) { return (a + std::numbers::pi) / (2 * std::numbers::pi); }) > 0.01);
}

TEST_CASE("chains on the benchmark") {
  const auto& prob = benchmark().problem;
  const Hypermodel hm(1.0, 1.501, 0.05);
  const IASResult map = ias_run(prob, hm, Vector::Ones(128));
  const ReparamPoint init = to_reparam(map.final_state().xi, map.final_state().lambda, 1.0);
  ChainConfig cfg;
  cfg.total_steps = 3000;
  cfg.thin = 10;
  cfg.seed = 5;

  SUBCASE("deterministic and storing every thin-th state") {
    const SampleSet a = run_chain(init, cfg, prob, hm);
    const SampleSet b = run_chain(init, cfg, prob, hm);
    CHECK(a.draws == b.draws);
    CHECK(a.accept_count == b.accept_count);
    CHECK(a.stored() == 300);
    CHECK(a.total_proposals == 3000);
    CHECK(a.accept_count <= a.total_proposals);
  }
  SUBCASE("stored potentials match recomputation") {
    cfg.kernel = KernelKind::radial_pcn;
    cfg.h = 0.01;
    const SampleSet s = run_chain(init, cfg, prob, hm);
    LinearPotential phi(prob, hm);
    for (std::size_t i = 0; i < s.stored(); i += 17) CHECK(phi(s.draw(i)) == doctest::Approx(s.phi[static_cast<Eigen::Index>(i)]).epsilon(1e-13));
  }
  SUBCASE("tiny steps barely move") {
    cfg.total_steps = 10;
    cfg.thin = 1;
    cfg.h = 1e-9;
    const SampleSet s = run_chain(init, cfg, prob, hm);
    for (std::size_t i = 0; i < s.stored(); ++i) {
      const ReparamPoint p = s.draw(i);
      CHECK((p.v - init.v).norm() < 1e-6);
      CHECK((p.tau - init.tau).norm() < 1e-6);
    }
  }
  SUBCASE("invalid initial points are rejected") {
    ReparamPoint bad = init;
    bad.tau[2] = 0.0;
    CHECK_THROWS_AS(run_chain(bad, cfg, prob, hm), DomainError);
    bad = init;
    bad.v[0] = NAN;
    CHECK_THROWS_AS(run_chain(bad, cfg, prob, hm), DomainError);
  }
  SUBCASE("physical draws") {
    const SampleSet s = run_chain(init, cfg, prob, hm);
    const PhysicalDraws ph = samples_to_physical(s, Vector::Constant(128, 0.05), 1.0);
    CHECK(ph.x.rows() == 300);
    CHECK(std::count(ph.excluded.begin(), ph.excluded.end(), 1) == 0);
    for (Eigen::Index i = 0; i < 300; i += 50) {
      CHECK((ph.z.row(i).transpose() - integrate_increments(ph.x.row(i).transpose())).norm() < 1e-12);
    }
  }
}

TEST_CASE("physical conversion of special draws") {
  SampleSet s;
  s.draws = Matrix(2, 2);
  s.draws << 1.0, std::sqrt(2.0), 0.0, 0.0;
  const PhysicalDraws ph = samples_to_physical(s, Vector::Constant(1, 0.05), 1.0);
  CHECK(ph.x(0, 0) == doctest::Approx(std::sqrt(0.05)));
  CHECK(ph.theta(0, 0) == doctest::Approx(0.05));
  CHECK(ph.excluded[0] == 0);
  CHECK(ph.excluded[1] == 1);
  CHECK(ph.x(1, 0) == 0.0);

  const Hypermodel hm = match_hyperparameters(-0.5, 1.501, 0.05);
  const auto& prob = benchmark().problem;
  const HybridResult map = hybrid_run(prob, {Hypermodel(1.0, 1.501, 0.05), hm, 0.005, 500});
  const auto& fs = map.final_state();
  SampleSet one;
  const ReparamPoint p = to_reparam(fs.xi, fs.lambda, -0.5);
  one.draws = Matrix(1, 256);
  one.draws.row(0).head(128) = p.v.transpose();
  one.draws.row(0).tail(128) = p.tau.transpose();
  const PhysicalDraws back = samples_to_physical(one, hm.vartheta_vector(128), -0.5);
  const Vector x = std::sqrt(hm.vartheta(0)) * fs.xi;
  const Vector theta = hm.vartheta(0) * fs.lambda;
  CHECK(((back.x.row(0).transpose() - x).array().abs() <= 1e-12 * x.array().abs().max(1e-300)).all());
  CHECK(((back.theta.row(0).transpose() - theta).array().abs() <= 1e-12 * theta.array()).all());
}

TEST_CASE("potential agrees across kernel variants") {
  const auto& prob = benchmark().problem;
  const kernels::Isa before = kernels::active().isa;
  ChainRng rng(12);
  std::vector<ReparamPoint> points;
  for (int i = 0; i < 20; ++i) points.push_back(gaussian_point(128, rng));
  for (const auto& hm : table_models()) {
    kernels::select(kernels::Isa::scalar);
    LinearPotential ref(prob, hm);
    std::vector<double> expected;
    for (const auto& p : points) expected.push_back(ref(p));
    for (kernels::Isa isa : {kernels::Isa::avx2, kernels::Isa::neon}) {
      if (!kernels::select(isa)) continue;
      LinearPotential phi(prob, hm);
      for (std::size_t i = 0; i < points.size(); ++i)
        CHECK(phi(points[i]) == doctest::Approx(expected[i]).epsilon(1e-12));
    }
  }
  kernels::select(before);
}
