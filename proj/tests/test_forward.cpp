#include "hbi/error.hpp"
#include "hbi/forward.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace hbi;

TEST_CASE("Gaussian kernel values") {
  const DeconvolutionConfig cfg;
  CHECK(kernel_eval(0.0, cfg) == doctest::Approx(6.2));
  CHECK(kernel_eval(0.02, cfg) == doctest::Approx(6.2 * std::exp(-0.5)));
  CHECK(kernel_eval(0.2, cfg) < 1e-20);
}

TEST_CASE("grid geometry") {
  const DeconvolutionConfig cfg;
  CHECK(coarse_node(1, 128) == doctest::Approx(0.5 / 128));
  CHECK(observation_time(1, cfg) == coarse_node(1, 128));
  CHECK(observation_time(22, cfg) == coarse_node(127, 128));
  for (int j = 1; j <= cfg.m; ++j) {
    CHECK(observation_time(j, cfg) > 0.0);
    CHECK(observation_time(j, cfg) < 1.0);
  }
}

TEST_CASE("config validation names the offending field") {
  DeconvolutionConfig cfg;
  cfg.m = 23;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("m"), ConfigError);
  cfg = {};
  cfg.fine_n = 100;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("fine_n"), ConfigError);
  cfg = {};
  cfg.signal_jumps = {{0.5, 1.0}, {0.4, 1.0}};
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("increasing"), ConfigError);
  cfg = {};
  cfg.signal_jumps = {{1.2, 1.0}};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.sigma = 0.0;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("sigma"), ConfigError);
  CHECK_NOTHROW(DeconvolutionConfig{}.validate());
}

TEST_CASE("benchmark construction") {
  const DeconvolutionConfig cfg;
  const Benchmark bm = build_problem(cfg);
  CHECK(bm.problem.m() == 22);
  CHECK(bm.problem.n() == 128);
  CHECK(bm.a.maxCoeff() == doctest::Approx(6.2 / 128).epsilon(1e-14));
  CHECK(bm.a(0, 0) == doctest::Approx(6.2 / 128).epsilon(1e-14));

  SUBCASE("data match a brute-force fine-grid convolution") {
    for (int j = 1; j <= cfg.m; ++j) {
      const double t = observation_time(j, cfg);
      double sum = 0.0;
      for (int i = 0; i < cfg.fine_n; ++i) {
        const double s = (i + 0.5) / cfg.fine_n;
        double g = 0.0;
        for (const auto& jump : cfg.signal_jumps) {
          if (s >= jump.location) g += jump.increment;
        }
        sum += 6.2 * std::exp(-(t - s) * (t - s) / (2 * 0.02 * 0.02)) * g / cfg.fine_n;
      }
      CHECK(std::fabs(bm.truth.b_noiseless[j - 1] - sum) <= 1e-12);
    }
  }
  SUBCASE("whitened map equals A L^{-1} / sigma") {
    Matrix linv = Matrix::Zero(128, 128);
    for (int i = 0; i < 128; ++i)
      for (int k = 0; k <= i; ++k) linv(i, k) = 1.0;
    const Matrix expected = bm.a * linv / cfg.sigma;
    CHECK((bm.problem.a_hat() - expected).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((bm.problem.b_hat() - bm.truth.b / cfg.sigma).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("ground truth is consistent") {
    CHECK((apply_difference(bm.truth.z_true) - bm.truth.x_true).norm() < 1e-14);
    int nonzero = 0;
    for (Eigen::Index k = 0; k < bm.truth.x_true.size(); ++k) nonzero += bm.truth.x_true[k] != 0.0;
    CHECK(nonzero == 5);
  }
  SUBCASE("deterministic for a fixed seed") {
    const Benchmark again = build_problem(cfg);
    CHECK(again.truth.b == bm.truth.b);
    DeconvolutionConfig other = cfg;
    other.rng_seed += 1;
    CHECK(build_problem(other).truth.b != bm.truth.b);
  }
}

TEST_CASE("zero signal gives pure noise") {
  DeconvolutionConfig cfg;
  cfg.signal_jumps.clear();
  const Benchmark bm = build_problem(cfg);
  CHECK(bm.truth.b_noiseless.cwiseAbs().maxCoeff() == 0.0);
  CHECK(bm.truth.b.norm() > 0.0);
}

TEST_CASE("noise standard deviation over repetitions") {
  DeconvolutionConfig cfg;
  cfg.signal_jumps.clear();
  double ss = 0.0;
  long count = 0;
  for (int rep = 0; rep < 10000; ++rep) {
    cfg.rng_seed = 1000 + static_cast<std::uint64_t>(rep);
    const Benchmark bm = build_problem(cfg);
    ss += (bm.truth.b - bm.truth.b_noiseless).squaredNorm();
    count += static_cast<long>(bm.truth.b.size());
  }
  CHECK(std::sqrt(ss / count) == doctest::Approx(0.03).epsilon(0.02));
}

TEST_CASE("same grid for data and model leaves only rounding") {
  DeconvolutionConfig cfg;
  cfg.fine_n = cfg.n;
  cfg.signal_jumps = {{0.1 + 0.25 / 128, 1.0}, {0.45 + 0.25 / 128, -0.6}};
  const Benchmark bm = build_problem(cfg);
  const Vector noiseless_hat = bm.truth.b_noiseless / cfg.sigma;
  CHECK((noiseless_hat - bm.problem.a_hat() * bm.truth.x_true).norm() <= 1e-10);
}

TEST_CASE("difference and cumulative sum are inverse") {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd;
  Vector z(200);
  for (auto& v : z) v = nd(gen);
  CHECK((integrate_increments(apply_difference(z)) - z).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((apply_difference(integrate_increments(z)) - z).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("scaled forward map") {
  Matrix a(2, 3);
  a << 1, 2, 3, 4, 5, 6;
  const InverseProblem prob(a, Vector::Zero(2));
  Vector xi(3);
  xi << 1, -1, 2;
  CHECK(apply_scaled_forward(Vector::Zero(3), prob, Vector::Ones(3)).norm() == 0.0);
  CHECK((apply_scaled_forward(xi, prob, Vector::Ones(3)) - a * xi).norm() < 1e-15);
  CHECK((apply_scaled_forward(xi, prob, Vector::Constant(3, 4.0)) - 2.0 * a * xi).norm() < 1e-14);
  CHECK_THROWS_AS(apply_scaled_forward(Vector::Zero(2), prob, Vector::Ones(3)), DimensionError);
}

TEST_CASE("sensitivity-based scales") {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 2.0;
  const Vector v = sensitivity_vartheta(InverseProblem(d, Vector::Zero(2)), 4.0);
  CHECK(v[0] == doctest::Approx(4.0));
  CHECK(v[1] == doctest::Approx(1.0));

  Matrix unit(3, 2);
  unit << 1, 0, 0, 0.6, 0, 0.8;
  CHECK(sensitivity_vartheta(InverseProblem(unit, Vector::Zero(3)), 1.0).isApprox(Vector::Ones(2)));

  const Benchmark bm = build_problem(DeconvolutionConfig{});
  const Vector vt = sensitivity_vartheta(bm.problem, 0.7);
  for (Eigen::Index j = 0; j < vt.size(); ++j)
    CHECK(vt[j] * bm.problem.a_hat().col(j).squaredNorm() == doctest::Approx(0.7).epsilon(1e-12));

  Matrix zero_col = Matrix::Ones(2, 3);
  zero_col.col(1).setZero();
  CHECK_THROWS_WITH_AS(sensitivity_vartheta(InverseProblem(zero_col, Vector::Zero(2)), 1.0),
                       doctest::Contains("1"), DomainError);
}
