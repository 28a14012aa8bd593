#pragma once
// Linear forward models and the 1D Gaussian deconvolution benchmark.
//
// The unknown signal z on n cells is parametrized by its increments
// x = L z (L the lower bidiagonal difference matrix, z_0 = 0), so that
// z = L^{-1} x is a cumulative sum.  Data and forward map are whitened by the
// noise standard deviation, leaving unit Gaussian noise.

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace hbi {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Jump {
  double location;  // in (0, 1)
  double increment;
};

struct DeconvolutionConfig {
  double kernel_width = 0.02;
  double kernel_amplitude = 6.2;
  int n = 128;
  int obs_stride = 6;
  int m = 22;
  int fine_n = 1000;
  double sigma = 0.03;
  std::vector<Jump> signal_jumps = default_jumps();
  std::uint64_t rng_seed = 20240601;

  static std::vector<Jump> default_jumps();

  // Throws ConfigError naming the offending field.
  void validate() const;
};

// Whitened linear problem  b_hat = A_hat x + e,  e ~ N(0, I_m).
class InverseProblem {
 public:
  InverseProblem(Matrix a_hat, Vector b_hat, double sigma = 1.0);

  const Matrix& a_hat() const { return a_hat_; }
  const Vector& b_hat() const { return b_hat_; }
  double sigma() const { return sigma_; }
  std::size_t n() const { return static_cast<std::size_t>(a_hat_.cols()); }
  std::size_t m() const { return static_cast<std::size_t>(a_hat_.rows()); }

 private:
  Matrix a_hat_;
  Vector b_hat_;
  double sigma_;
};

struct GroundTruth {
  Vector z_true;       // generative signal sampled at the coarse midpoints
  Vector x_true;       // L z_true
  Vector b_noiseless;  // fine-grid convolution, before noise and whitening
  Vector b;            // noisy data, before whitening
};

struct Benchmark {
  InverseProblem problem;
  GroundTruth truth;
  Matrix a;  // unwhitened coarse convolution matrix acting on z
};

double kernel_eval(double t, const DeconvolutionConfig& cfg);

// Piecewise constant generative signal g(s) with g = 0 left of the first jump.
double generative_signal(double s, const DeconvolutionConfig& cfg);

// Coarse cell midpoint s_k = (k - 1/2)/n for 1-based k.
double coarse_node(int k, int n);

// Observation time t_j = s_{1 + stride (j - 1)} for 1-based j.
double observation_time(int j, const DeconvolutionConfig& cfg);

Benchmark build_problem(const DeconvolutionConfig& cfg);

// x = L z
Vector apply_difference(const Vector& z);
// z = L^{-1} x (cumulative sum)
Vector integrate_increments(const Vector& x);

// A_hat D_vartheta^{1/2} xi
Vector apply_scaled_forward(const Vector& xi, const InverseProblem& prob, const Vector& vartheta);

// vartheta_j = C / ||a_hat^(j)||^2.  DomainError naming the column if it is zero.
Vector sensitivity_vartheta(const InverseProblem& prob, double c);

}  // namespace hbi
