#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace dnf {

using Field = std::vector<double>;

/// Uniform, ascending samples of the 1-D feature axis.
class Grid {
public:
  Grid(double lower, double upper, int n_points);

  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }
  int size() const noexcept { return n_; }
  double dx() const noexcept { return dx_; }
  double at(int j) const noexcept { return j == n_ - 1 ? upper_ : lower_ + j * dx_; }
  std::vector<double> points() const;

  bool operator==(const Grid&) const = default;

private:
  double lower_;
  double upper_;
  int n_;
  double dx_;
};

Grid build_grid(double lower, double upper, int n_points);

struct GaussianInputSpec {
  double amplitude = 0.0;
  double centroid = 0.0;
  double width = 1.0;

  void validate() const;
  bool operator==(const GaussianInputSpec&) const = default;
};

/// Difference of normalized Gaussians minus a constant:
///   k(d) = c_e N(d; s_e) - c_i N(d; s_i) - c_g,  N(d; s) = exp(-d^2 / 2s^2) / (sqrt(2 pi) s)
struct KernelSpec {
  double c_excite = 0.0;
  double sigma_excite = 1.0;
  double c_inhibit = 0.0;
  double sigma_inhibit = 1.0;
  double c_global = 0.0;

  void validate() const;
  double operator()(double displacement) const noexcept;
  bool operator==(const KernelSpec&) const = default;
};

struct SigmoidSpec {
  double beta = 1.0;
  double alpha = 0.0;

  void validate() const;
  double operator()(double u) const noexcept;
  bool operator==(const SigmoidSpec&) const = default;
};

/// Kernel sampled at displacements (m - (n-1)) * dx for m in [0, 2n-1).
struct KernelSamples {
  std::vector<double> values;
  double dx = 0.0;

  int grid_size() const noexcept { return static_cast<int>((values.size() + 1) / 2); }
  double at_offset(int offset) const { return values.at(static_cast<std::size_t>(offset + grid_size() - 1)); }
};

Field sample_input(const GaussianInputSpec& spec, const Grid& grid);
/// Elementwise sum of several Gaussian inputs on the same grid.
Field sample_inputs(std::span<const GaussianInputSpec> specs, const Grid& grid);

KernelSamples build_kernel(const KernelSpec& spec, const Grid& grid);

Field sigmoid_gate(std::span<const double> u, const SigmoidSpec& spec);

/// Zero-padded discrete convolution of a (gated) field with a fixed kernel,
/// out[i] = dx * sum_j k(x_i - x_j) f[j], evaluated through FFTW.
///
/// The kernel spectrum is computed once; apply() is const and may be called
/// concurrently from several threads.
class Convolution {
public:
  explicit Convolution(const KernelSamples& kernel);
  ~Convolution();
  Convolution(Convolution&&) noexcept;
  Convolution& operator=(Convolution&&) noexcept;
  Convolution(const Convolution&) = delete;
  Convolution& operator=(const Convolution&) = delete;

  int grid_size() const noexcept { return n_; }
  void apply(std::span<const double> f, std::span<double> out) const;
  Field apply(std::span<const double> f) const;

private:
  struct Plans;

  int n_ = 0;
  int fft_size_ = 0;
  double dx_ = 0.0;
  std::vector<std::complex<double>> spectrum_;
  std::unique_ptr<Plans> plans_;
};

/// Convolves g(u) with the kernel over the grid.
Field lateral_interaction(std::span<const double> u, const KernelSamples& kernel, const Grid& grid,
                          const SigmoidSpec& sigmoid);

}  // namespace dnf
