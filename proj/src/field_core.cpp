#include "dnf/field_core.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

#include "dnf/errors.hpp"

namespace dnf {

namespace {

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

double normalized_gaussian(double d, double sigma) {
  return std::exp(-d * d / (2.0 * sigma * sigma)) / (std::sqrt(2.0 * std::numbers::pi) * sigma);
}

// Smallest 2^a 3^b 5^c 7^d >= n.
int smooth_size(int n) {
  for (int m = n;; ++m) {
    int r = m;
    for (int p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

}  // namespace

Grid::Grid(double lower, double upper, int n_points) : lower_(lower), upper_(upper), n_(n_points) {
  if (!std::isfinite(lower) || !std::isfinite(upper))
    throw ValidationError("grid bounds must be finite");
  if (!(upper > lower)) throw ValidationError("grid upper bound must exceed lower bound");
  if (n_points < 3) throw ValidationError("grid needs at least 3 points");
  dx_ = (upper - lower) / (n_points - 1);
}

std::vector<double> Grid::points() const {
  std::vector<double> xs(static_cast<std::size_t>(n_));
  for (int j = 0; j < n_; ++j) xs[static_cast<std::size_t>(j)] = at(j);
  return xs;
}

Grid build_grid(double lower, double upper, int n_points) { return Grid(lower, upper, n_points); }

void GaussianInputSpec::validate() const {
  if (!std::isfinite(amplitude) || !std::isfinite(centroid) || !std::isfinite(width))
    throw ValidationError("input parameters must be finite");
  if (!(width > 0.0)) throw ValidationError("input width must be positive");
  if (amplitude < 0.0) throw ValidationError("input amplitude must be non-negative");
}

void KernelSpec::validate() const {
  if (!(sigma_excite > 0.0) || !(sigma_inhibit > 0.0))
    throw ValidationError("kernel widths must be positive");
  if (!(c_excite >= 0.0) || !(c_inhibit >= 0.0) || !(c_global >= 0.0))
    throw ValidationError("kernel strengths must be non-negative");
  if (!std::isfinite(c_excite) || !std::isfinite(c_inhibit) || !std::isfinite(c_global) ||
      !std::isfinite(sigma_excite) || !std::isfinite(sigma_inhibit))
    throw ValidationError("kernel parameters must be finite");
}

double KernelSpec::operator()(double d) const noexcept {
  return c_excite * normalized_gaussian(d, sigma_excite) - c_inhibit * normalized_gaussian(d, sigma_inhibit) -
         c_global;
}

void SigmoidSpec::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("sigmoid slope beta must be positive");
  if (!std::isfinite(alpha)) throw ValidationError("sigmoid threshold alpha must be finite");
}

double SigmoidSpec::operator()(double u) const noexcept { return 1.0 / (1.0 + std::exp(-beta * (u - alpha))); }

Field sample_input(const GaussianInputSpec& spec, const Grid& grid) {
  spec.validate();
  Field v(static_cast<std::size_t>(grid.size()));
  const double two_w2 = 2.0 * spec.width * spec.width;
  for (int j = 0; j < grid.size(); ++j) {
    const double d = grid.at(j) - spec.centroid;
    v[static_cast<std::size_t>(j)] = spec.amplitude * std::exp(-d * d / two_w2);
  }
  return v;
}

Field sample_inputs(std::span<const GaussianInputSpec> specs, const Grid& grid) {
  Field sum(static_cast<std::size_t>(grid.size()), 0.0);
  for (const auto& s : specs) {
    const Field v = sample_input(s, grid);
    for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += v[j];
  }
  return sum;
}

KernelSamples build_kernel(const KernelSpec& spec, const Grid& grid) {
  spec.validate();
  const int n = grid.size();
  KernelSamples k;
  k.dx = grid.dx();
  k.values.resize(static_cast<std::size_t>(2 * n - 1));
  // Evaluate on |offset| and mirror so evenness holds bit for bit.
  for (int m = 0; m < n; ++m) {
    const double v = spec(m * grid.dx());
    k.values[static_cast<std::size_t>(n - 1 + m)] = v;
    k.values[static_cast<std::size_t>(n - 1 - m)] = v;
  }
  return k;
}

Field sigmoid_gate(std::span<const double> u, const SigmoidSpec& spec) {
  Field g(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) g[j] = spec(u[j]);
  return g;
}

struct Convolution::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

Convolution::Convolution(const KernelSamples& kernel) : n_(kernel.grid_size()), dx_(kernel.dx) {
  if (kernel.values.size() != static_cast<std::size_t>(2 * n_ - 1) || n_ < 1)
    throw ValidationError("kernel must have 2n-1 samples");
  // Outputs n-1 .. 2n-2 of the linear convolution are alias-free once the
  // circular length reaches 2n-1.
  fft_size_ = smooth_size(2 * n_ - 1);
  const int bins = fft_size_ / 2 + 1;

  std::vector<double> real(static_cast<std::size_t>(fft_size_), 0.0);
  spectrum_.assign(static_cast<std::size_t>(bins), {});
  plans_ = std::make_unique<Plans>();
  {
    std::lock_guard lock(planner_mutex());
    auto* cplx = reinterpret_cast<fftw_complex*>(spectrum_.data());
    plans_->forward =
        fftw_plan_dft_r2c_1d(fft_size_, real.data(), cplx, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_->backward = fftw_plan_dft_c2r_1d(fft_size_, cplx, real.data(),
                                            FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_DESTROY_INPUT);
  }
  std::copy(kernel.values.begin(), kernel.values.end(), real.begin());
  fftw_execute_dft_r2c(plans_->forward, real.data(), reinterpret_cast<fftw_complex*>(spectrum_.data()));
  // Fold the dx quadrature weight and the 1/M inverse normalisation into the spectrum.
  const double scale = dx_ / fft_size_;
  for (auto& c : spectrum_) c *= scale;
}

Convolution::~Convolution() {
  if (!plans_) return;
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(plans_->forward);
  fftw_destroy_plan(plans_->backward);
}

Convolution::Convolution(Convolution&&) noexcept = default;
Convolution& Convolution::operator=(Convolution&&) noexcept = default;

void Convolution::apply(std::span<const double> f, std::span<double> out) const {
  if (f.size() != static_cast<std::size_t>(n_) || out.size() != static_cast<std::size_t>(n_))
    throw ValidationError("field length does not match kernel grid");
  std::vector<double> real(static_cast<std::size_t>(fft_size_), 0.0);
  std::copy(f.begin(), f.end(), real.begin());
  std::vector<std::complex<double>> freq(spectrum_.size());
  fftw_execute_dft_r2c(plans_->forward, real.data(), reinterpret_cast<fftw_complex*>(freq.data()));
  for (std::size_t b = 0; b < freq.size(); ++b) freq[b] *= spectrum_[b];
  fftw_execute_dft_c2r(plans_->backward, reinterpret_cast<fftw_complex*>(freq.data()), real.data());
  std::copy_n(real.begin() + (n_ - 1), n_, out.begin());
}

Field Convolution::apply(std::span<const double> f) const {
  Field out(f.size());
  apply(f, out);
  return out;
}

Field lateral_interaction(std::span<const double> u, const KernelSamples& kernel, const Grid& grid,
                          const SigmoidSpec& sigmoid) {
  if (u.size() != static_cast<std::size_t>(grid.size()) || kernel.grid_size() != grid.size() ||
      kernel.values.size() != static_cast<std::size_t>(2 * grid.size() - 1))
    throw ValidationError("field, kernel and grid lengths disagree");
  if (std::abs(kernel.dx - grid.dx()) > 1e-12 * grid.dx())
    throw ValidationError("kernel spacing does not match grid spacing");
  return Convolution(kernel).apply(sigmoid_gate(u, sigmoid));
}

}  // namespace dnf
