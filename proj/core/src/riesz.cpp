#include "choq/riesz.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <tuple>

#include "choq/fft.hpp"

namespace choq {

namespace {

std::mutex g_table_mutex;

// Trapezoidal deficit of the unit lattice against |y|^{-mu} weighted by a
// Gaussian of width sigma: int K f - sum_{m != 0} K(m) f(m).  The punctured
// lattice sum misses a singularity-localized amount c0 f(0) + c1 Lap f(0)
// + O(higher derivatives); probing two Gaussian widths isolates c0 and c1.
double gaussian_deficit(int dim, double mu, double sigma) {
  const int R = static_cast<int>(6.0 * sigma);
  std::vector<int> m(dim, -R);
  double sum = 0.0;
  while (true) {
    double r2 = 0.0;
    for (int d = 0; d < dim; ++d) r2 += static_cast<double>(m[d]) * m[d];
    if (r2 > 0.0) sum += std::exp(-r2 / (sigma * sigma)) * std::pow(r2, -0.5 * mu);
    int d = dim - 1;
    while (d >= 0 && ++m[d] == R + 1) m[d--] = -R;
    if (d < 0) break;
  }
  // int_{R^d} e^{-|y|^2/sigma^2} |y|^{-mu} dy in closed form
  const double surface = 2.0 * std::pow(M_PI, 0.5 * dim) / std::tgamma(0.5 * dim);
  const double integral =
      surface * std::pow(sigma, dim - mu) * 0.5 * std::tgamma(0.5 * (dim - mu));
  return integral - sum;
}

// Singular-point quadrature weights: c0 multiplies f(0), c1 multiplies Lap f(0).
void lattice_constants(int dim, double mu, double* c0, double* c1) {
  const double s1 = 8.0, s2 = 12.0;
  const double d1 = gaussian_deficit(dim, mu, s1);
  const double d2 = gaussian_deficit(dim, mu, s2);
  // deficit(sigma) = c0 + c1 * (-2 dim / sigma^2) for the probe Gaussians
  const double g1 = -2.0 * dim / (s1 * s1);
  const double g2 = -2.0 * dim / (s2 * s2);
  *c1 = (d1 - d2) / (g1 - g2);
  *c0 = d1 - *c1 * g1;
}

std::shared_ptr<const RieszKernelTable> build_table(int dim, int n, double mu) {
  const int P = 2 * n;
  std::size_t total = 1;
  for (int d = 0; d < dim; ++d) total *= static_cast<std::size_t>(P);
  std::vector<double> kernel(total);

  // Point values plus singularity corrections: the origin carries the lattice
  // deficit weight c0 - 2 dim c1 and each of the 2 dim unit neighbors gains c1,
  // a discrete-Laplacian stencil matching the c1 Lap f(0) deficit term.
  double c0 = 0.0, c1 = 0.0;
  lattice_constants(dim, mu, &c0, &c1);

  std::vector<int> idx(dim), m(dim);
  GridSpec padded;  // only for decode_index
  padded.dim = dim;
  padded.points_per_axis = P;
  for (std::size_t i = 0; i < total; ++i) {
    decode_index(padded, i, idx.data());
    double r2 = 0.0;
    for (int d = 0; d < dim; ++d) {
      m[d] = (idx[d] <= n) ? idx[d] : idx[d] - P;  // min-image on the padded torus
      r2 += static_cast<double>(m[d]) * m[d];
    }
    if (r2 == 0.0)
      kernel[i] = c0 - 2.0 * dim * c1;
    else if (r2 == 1.0)
      kernel[i] = 1.0 + c1;
    else
      kernel[i] = std::pow(r2, -0.5 * mu);
  }

  auto table = std::make_shared<RieszKernelTable>();
  table->mu = mu;
  table->dim = dim;
  table->points_per_axis = n;
  table->fourier_multiplier = fft::padded_forward_r2c_real_part(dim, P, kernel);
  // The periodized Riesz kernel is positive definite; tiny negative entries
  // are FFT roundoff and get clamped to keep the positivity invariant.
  for (double& v : table->fourier_multiplier)
    if (v < 0.0) v = 0.0;
  return table;
}

}  // namespace

std::shared_ptr<const RieszKernelTable> riesz_kernel_table(const GridSpec& grid, double mu) {
  if (!(mu > 0.0) || !(mu < grid.dim))
    throw std::invalid_argument("riesz_kernel_table: mu must lie in (0, dim)");
  static std::map<std::tuple<int, int, double>, std::shared_ptr<const RieszKernelTable>> cache;
  std::lock_guard<std::mutex> lock(g_table_mutex);
  auto k = std::make_tuple(grid.dim, grid.points_per_axis, mu);
  auto it = cache.find(k);
  if (it != cache.end()) return it->second;
  auto t = build_table(grid.dim, grid.points_per_axis, mu);
  cache.emplace(k, t);
  return t;
}

ScalarField riesz_convolve(const ScalarField& f, const RieszKernelTable& kernel,
                           const ConvolveOptions& opts) {
  const GridSpec& g = f.grid;
  if (kernel.dim != g.dim || kernel.points_per_axis != g.points_per_axis)
    throw std::invalid_argument("riesz_convolve: kernel table does not match grid");

  const double frac = boundary_shell_mass_fraction(f);
  if (frac > opts.boundary_tol) {
    if (opts.flagged) *opts.flagged = true;
    if (opts.warn_on_boundary)
      std::fprintf(stderr,
                   "[choq] riesz_convolve: boundary shell carries %.3e of the mass "
                   "(tol %.1e); free-space truncation may be inaccurate\n",
                   frac, opts.boundary_tol);
  }

  const int n = g.points_per_axis;
  const int P = 2 * n;
  std::size_t padded_total = 1;
  for (int d = 0; d < g.dim; ++d) padded_total *= static_cast<std::size_t>(P);

  // embed into the padded box at per-axis offset [0, n)
  std::vector<double> padded(padded_total, 0.0);
  std::vector<int> idx(g.dim);
  for (std::size_t i = 0; i < f.size(); ++i) {
    decode_index(g, i, idx.data());
    std::size_t flat = 0;
    for (int d = 0; d < g.dim; ++d) flat = flat * P + idx[d];
    padded[flat] = f.values[i];
  }

  auto spectrum = fft::padded_forward_r2c(g.dim, P, padded);
  for (std::size_t i = 0; i < spectrum.size(); ++i) spectrum[i] *= kernel.fourier_multiplier[i];
  auto conv = fft::padded_inverse_c2r(g.dim, P, spectrum);

  // quadrature weight h^dim, kernel scale h^{-mu}, FFTW backward scale 1/P^dim
  const double scale = std::pow(g.spacing, g.dim - kernel.mu) / static_cast<double>(padded_total);
  ScalarField out(g);
  for (std::size_t i = 0; i < out.size(); ++i) {
    decode_index(g, i, idx.data());
    std::size_t flat = 0;
    for (int d = 0; d < g.dim; ++d) flat = flat * P + idx[d];
    out.values[i] = conv[flat] * scale;
  }
  return out;
}

ScalarField riesz_convolve(const ScalarField& f, double mu, const ConvolveOptions& opts) {
  auto table = riesz_kernel_table(f.grid, mu);
  return riesz_convolve(f, *table, opts);
}

}  // namespace choq
