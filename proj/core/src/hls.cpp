#include "choq/hls.hpp"

#include <cmath>

#include "choq/riesz.hpp"

namespace choq {

void HlsCase::validate() const {
  if (dim < 3) throw std::invalid_argument("HlsCase: dim must be >= 3");
  if (!(mu > 0.0) || !(mu < dim))
    throw std::invalid_argument("HlsCase: mu must lie in (0, dim)");
  if (!(q > 1.0) || !(r > 1.0))
    throw std::invalid_argument("HlsCase: q and r must exceed 1");
  const double lhs = 1.0 / q + 1.0 / r;
  const double rhs = (2.0 * dim - mu) / dim;
  if (mode == Mode::exact_scaling) {
    if (std::abs(lhs - rhs) > 1e-12)
      throw std::invalid_argument("HlsCase: exact-scaling mode needs 1/q + 1/r = (2N-mu)/N");
  } else {
    if (!(lhs < rhs - 1e-12))
      throw std::invalid_argument("HlsCase: subcritical mode needs 1/q + 1/r < (2N-mu)/N");
  }
}

namespace {

double bilinear_riesz(const ScalarField& f, const ScalarField& g, double mu) {
  if (!(f.grid == g.grid)) throw std::invalid_argument("hls: grid mismatch");
  ScalarField conv = riesz_convolve(g, mu);
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += f.values[i] * conv.values[i];
  return s * f.grid.cell_volume();
}

}  // namespace

double hls_ratio(const ScalarField& f, const ScalarField& g, const HlsCase& c) {
  c.validate();
  if (f.grid.dim != c.dim) throw std::invalid_argument("hls_ratio: dim mismatch");
  const double den = lq_norm(f, c.q) * lq_norm(g, c.r);
  if (!(den > 0.0)) throw std::invalid_argument("hls_ratio: degenerate pair, |f|_q |g|_r = 0");
  return std::abs(bilinear_riesz(f, g, c.mu)) / den;
}

double disjoint_decay(const GridSpec& grid, double separation, double bump_width,
                      const HlsCase& c) {
  c.validate();
  if (c.mode != HlsCase::Mode::subcritical_pair)
    throw std::invalid_argument("disjoint_decay: requires a subcritical-pair case");
  if (!(separation > 2.0 * bump_width))
    throw std::invalid_argument("disjoint_decay: supports overlap at this separation");
  if (separation / 2.0 + bump_width >= grid.half_width)
    throw std::invalid_argument("disjoint_decay: pair does not fit the box");
  std::vector<double> left(grid.dim, 0.0), right(grid.dim, 0.0);
  left[0] = -separation / 2.0;
  right[0] = separation / 2.0;
  ScalarField f = bump_field(grid, left, bump_width);
  ScalarField g = bump_field(grid, right, bump_width);
  return hls_ratio(f, g, c);
}

double disjoint_envelope(const GridSpec& grid, double separation, double bump_width,
                         const HlsCase& c) {
  c.validate();
  const double gap = separation - 2.0 * bump_width;
  if (!(gap > 0.0)) throw std::invalid_argument("disjoint_envelope: supports overlap");
  std::vector<double> center(grid.dim, 0.0);
  ScalarField f = bump_field(grid, center, bump_width);
  const double l1 = lq_norm(f, 1.0);
  return std::pow(gap, -c.mu) * l1 * l1 / (lq_norm(f, c.q) * lq_norm(f, c.r));
}

}  // namespace choq
