#pragma once

#include "choq/grid.hpp"

namespace choq {

/// Exponent pair for the bilinear Riesz integral
///   I(f,g) = int int f(x) g(y) |x-y|^{-mu} dx dy.
/// `exact_scaling` requires 1/q + 1/r = (2N-mu)/N, the relation that makes
/// the quotient I / (|f|_q |g|_r) dilation-invariant; `subcritical_pair`
/// requires strict inequality, where the quotient of separated bumps decays
/// with the separation.
struct HlsCase {
  double q = 1.2;
  double r = 1.2;
  double mu = 1.0;
  int dim = 3;
  enum class Mode { exact_scaling, subcritical_pair } mode = Mode::exact_scaling;

  void validate() const;
};

/// |I(f,g)| / (|f|_q |g|_r). Throws on a vanishing denominator.
double hls_ratio(const ScalarField& f, const ScalarField& g, const HlsCase& c);

/// Quotient for two unit-height compact bumps of the given width with centers
/// `separation` apart along the first axis (support gap separation - 2 width).
/// Throws when the supports touch or the pair does not fit the box.
double disjoint_decay(const GridSpec& grid, double separation, double bump_width,
                      const HlsCase& c);

/// Pointwise kernel bound on the same quotient:
/// gap^{-mu} |f|_1 |g|_1 / (|f|_q |g|_r), gap = separation - 2 width.
double disjoint_envelope(const GridSpec& grid, double separation, double bump_width,
                         const HlsCase& c);

}  // namespace choq
