#pragma once

#include <complex>
#include <vector>

#include "choq/grid.hpp"

namespace choq::fft {

using cplx = std::complex<double>;

/// Unnormalized forward DFT of the field values (row-major, same layout).
std::vector<cplx> forward(const ScalarField& f);

/// Inverse DFT (divides by the point count), real part only.
ScalarField inverse_real(const GridSpec& g, std::vector<cplx> spectrum);

/// Wavenumber for axis index i on an n-point axis of half-width L:
/// k = (pi/L) * m with m wrapped to [-n/2, n/2).
double wavenumber(int i, int n, double half_width);

/// Spectral kinetic integral: sum_k |k|^2 |f_hat|^2 with quadrature weight,
/// equals the continuum integral of |grad f|^2 for well-resolved fields.
double grad_norm_sq(const ScalarField& f);

/// -Laplacian applied spectrally.
ScalarField neg_laplacian(const ScalarField& f);

/// d/dx_axis applied spectrally.
ScalarField gradient_component(const ScalarField& f, int axis);

/// Pointwise |grad f|^2 assembled from the spectral partial derivatives.
ScalarField gradient_sq_density(const ScalarField& f);

/// Evaluate the trigonometric interpolant of u at the points of `target`
/// (same dim; per-axis point counts may differ). Values outside the source
/// box wrap periodically, so the source field must decay near its boundary.
ScalarField spectral_resample(const ScalarField& u, const GridSpec& target);

/// Evaluate the interpolant of u at (target point - offset): places a copy of
/// u translated by `offset` onto the target grid. Periodic wrap as above.
ScalarField spectral_resample_shifted(const ScalarField& u, const GridSpec& target,
                                      const std::vector<double>& offset);

/// u(x - shift) by a Fourier phase, exact for band-limited data.
ScalarField spectral_shift(const ScalarField& u, const std::vector<double>& shift);

// Padded real transforms used by the free-space convolution. The padded grid
// has 2n points per axis; the complex array uses the r2c layout with the last
// axis halved to (2n)/2+1 entries.
std::vector<double> padded_forward_r2c_real_part(int dim, int n_padded,
                                                 const std::vector<double>& values);
std::vector<cplx> padded_forward_r2c(int dim, int n_padded, const std::vector<double>& values);
std::vector<double> padded_inverse_c2r(int dim, int n_padded, const std::vector<cplx>& spectrum);

}  // namespace choq::fft
