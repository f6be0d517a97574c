#pragma once

#include <memory>
#include <vector>

#include "choq/grid.hpp"

namespace choq {

/// Fourier multiplier of the free-space Riesz kernel |x|^{-mu}, precomputed
/// on the zero-padded (2n per axis) frequency grid in unit lattice spacing.
/// The physical convolution only differs by a power of the grid spacing, so
/// one table serves every dilated copy of an n^dim grid.
struct RieszKernelTable {
  double mu = 1.0;
  int dim = 3;
  int points_per_axis = 64;           // of the unpadded grid
  std::vector<double> fourier_multiplier;  // r2c layout on the padded grid, >= 0
};

/// Build (or fetch from the process-wide cache) the kernel table for a grid.
/// Throws unless 0 < mu < dim.
std::shared_ptr<const RieszKernelTable> riesz_kernel_table(const GridSpec& grid, double mu);

struct ConvolveOptions {
  double boundary_tol = 1e-8;   // max admissible boundary-shell mass fraction
  bool warn_on_boundary = true; // print one stderr warning when exceeded
  bool* flagged = nullptr;      // optional out-param set when exceeded
};

/// g(x) = int f(y) |x-y|^{-mu} dy via zero-padded FFT with the truncated
/// free-space kernel; exact (up to quadrature) for data supported in the box.
ScalarField riesz_convolve(const ScalarField& f, const RieszKernelTable& kernel,
                           const ConvolveOptions& opts = {});

ScalarField riesz_convolve(const ScalarField& f, double mu, const ConvolveOptions& opts = {});

}  // namespace choq
