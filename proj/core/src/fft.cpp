#include "choq/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>

namespace choq::fft {

namespace {

// FFTW plans are cached per (dims, kind). Each cached plan owns its buffers;
// callers copy in and out, which keeps alignment and thread-safety concerns
// away from the planner. Guarded by one mutex (planner is not thread-safe).
struct PlanEntry {
  fftw_plan plan = nullptr;
  void* in = nullptr;
  void* out = nullptr;
  std::size_t in_count = 0;
  std::size_t out_count = 0;
  ~PlanEntry() {
    if (plan) fftw_destroy_plan(plan);
    if (in) fftw_free(in);
    if (out && out != in) fftw_free(out);
  }
};

std::mutex g_mutex;
std::map<std::string, PlanEntry>& cache() {
  static std::map<std::string, PlanEntry> c;
  return c;
}

std::string key(const char* kind, int dim, int n) {
  return std::string(kind) + ":" + std::to_string(dim) + ":" + std::to_string(n);
}

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  while (e-- > 0) r *= b;
  return r;
}

PlanEntry& c2c_plan(int dim, int n, int sign) {
  auto& e = cache()[key(sign == FFTW_FORWARD ? "c2c_f" : "c2c_b", dim, n)];
  if (!e.plan) {
    const std::size_t count = ipow(n, dim);
    e.in = fftw_malloc(sizeof(fftw_complex) * count);
    e.out = e.in;  // in-place
    e.in_count = e.out_count = count;
    std::vector<int> dims(dim, n);
    e.plan = fftw_plan_dft(dim, dims.data(), static_cast<fftw_complex*>(e.in),
                           static_cast<fftw_complex*>(e.out), sign, FFTW_ESTIMATE);
  }
  return e;
}

PlanEntry& r2c_plan(int dim, int n) {
  auto& e = cache()[key("r2c", dim, n)];
  if (!e.plan) {
    const std::size_t rc = ipow(n, dim);
    const std::size_t cc = ipow(n, dim - 1) * (n / 2 + 1);
    e.in = fftw_malloc(sizeof(double) * rc);
    e.out = fftw_malloc(sizeof(fftw_complex) * cc);
    e.in_count = rc;
    e.out_count = cc;
    std::vector<int> dims(dim, n);
    e.plan = fftw_plan_dft_r2c(dim, dims.data(), static_cast<double*>(e.in),
                               static_cast<fftw_complex*>(e.out), FFTW_ESTIMATE);
  }
  return e;
}

PlanEntry& c2r_plan(int dim, int n) {
  auto& e = cache()[key("c2r", dim, n)];
  if (!e.plan) {
    const std::size_t rc = ipow(n, dim);
    const std::size_t cc = ipow(n, dim - 1) * (n / 2 + 1);
    e.in = fftw_malloc(sizeof(fftw_complex) * cc);
    e.out = fftw_malloc(sizeof(double) * rc);
    e.in_count = cc;
    e.out_count = rc;
    std::vector<int> dims(dim, n);
    e.plan = fftw_plan_dft_c2r(dim, dims.data(), static_cast<fftw_complex*>(e.in),
                               static_cast<double*>(e.out), FFTW_ESTIMATE);
  }
  return e;
}

}  // namespace

std::vector<cplx> forward(const ScalarField& f) {
  const int dim = f.grid.dim, n = f.grid.points_per_axis;
  std::lock_guard<std::mutex> lock(g_mutex);
  PlanEntry& e = c2c_plan(dim, n, FFTW_FORWARD);
  auto* buf = static_cast<cplx*>(e.in);
  for (std::size_t i = 0; i < e.in_count; ++i) buf[i] = cplx(f.values[i], 0.0);
  fftw_execute(e.plan);
  return std::vector<cplx>(buf, buf + e.out_count);
}

ScalarField inverse_real(const GridSpec& g, std::vector<cplx> spectrum) {
  const int dim = g.dim, n = g.points_per_axis;
  std::lock_guard<std::mutex> lock(g_mutex);
  PlanEntry& e = c2c_plan(dim, n, FFTW_BACKWARD);
  auto* buf = static_cast<cplx*>(e.in);
  std::memcpy(buf, spectrum.data(), sizeof(cplx) * e.in_count);
  fftw_execute(e.plan);
  ScalarField out(g);
  const double norm = 1.0 / static_cast<double>(e.in_count);
  for (std::size_t i = 0; i < e.in_count; ++i) out.values[i] = buf[i].real() * norm;
  return out;
}

double wavenumber(int i, int n, double half_width) {
  const int m = (i <= n / 2) ? i : i - n;
  return M_PI * m / half_width;
}

double grad_norm_sq(const ScalarField& f) {
  const GridSpec& g = f.grid;
  const int n = g.points_per_axis;
  auto F = forward(f);
  std::vector<double> k2_axis(n);
  for (int i = 0; i < n; ++i) {
    const double k = wavenumber(i, n, g.half_width);
    k2_axis[i] = k * k;
  }
  double acc = 0.0;
  std::vector<int> idx(g.dim);
  for (std::size_t i = 0; i < F.size(); ++i) {
    decode_index(g, i, idx.data());
    double k2 = 0.0;
    for (int d = 0; d < g.dim; ++d) k2 += k2_axis[idx[d]];
    acc += k2 * std::norm(F[i]);
  }
  return acc * g.cell_volume() / static_cast<double>(F.size());
}

ScalarField neg_laplacian(const ScalarField& f) {
  const GridSpec& g = f.grid;
  const int n = g.points_per_axis;
  auto F = forward(f);
  std::vector<double> k2_axis(n);
  for (int i = 0; i < n; ++i) {
    const double k = wavenumber(i, n, g.half_width);
    k2_axis[i] = k * k;
  }
  std::vector<int> idx(g.dim);
  for (std::size_t i = 0; i < F.size(); ++i) {
    decode_index(g, i, idx.data());
    double k2 = 0.0;
    for (int d = 0; d < g.dim; ++d) k2 += k2_axis[idx[d]];
    F[i] *= k2;
  }
  return inverse_real(g, std::move(F));
}

ScalarField gradient_component(const ScalarField& f, int axis) {
  const GridSpec& g = f.grid;
  const int n = g.points_per_axis;
  auto F = forward(f);
  std::vector<int> idx(g.dim);
  for (std::size_t i = 0; i < F.size(); ++i) {
    decode_index(g, i, idx.data());
    // drop the unmatched Nyquist mode of the derivative
    const int m = idx[axis];
    double k = (m == n / 2) ? 0.0 : wavenumber(m, n, g.half_width);
    F[i] *= cplx(0.0, k);
  }
  return inverse_real(g, std::move(F));
}

ScalarField gradient_sq_density(const ScalarField& f) {
  ScalarField out(f.grid);
  for (int a = 0; a < f.grid.dim; ++a) {
    ScalarField da = gradient_component(f, a);
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] += da.values[i] * da.values[i];
  }
  return out;
}

namespace {

// Apply a rectangular matrix T (rows x cols) along `axis` of a row-major
// complex tensor whose extents are given in `extent`. Returns the new tensor
// and updates extent[axis] = rows.
std::vector<cplx> apply_along_axis(const std::vector<cplx>& in, std::vector<int>& extent,
                                   int axis, const std::vector<cplx>& T, int rows) {
  const int cols = extent[axis];
  std::size_t inner = 1, outer = 1;
  for (std::size_t d = axis + 1; d < extent.size(); ++d) inner *= extent[d];
  for (int d = 0; d < axis; ++d) outer *= extent[d];
  std::vector<cplx> out(outer * rows * inner, cplx(0.0, 0.0));
  for (std::size_t o = 0; o < outer; ++o) {
    const cplx* inp = in.data() + o * cols * inner;
    cplx* outp = out.data() + o * static_cast<std::size_t>(rows) * inner;
    for (int r = 0; r < rows; ++r) {
      const cplx* trow = T.data() + static_cast<std::size_t>(r) * cols;
      cplx* dst = outp + static_cast<std::size_t>(r) * inner;
      for (int c = 0; c < cols; ++c) {
        const cplx w = trow[c];
        if (w == cplx(0.0, 0.0)) continue;
        const cplx* src = inp + static_cast<std::size_t>(c) * inner;
        for (std::size_t j = 0; j < inner; ++j) dst[j] += w * src[j];
      }
    }
  }
  extent[axis] = rows;
  return out;
}

}  // namespace

ScalarField spectral_resample_shifted(const ScalarField& u, const GridSpec& target,
                                      const std::vector<double>& offset) {
  const GridSpec& g = u.grid;
  if (target.dim != g.dim) throw std::invalid_argument("spectral_resample: dim mismatch");
  if (!offset.empty() && offset.size() != static_cast<std::size_t>(g.dim))
    throw std::invalid_argument("spectral_resample: offset dimension mismatch");
  const int ns = g.points_per_axis;
  const int nt = target.points_per_axis;
  auto F = forward(u);
  std::vector<int> extent(g.dim, ns);
  std::vector<cplx> work = std::move(F);
  for (int a = 0; a < g.dim; ++a) {
    const double off = offset.empty() ? 0.0 : offset[a];
    // per-axis evaluation matrix T[j,m] = exp(i k_m (x'_j - off + L_src)) / ns;
    // the +L_src phase accounts for the lattice origin at -half_width
    std::vector<cplx> T(static_cast<std::size_t>(nt) * ns);
    for (int j = 0; j < nt; ++j) {
      const double x = target.coord(j) - off + g.half_width;
      for (int m = 0; m < ns; ++m) {
        const double k = wavenumber(m, ns, g.half_width);
        if (m == ns / 2)  // split Nyquist into cosine
          T[static_cast<std::size_t>(j) * ns + m] = cplx(std::cos(k * x) / ns, 0.0);
        else
          T[static_cast<std::size_t>(j) * ns + m] = std::polar(1.0 / ns, k * x);
      }
    }
    work = apply_along_axis(work, extent, a, T, nt);
  }
  ScalarField out(target);
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = work[i].real();
  return out;
}

ScalarField spectral_resample(const ScalarField& u, const GridSpec& target) {
  return spectral_resample_shifted(u, target, {});
}

ScalarField spectral_shift(const ScalarField& u, const std::vector<double>& shift) {
  const GridSpec& g = u.grid;
  if (shift.size() != static_cast<std::size_t>(g.dim))
    throw std::invalid_argument("spectral_shift: shift dimension mismatch");
  const int n = g.points_per_axis;
  auto F = forward(u);
  std::vector<int> idx(g.dim);
  for (std::size_t i = 0; i < F.size(); ++i) {
    decode_index(g, i, idx.data());
    double phase = 0.0;
    for (int d = 0; d < g.dim; ++d) phase -= wavenumber(idx[d], n, g.half_width) * shift[d];
    F[i] *= std::polar(1.0, phase);
  }
  return inverse_real(g, std::move(F));
}

std::vector<cplx> padded_forward_r2c(int dim, int n_padded, const std::vector<double>& values) {
  std::lock_guard<std::mutex> lock(g_mutex);
  PlanEntry& e = r2c_plan(dim, n_padded);
  if (values.size() != e.in_count) throw std::invalid_argument("padded_forward_r2c: size mismatch");
  std::memcpy(e.in, values.data(), sizeof(double) * e.in_count);
  fftw_execute(e.plan);
  auto* out = static_cast<cplx*>(e.out);
  return std::vector<cplx>(out, out + e.out_count);
}

std::vector<double> padded_forward_r2c_real_part(int dim, int n_padded,
                                                 const std::vector<double>& values) {
  auto spec = padded_forward_r2c(dim, n_padded, values);
  std::vector<double> re(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) re[i] = spec[i].real();
  return re;
}

std::vector<double> padded_inverse_c2r(int dim, int n_padded, const std::vector<cplx>& spectrum) {
  std::lock_guard<std::mutex> lock(g_mutex);
  PlanEntry& e = c2r_plan(dim, n_padded);
  if (spectrum.size() != e.in_count) throw std::invalid_argument("padded_inverse_c2r: size mismatch");
  std::memcpy(e.in, spectrum.data(), sizeof(cplx) * e.in_count);
  fftw_execute(e.plan);
  auto* out = static_cast<double*>(e.out);
  return std::vector<double>(out, out + e.out_count);
}

}  // namespace choq::fft
