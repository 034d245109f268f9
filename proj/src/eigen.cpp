// Hermitian eigensolver. The reduction to real symmetric tridiagonal form follows the
// LAPACK zhetd2 scheme (reflectors H = 1 - tau v v*, with zlarfg choosing a real beta),
// done on a packed lower triangle in split real/imaginary storage, with the rank-2 update
// of step k fused into the matrix-vector product of step k + 1. The tridiagonal problem is
// solved with implicit-shift QL (tqli).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "mde/algebra.hpp"

namespace mde {

namespace {

struct Tridiagonal {
  std::vector<double> d;
  std::vector<double> e;  // e[i] couples i and i + 1; e[n - 1] = 0
  // Reflector k acts on indices k + 1 .. n - 1; v[0] = 1.
  std::vector<std::vector<Complex>> reflectors;
  std::vector<Complex> taus;
};

Tridiagonal tridiagonalize(const Matrix& a, bool keep_reflectors) {
  const std::size_t n = a.dim();
  Tridiagonal t;
  t.d.assign(n, 0.0);
  t.e.assign(n, 0.0);
  if (n == 0) return t;
  // Packed lower triangle: row i holds columns 0..i starting at i (i + 1) / 2.
  auto row = [](std::size_t i) { return i * (i + 1) / 2; };
  std::vector<double> re(row(n)), im(row(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      re[row(i) + j] = a(i, j).real();
      im[row(i) + j] = a(i, j).imag();
    }
  std::vector<double> vr(n), vi(n), wr(n), wi(n), nvr(n), nvi(n), sr(n), si(n);
  bool pending = false;  // (vr, vi, wr, wi) hold a rank-2 update not yet applied

  // A_ij -= v_i conj(w_j) + w_i conj(v_j)
  auto update_entry = [&](std::size_t i, std::size_t j) {
    const Complex vi_c(vr[i], vi[i]), wi_c(wr[i], wi[i]);
    const Complex vj_c(vr[j], vi[j]), wj_c(wr[j], wi[j]);
    const Complex delta = vi_c * std::conj(wj_c) + wi_c * std::conj(vj_c);
    re[row(i) + j] -= delta.real();
    im[row(i) + j] -= delta.imag();
  };

  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (pending)
      for (std::size_t i = k; i < n; ++i) update_entry(i, k);
    t.d[k] = re[row(k) + k];
    const double alpha_r = re[row(k + 1) + k], alpha_i = im[row(k + 1) + k];
    double xnorm2 = 0.0;
    for (std::size_t j = k + 2; j < n; ++j) {
      const double xr = re[row(j) + k], xi = im[row(j) + k];
      xnorm2 += xr * xr + xi * xi;
    }
    std::fill(nvr.begin(), nvr.end(), 0.0);
    std::fill(nvi.begin(), nvi.end(), 0.0);
    nvr[k + 1] = 1.0;
    Complex tau = 0.0;
    if (xnorm2 == 0.0 && alpha_i == 0.0) {
      t.e[k] = alpha_r;
    } else {
      const double norm = std::sqrt(alpha_r * alpha_r + alpha_i * alpha_i + xnorm2);
      const double beta = alpha_r >= 0.0 ? -norm : norm;
      const Complex alpha(alpha_r, alpha_i);
      tau = (beta - alpha) / beta;
      const Complex scale = 1.0 / (alpha - beta);
      for (std::size_t j = k + 2; j < n; ++j) {
        const Complex x = scale * Complex(re[row(j) + k], im[row(j) + k]);
        nvr[j] = x.real();
        nvi[j] = x.imag();
      }
      t.e[k] = beta;
    }
    if (keep_reflectors) {
      std::vector<Complex> v(n - k - 1);
      for (std::size_t j = k + 1; j < n; ++j) v[j - k - 1] = {nvr[j], nvi[j]};
      t.reflectors.push_back(std::move(v));
      t.taus.push_back(tau);
    }
    const bool reflect = tau != Complex(0.0);
    std::fill(sr.begin(), sr.end(), 0.0);
    std::fill(si.begin(), si.end(), 0.0);
    // One pass over the trailing lower triangle: apply the previous rank-2 update and
    // accumulate s = A v for the new reflector, using A_ji = conj(A_ij) for j < i.
    for (std::size_t i = k + 1; i < n; ++i) {
      double* __restrict ri = re.data() + row(i);
      double* __restrict ii = im.data() + row(i);
      const double* __restrict pvr = vr.data();
      const double* __restrict pvi = vi.data();
      const double* __restrict pwr = wr.data();
      const double* __restrict pwi = wi.data();
      const double* __restrict qvr = nvr.data();
      const double* __restrict qvi = nvi.data();
      double* __restrict psr = sr.data();
      double* __restrict psi = si.data();
      if (pending) {
        const double a_vr = vr[i], a_vi = vi[i], a_wr = wr[i], a_wi = wi[i];
#pragma omp simd
        for (std::size_t j = k + 1; j <= i; ++j) {
          ri[j] -= a_vr * pwr[j] + a_vi * pwi[j] + a_wr * pvr[j] + a_wi * pvi[j];
          ii[j] -= a_vi * pwr[j] - a_vr * pwi[j] + a_wi * pvr[j] - a_wr * pvi[j];
        }
      }
      if (!reflect) continue;
      const double b_vr = nvr[i], b_vi = nvi[i];
      double accr = 0.0, acci = 0.0;
#pragma omp simd reduction(+ : accr, acci)
      for (std::size_t j = k + 1; j < i; ++j) {
        accr += ri[j] * qvr[j] - ii[j] * qvi[j];
        acci += ri[j] * qvi[j] + ii[j] * qvr[j];
        psr[j] += ri[j] * b_vr + ii[j] * b_vi;
        psi[j] += ri[j] * b_vi - ii[j] * b_vr;
      }
      psr[i] += accr + ri[i] * b_vr - ii[i] * b_vi;
      psi[i] += acci + ri[i] * b_vi + ii[i] * b_vr;
    }
    if (!reflect) {
      pending = false;
      continue;
    }
    // p = tau s, alpha = -tau (p* v) / 2, w = p + alpha v.
    Complex pv = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) {
      const Complex p = tau * Complex(sr[i], si[i]);
      sr[i] = p.real();
      si[i] = p.imag();
      pv += std::conj(p) * Complex(nvr[i], nvi[i]);
    }
    const Complex half = -0.5 * tau * pv;
    std::fill(wr.begin(), wr.end(), 0.0);
    std::fill(wi.begin(), wi.end(), 0.0);
    for (std::size_t i = k + 1; i < n; ++i) {
      const Complex w = Complex(sr[i], si[i]) + half * Complex(nvr[i], nvi[i]);
      wr[i] = w.real();
      wi[i] = w.imag();
    }
    vr.swap(nvr);
    vi.swap(nvi);
    pending = true;
  }
  if (pending) update_entry(n - 1, n - 1);
  t.d[n - 1] = re[row(n - 1) + n - 1];
  t.e[n - 1] = 0.0;
  return t;
}

// Implicit QL on (d, e); rotations are applied to the columns of z when given.
void tql(std::vector<double>& d, std::vector<double>& e, Matrix* z) {
  const int n = static_cast<int>(d.size());
  const long cap = 64L * std::max(n, 1);
  long total = 0;
  for (int l = 0; l < n; ++l) {
    int m = l;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
      }
      if (m == l) break;
      if (++total > cap)
        throw NumericFailure("herm_eigen: QL iteration cap of " + std::to_string(cap) +
                             " sweeps exceeded");
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0, c = 1.0, p = 0.0;
      int i = m - 1;
      bool underflow = false;
      for (; i >= l; --i) {
        double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
        if (z != nullptr) {
          Matrix& zz = *z;
          for (std::size_t k = 0; k < zz.dim(); ++k) {
            const Complex zf = zz(k, i + 1);
            zz(k, i + 1) = s * zz(k, i) + c * zf;
            zz(k, i) = c * zz(k, i) - s * zf;
          }
        }
      }
      if (underflow) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    } while (m != l);
  }
  for (double v : d)
    if (!std::isfinite(v)) throw NumericFailure("herm_eigen: non-finite eigenvalue");
}

void check_finite(const Hermitian& a) {
  if (!a.matrix().is_finite()) throw NumericFailure("herm_eigen: input is not finite");
}

}  // namespace

std::vector<double> herm_eigenvalues(const Hermitian& a) {
  check_finite(a);
  const std::size_t n = a.dim();
  if (n == 1) return {a(0, 0).real()};
  if (n == 2) {
    const double p = a(0, 0).real(), q = a(1, 1).real();
    const double mid = 0.5 * (p + q);
    const double rad = std::hypot(0.5 * (p - q), std::abs(a(0, 1)));
    return {mid - rad, mid + rad};
  }
  Tridiagonal t = tridiagonalize(a, false);
  tql(t.d, t.e, nullptr);
  std::sort(t.d.begin(), t.d.end());
  return t.d;
}

EigenSystem herm_eigen(const Hermitian& a) {
  check_finite(a);
  const std::size_t n = a.dim();
  Tridiagonal t = tridiagonalize(a, true);
  // Q = H_0 H_1 ... H_{n-2}, accumulated backwards.
  Matrix q = Matrix::identity(n);
  for (std::size_t k = t.reflectors.size(); k-- > 0;) {
    const Complex tau = t.taus[k];
    if (tau == Complex(0.0)) continue;
    const auto& v = t.reflectors[k];
    const std::size_t o = k + 1;
    for (std::size_t j = o; j < n; ++j) {
      Complex dot = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) dot += std::conj(v[i]) * q(o + i, j);
      dot *= tau;
      for (std::size_t i = 0; i < v.size(); ++i) q(o + i, j) -= v[i] * dot;
    }
  }
  tql(t.d, t.e, &q);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return t.d[x] < t.d[y]; });
  EigenSystem es{std::vector<double>(n), Matrix(n)};
  for (std::size_t c = 0; c < n; ++c) {
    es.values[c] = t.d[order[c]];
    for (std::size_t i = 0; i < n; ++i) es.vectors(i, c) = q(i, order[c]);
  }
  return es;
}

}  // namespace mde
