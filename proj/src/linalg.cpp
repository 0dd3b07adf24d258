#include "mdpsmd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mdpsmd/errors.hpp"

namespace mdpsmd {

Mat Mat::identity(int n) {
  Mat I(n, n);
  for (int i = 0; i < n; ++i) I(i, i) = 1.0;
  return I;
}

bool all_finite(const Vec& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

double dot(const Vec& x, const Vec& y) {
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double l1_norm(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

double linf_norm(const Vec& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

double linf_diff(const Vec& x, const Vec& y) {
  double s = 0.0;
  for (size_t i = 0; i < x.size(); ++i) s = std::max(s, std::abs(x[i] - y[i]));
  return s;
}

Vec matvec(const Mat& A, const Vec& x) {
  Vec out(A.rows, 0.0);
  for (int r = 0; r < A.rows; ++r) {
    const double* row = A.row_ptr(r);
    double s = 0.0;
    for (int c = 0; c < A.cols; ++c) s += row[c] * x[c];
    out[r] = s;
  }
  return out;
}

Vec matvec_t(const Mat& A, const Vec& x) {
  Vec out(A.cols, 0.0);
  for (int r = 0; r < A.rows; ++r) {
    const double* row = A.row_ptr(r);
    for (int c = 0; c < A.cols; ++c) out[c] += row[c] * x[r];
  }
  return out;
}

Mat matmul(const Mat& A, const Mat& B) {
  Mat C(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int k = 0; k < A.cols; ++k) {
      double aik = A(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < B.cols; ++j) C(i, j) += aik * B(k, j);
    }
  return C;
}

Vec project_box(const Vec& v, double b) {
  if (!(b >= 0.0)) throw std::domain_error("project_box: negative radius");
  Vec out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = std::clamp(v[i], -b, b);
  return out;
}

Vec entropic_step(const Vec& mu, const Vec& eta_g) {
  if (mu.size() != eta_g.size()) throw std::invalid_argument("entropic_step: size mismatch");
  if (!all_finite(mu) || !all_finite(eta_g))
    throw std::domain_error("entropic_step: non-finite input");

  // Subtract the max exponent before exponentiating once arguments get large;
  // a uniform shift cancels in the renormalization.
  double max_arg = 0.0;
  for (double g : eta_g) max_arg = std::max(max_arg, -g);
  double shift = max_arg > 500.0 ? max_arg : 0.0;

  Vec w(mu.size());
  double total = 0.0;
  for (size_t i = 0; i < mu.size(); ++i) {
    w[i] = std::max(mu[i] * std::exp(-eta_g[i] - shift), 1e-300);
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

Vec capped_entropic_step(const Vec& s, const Vec& eta_g, double cap) {
  if (s.size() != eta_g.size()) throw std::invalid_argument("capped_entropic_step: size mismatch");
  if (!all_finite(s) || !all_finite(eta_g))
    throw std::domain_error("capped_entropic_step: non-finite input");
  Vec out(s.size());
  double total = 0.0;
  for (size_t i = 0; i < s.size(); ++i) {
    out[i] = s[i] * std::exp(-eta_g[i]);
    total += out[i];
  }
  if (total > cap) {
    double scale = cap / total;
    for (double& x : out) x *= scale;
  }
  return out;
}

Vec solve_linear(const Mat& A, const Vec& b) {
  if (A.rows != A.cols || A.rows != static_cast<int>(b.size()))
    throw std::invalid_argument("solve_linear: shape mismatch");
  int n = A.rows;
  Mat U = A;
  Vec x = b;

  double scale = 0.0;
  for (double v : U.a) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) throw SingularMatrix("solve_linear: zero matrix");

  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = std::abs(U(k, k));
    for (int r = k + 1; r < n; ++r) {
      double v = std::abs(U(r, k));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best <= 1e-12 * scale) throw SingularMatrix("solve_linear: singular within tolerance");
    if (piv != k) {
      for (int c = k; c < n; ++c) std::swap(U(k, c), U(piv, c));
      std::swap(x[k], x[piv]);
    }
    for (int r = k + 1; r < n; ++r) {
      double f = U(r, k) / U(k, k);
      if (f == 0.0) continue;
      U(r, k) = 0.0;
      for (int c = k + 1; c < n; ++c) U(r, c) -= f * U(k, c);
      x[r] -= f * x[k];
    }
  }
  for (int k = n - 1; k >= 0; --k) {
    double s = x[k];
    for (int c = k + 1; c < n; ++c) s -= U(k, c) * x[c];
    x[k] = s / U(k, k);
  }
  return x;
}

double inf_operator_norm(const Mat& A) {
  double best = 0.0;
  for (int r = 0; r < A.rows; ++r) {
    double s = 0.0;
    const double* row = A.row_ptr(r);
    for (int c = 0; c < A.cols; ++c) s += std::abs(row[c]);
    best = std::max(best, s);
  }
  return best;
}

Mat invert(const Mat& A) {
  int n = A.rows;
  Mat inv(n, n);
  for (int c = 0; c < n; ++c) {
    Vec e(n, 0.0);
    e[c] = 1.0;
    Vec col = solve_linear(A, e);
    for (int r = 0; r < n; ++r) inv(r, c) = col[r];
  }
  return inv;
}

}  // namespace mdpsmd
