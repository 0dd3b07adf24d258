#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace mdpsmd {

using Vec = std::vector<double>;

// Dense row-major matrix.
struct Mat {
  int rows = 0;
  int cols = 0;
  Vec a;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}

  double& operator()(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }
  const double* row_ptr(int r) const { return a.data() + static_cast<size_t>(r) * cols; }

  static Mat identity(int n);
};

bool all_finite(const Vec& v);
double dot(const Vec& x, const Vec& y);
double l1_norm(const Vec& v);
double linf_norm(const Vec& v);
double linf_diff(const Vec& x, const Vec& y);

Vec matvec(const Mat& A, const Vec& x);       // A * x
Vec matvec_t(const Mat& A, const Vec& x);     // A^T * x
Mat matmul(const Mat& A, const Mat& B);

// Coordinatewise clamp to [-b, b]; the Euclidean projection onto the box.
Vec project_box(const Vec& v, double b);

// KL-prox step on the simplex: out_k proportional to mu_k * exp(-eta_g_k),
// renormalized to sum 1. Computes in shifted log space when needed.
Vec entropic_step(const Vec& mu, const Vec& eta_g);

// Prox step for the rescaled KL on {s >= 0, sum(s) <= cap}: multiplicative
// update, then uniform rescale onto the cap when the budget is exceeded.
Vec capped_entropic_step(const Vec& s, const Vec& eta_g, double cap);

// Gaussian elimination with partial pivoting. Throws SingularMatrix when a
// pivot falls below 1e-12 relative tolerance.
Vec solve_linear(const Mat& A, const Vec& b);

// max over rows of the absolute row sum.
double inf_operator_norm(const Mat& A);

Mat invert(const Mat& A);

// Compensated (Neumaier) accumulator; keeps long running sums accurate.
struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

}  // namespace mdpsmd
