#include <doctest.h>

#include <cmath>

#include "mdpsmd/errors.hpp"
#include "mdpsmd/linalg.hpp"
#include "mdpsmd/rng.hpp"

using namespace mdpsmd;

TEST_CASE("project_box clamps coordinatewise") {
  CHECK(project_box({3, -5, 1}, 2.0) == Vec{2, -2, 1});
  CHECK(project_box({0.5}, 1.0) == Vec{0.5});
  CHECK(project_box({-7, 7}, 0.0) == Vec{0, 0});
  CHECK_THROWS_AS(project_box({1}, -1.0), std::domain_error);
}

TEST_CASE("project_box is idempotent and l2-nonexpansive") {
  RngStream rng = RngState(11).stream(0);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 1 + rng.next_below(6);
    double b = 3.0 * rng.next_double();
    Vec u(n), v(n);
    for (int i = 0; i < n; ++i) {
      u[i] = 20.0 * rng.next_double() - 10.0;
      v[i] = 20.0 * rng.next_double() - 10.0;
    }
    Vec pu = project_box(u, b);
    Vec pv = project_box(v, b);
    CHECK(linf_diff(project_box(pu, b), pu) == 0.0);
    double d_orig = 0.0, d_proj = 0.0;
    for (int i = 0; i < n; ++i) {
      d_orig += (u[i] - v[i]) * (u[i] - v[i]);
      d_proj += (pu[i] - pv[i]) * (pu[i] - pv[i]);
    }
    CHECK(d_proj <= d_orig + 1e-12);
  }
}

TEST_CASE("entropic_step matches hand values") {
  Vec out = entropic_step({0.5, 0.5}, {std::log(2.0), 0.0});
  CHECK(out[0] == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(out[1] == doctest::Approx(2.0 / 3).epsilon(1e-12));

  out = entropic_step({0.2, 0.8}, {0.0, 0.0});
  CHECK(out[0] == doctest::Approx(0.2));
  CHECK(out[1] == doctest::Approx(0.8));
}

TEST_CASE("entropic_step is invariant under uniform shifts and stays on the simplex") {
  RngStream rng = RngState(3).stream(0);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 2 + rng.next_below(5);
    Vec mu(n), g(n), g_shift(n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      mu[i] = 0.05 + rng.next_double();
      total += mu[i];
      g[i] = 8.0 * rng.next_double() - 4.0;
    }
    for (int i = 0; i < n; ++i) mu[i] /= total;
    double c = 100.0 * rng.next_double() - 50.0;
    for (int i = 0; i < n; ++i) g_shift[i] = g[i] + c;

    Vec a = entropic_step(mu, g);
    Vec b = entropic_step(mu, g_shift);
    CHECK(linf_diff(a, b) < 1e-12);
    double sum = 0.0;
    for (double x : a) {
      CHECK(x >= 0.0);
      sum += x;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("entropic_step survives huge exponents via the log-space path") {
  Vec out = entropic_step({0.5, 0.5}, {900.0, 1800.0});
  CHECK(out[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::isfinite(out[1]));
  CHECK_THROWS_AS(entropic_step({0.5, 0.5}, {std::nan(""), 0.0}), std::domain_error);
}

TEST_CASE("capped_entropic_step rescales only above the cap") {
  CHECK(capped_entropic_step({1, 1}, {0, 0}, 2.0) == Vec{1, 1});

  Vec out = capped_entropic_step({1.5, 1.0}, {0, 0}, 2.0);
  CHECK(out[0] == doctest::Approx(1.2));
  CHECK(out[1] == doctest::Approx(0.8));

  out = capped_entropic_step({1, 1}, {std::log(4.0), 0.0}, 2.0);
  CHECK(out[0] == doctest::Approx(0.25));
  CHECK(out[1] == doctest::Approx(1.0));
}

TEST_CASE("capped_entropic_step output stays in the capped orthant") {
  RngStream rng = RngState(7).stream(0);
  for (int trial = 0; trial < 300; ++trial) {
    int n = 1 + rng.next_below(5);
    Vec s(n), g(n);
    for (int i = 0; i < n; ++i) {
      s[i] = 2.0 * rng.next_double() / n;
      g[i] = 6.0 * rng.next_double() - 3.0;
    }
    Vec out = capped_entropic_step(s, g, 2.0);
    double sum = 0.0;
    for (double x : out) {
      CHECK(x >= 0.0);
      sum += x;
    }
    CHECK(sum <= 2.0 + 1e-12);
  }
}

TEST_CASE("solve_linear on the spec instances") {
  CHECK(solve_linear(Mat::identity(2), {3, 4}) == Vec{3, 4});

  Mat d(2, 2);
  d(0, 0) = 2;
  d(1, 1) = 4;
  Vec x = solve_linear(d, {2, 2});
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(0.5));

  Mat a(2, 2);
  a(0, 0) = 0.75;
  a(0, 1) = -0.25;
  a(1, 0) = -0.25;
  a(1, 1) = 0.75;
  x = solve_linear(a, {1, 0});
  CHECK(x[0] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(x[1] == doctest::Approx(0.5).epsilon(1e-12));

  Mat sing(2, 2);
  sing(0, 0) = 1;
  sing(0, 1) = 1;
  sing(1, 0) = 1;
  sing(1, 1) = 1;
  CHECK_THROWS_AS(solve_linear(sing, {1, 2}), SingularMatrix);
}

TEST_CASE("solve_linear residual bound on random well-conditioned systems") {
  RngStream rng = RngState(19).stream(0);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 2 + rng.next_below(49);
    Mat A(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) A(i, j) = 2.0 * rng.next_double() - 1.0;
      A(i, i) += n;  // diagonally dominant, hence well conditioned
    }
    Vec b(n);
    for (int i = 0; i < n; ++i) b[i] = 10.0 * rng.next_double() - 5.0;
    Vec x = solve_linear(A, b);
    Vec r = matvec(A, x);
    for (int i = 0; i < n; ++i) r[i] -= b[i];
    CHECK(linf_norm(r) <= 1e-8 * (1.0 + linf_norm(b)));
  }
}

TEST_CASE("inf_operator_norm is the max absolute row sum") {
  CHECK(inf_operator_norm(Mat::identity(3)) == 1.0);

  Mat m(2, 2);
  m(0, 0) = 1;
  m(0, 1) = -2;
  m(1, 1) = 0.5;
  CHECK(inf_operator_norm(m) == 3.0);

  Mat a(2, 2);
  a(0, 0) = 0.75;
  a(0, 1) = -0.25;
  a(1, 0) = -0.25;
  a(1, 1) = 0.75;
  CHECK(inf_operator_norm(invert(a)) == doctest::Approx(2.0).epsilon(1e-12));
}
