#include <doctest.h>

#include <cmath>

#include "mdpsmd/errors.hpp"
#include "mdpsmd/sampling.hpp"

using namespace mdpsmd;

TEST_CASE("alias table reconstructs the input distribution") {
  RngStream rng = RngState(5).stream(0);
  for (int trial = 0; trial < 100; ++trial) {
    int n = 1 + rng.next_below(17);
    Vec w(n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      w[i] = rng.next_double();
      total += w[i];
    }
    if (total == 0.0) w[0] = total = 1.0;
    AliasTable t(w);
    Vec p = t.reconstruct();
    for (int i = 0; i < n; ++i) CHECK(std::abs(p[i] - w[i] / total) < 1e-12);
  }
}

TEST_CASE("alias table rejects bad weights") {
  CHECK_THROWS_AS(AliasTable(Vec{0.0, 0.0}), std::domain_error);
  CHECK_THROWS_AS(AliasTable(Vec{1.0, -0.5}), std::domain_error);
  CHECK_THROWS_AS(AliasTable(Vec{}), std::domain_error);
}

TEST_CASE("alias table singleton always returns 0") {
  AliasTable t(Vec{1.0});
  RngStream rng = RngState(1).stream(0);
  for (int i = 0; i < 100; ++i) CHECK(t.sample(rng) == 0);
}

TEST_CASE("alias table empirical frequencies within the binomial band") {
  const int N = 1000000;
  {
    AliasTable t(Vec{0.5, 0.5});
    RngStream rng = RngState(42).stream(0);
    long long zeros = 0;
    for (int i = 0; i < N; ++i) zeros += t.sample(rng) == 0;
    CHECK(std::abs(zeros / double(N) - 0.5) < 0.002);
  }
  {
    AliasTable t(Vec{1.0, 3.0});
    RngStream rng = RngState(43).stream(0);
    long long zeros = 0;
    for (int i = 0; i < N; ++i) zeros += t.sample(rng) == 0;
    CHECK(std::abs(zeros / double(N) - 0.25) < 0.002);
  }
}

TEST_CASE("sum tree update and totals") {
  SumTree t(Vec{1, 3});
  CHECK(t.total() == 4.0);
  t.update(0, 3.0);
  CHECK(t.total() == 6.0);
  CHECK_THROWS_AS(t.update(5, 1.0), std::out_of_range);
  CHECK_THROWS_AS(t.update(0, -1.0), std::domain_error);
}

TEST_CASE("sum tree never draws a zero weight") {
  SumTree t(Vec{1, 1, 1});
  t.update(1, 0.0);
  RngStream rng = RngState(9).stream(0);
  for (int i = 0; i < 100000; ++i) CHECK(t.sample(rng) != 1);
  t.update(0, 0.0);
  t.update(2, 0.0);
  CHECK_THROWS_AS(t.sample(rng), EmptyDistribution);
}

TEST_CASE("sum tree cumulative walk places u deterministically") {
  SumTree t(Vec{1, 3});
  CHECK(t.sample_u(0.5) == 1);  // 0.5*4 = 2 falls in [1,4)
  CHECK(t.sample_u(0.1) == 0);
  SumTree t2(Vec{1, 0, 0});
  CHECK(t2.sample_u(0.9999) == 0);
}

TEST_CASE("sum tree totals match a rebuilt tree after random updates") {
  RngStream rng = RngState(77).stream(0);
  int n = 100;
  Vec w(n);
  for (int i = 0; i < n; ++i) w[i] = rng.next_double();
  SumTree incremental(w);
  for (int step = 0; step < 10000; ++step) {
    int idx = rng.next_below(n);
    double nw = 2.0 * rng.next_double();
    w[idx] = nw;
    incremental.update(idx, nw);
  }
  SumTree fresh(w);
  CHECK(std::abs(incremental.total() - fresh.total()) <= 1e-9 * (1.0 + fresh.total()));
  CHECK(incremental.drift() <= 1e-9);
}

TEST_CASE("sum tree empirical frequencies") {
  SumTree t(Vec{2, 1, 1});
  RngStream rng = RngState(4).stream(0);
  const int N = 1000000;
  long long counts[3] = {0, 0, 0};
  for (int i = 0; i < N; ++i) ++counts[t.sample(rng)];
  CHECK(std::abs(counts[0] / double(N) - 0.5) < 0.002);
  CHECK(std::abs(counts[1] / double(N) - 0.25) < 0.002);
  CHECK(std::abs(counts[2] / double(N) - 0.25) < 0.002);
}

TEST_CASE("alias and sum tree induce the same distribution (chi-square)") {
  RngStream wrng = RngState(123).stream(0);
  int n = 16;
  Vec w(n);
  for (int i = 0; i < n; ++i) w[i] = 0.1 + wrng.next_double();
  double total = 0.0;
  for (double x : w) total += x;
  Vec probs(n);
  for (int i = 0; i < n; ++i) probs[i] = w[i] / total;

  const int N = 1000000;
  AliasTable alias(w);
  SumTree tree(w);
  RngStream r1 = RngState(200).stream(0);
  RngStream r2 = RngState(201).stream(0);
  std::vector<long long> c1(n, 0), c2(n, 0);
  for (int i = 0; i < N; ++i) {
    ++c1[alias.sample(r1)];
    ++c2[tree.sample(r2)];
  }
  CHECK(chi_square_test(c1, probs) > 0.001);
  CHECK(chi_square_test(c2, probs) > 0.001);
}

TEST_CASE("linear scan sampler agrees with the tree partition") {
  Vec w{1, 3};
  RngStream r1 = RngState(31).stream(0);
  RngStream r2 = RngState(31).stream(0);
  SumTree tree(w);
  for (int i = 0; i < 1000; ++i) CHECK(linear_scan_sample(w, r1) == tree.sample(r2));
}

TEST_CASE("chi_square_sf sanity") {
  // median of chi2 with 1 dof is ~0.455
  CHECK(chi_square_sf(0.455, 1) == doctest::Approx(0.5).epsilon(0.01));
  CHECK(chi_square_sf(37.697, 15) == doctest::Approx(0.001).epsilon(0.02));
  CHECK(chi_square_sf(0.0, 3) == 1.0);
}

TEST_CASE("identical seeds reproduce identical draw sequences") {
  RngStream a = RngState(99).stream(2);
  RngStream b = RngState(99).stream(2);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
  RngStream c = RngState(99).stream(3);
  bool differs = false;
  for (int i = 0; i < 10; ++i) differs |= (RngState(99).stream(2).next_u64() != c.next_u64());
  CHECK(differs);
}
