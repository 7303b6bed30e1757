#include <doctest.h>

#include <cmath>
#include <vector>

#include "qbin/rng.hpp"
#include "qbin/stats.hpp"

using namespace qbin;

TEST_CASE("average ranks with ties") {
  std::vector<double> v{10, 20, 20, 30};
  std::vector<double> r(4);
  average_ranks(v, r);
  CHECK(r[0] == doctest::Approx(1.0));
  CHECK(r[1] == doctest::Approx(2.5));
  CHECK(r[2] == doctest::Approx(2.5));
  CHECK(r[3] == doctest::Approx(4.0));
}

TEST_CASE("spearman on perfectly monotone data") {
  std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> up{10, 20, 30, 40, 50}, down{5, 4, 3, 2, 1};
  CHECK(spearman_rho(x, up).rho == doctest::Approx(1.0));
  CHECK(spearman_rho(x, down).rho == doctest::Approx(-1.0));
}

TEST_CASE("spearman hand example rho = 0.8") {
  std::vector<double> x{1, 2, 3, 4, 5}, y{1, 3, 2, 5, 4};
  auto r = spearman_rho(x, y);
  CHECK(r.rho == doctest::Approx(0.8).epsilon(1e-12));
  // reference p-value (t-approximation, two-sided)
  CHECK(r.p_value == doctest::Approx(0.10408803866182788).epsilon(1e-9));
}

TEST_CASE("spearman is invariant under strictly increasing transforms") {
  Rng rng(5);
  std::vector<double> x, y;
  for (int i = 0; i < 40; ++i) {
    x.push_back(rng.uniform(0, 10));
    y.push_back(rng.uniform(0, 10));
  }
  auto base = spearman_rho(x, y);
  std::vector<double> xt, yt;
  for (double v : x) xt.push_back(std::exp(v));
  for (double v : y) yt.push_back(v * v * v + 7);
  auto mapped = spearman_rho(xt, yt);
  CHECK(mapped.rho == doctest::Approx(base.rho).epsilon(1e-12));
}

TEST_CASE("spearman input validation") {
  std::vector<double> two{1, 2};
  CHECK_THROWS(spearman_rho(two, two));
  std::vector<double> x{1, 2, 3}, flat{4, 4, 4};
  CHECK_THROWS(spearman_rho(x, flat));
  CHECK_THROWS(spearman_rho(flat, x));
}

TEST_CASE("welch test reference values") {
  std::vector<double> a{1, 2, 3, 4}, b{10, 11, 12, 13};
  auto r = welch_t_test(a, b);
  CHECK(r.t == doctest::Approx(-9.85900603509299).epsilon(1e-12));
  CHECK(r.df == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(r.p == doctest::Approx(6.280125725146634e-05).epsilon(1e-9));
  CHECK(r.p < 0.001);
  CHECK(r.significant_at_0_05);
}

TEST_CASE("welch is antisymmetric and symmetric in p") {
  std::vector<double> a{1, 5, 2, 8}, b{3, 3, 9, 1};
  auto r1 = welch_t_test(a, b);
  auto r2 = welch_t_test(b, a);
  CHECK(r1.t == doctest::Approx(-r2.t).epsilon(1e-12));
  CHECK(r1.p == doctest::Approx(r2.p).epsilon(1e-12));
}

TEST_CASE("paired test reference values") {
  std::vector<double> a{1, 2, 3}, b{2, 4, 3};
  auto r = paired_t_test(a, b);
  CHECK(r.t == doctest::Approx(-1.7320508075688774).epsilon(1e-12));
  CHECK(r.p == doctest::Approx(0.22540333075851657).epsilon(1e-9));
  CHECK_FALSE(r.significant_at_0_05);
}

TEST_CASE("degenerate paired tests throw") {
  std::vector<double> a{1, 2, 3};
  CHECK_THROWS(paired_t_test(a, a));               // identical groups
  std::vector<double> shifted{2, 3, 4};
  CHECK_THROWS(paired_t_test(a, shifted));         // constant shift, zero-variance diffs
  std::vector<double> uneven{1, 2};
  CHECK_THROWS(paired_t_test(a, uneven));          // length mismatch
}

TEST_CASE("welch rejects groups that are too small or both constant") {
  std::vector<double> one{1}, two{1, 2};
  CHECK_THROWS(welch_t_test(one, two));
  std::vector<double> c1{3, 3}, c2{5, 5};
  CHECK_THROWS(welch_t_test(c1, c2));
}

TEST_CASE("significance_test dispatches on the paired flag") {
  std::vector<double> a{1, 2, 3, 4}, b{10, 11, 12, 14};
  auto unpaired = significance_test(a, b, false);
  auto wr = welch_t_test(a, b);
  CHECK(unpaired.t == wr.t);
  auto paired = significance_test(a, b, true);
  auto pr = paired_t_test(a, b);
  CHECK(paired.t == pr.t);
}
