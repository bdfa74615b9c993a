#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "auctionforge/tail.hpp"

using namespace auctionforge;

namespace {

// Independent tail estimate used to re-check beta against its own definition.
double sampled_tail_mass(const std::vector<ValueDistribution>& dists,
                         double threshold, int n, std::uint64_t seed) {
  RandomStream rng(seed);
  int hits = 0;
  for (int i = 0; i < n; ++i)
    if (sample_max(dists, rng) >= threshold) ++hits;
  return static_cast<double>(hits) / n;
}

}  // namespace

TEST_CASE("anchoring point closed cases") {
  // single exponential(1): q = -ln(1 - e^{-1/2}), beta = 2q ~ 1.86550
  std::vector<ValueDistribution> e1 = {ValueDistribution::exponential(1.0)};
  double beta = anchoring_point(e1);
  CHECK(beta == doctest::Approx(1.8655042591343771).epsilon(0.03));

  // point mass 4: q = 4, beta = 8 (exact)
  std::vector<ValueDistribution> p4 = {ValueDistribution::point_mass(4.0)};
  CHECK(anchoring_point(p4) == doctest::Approx(8.0));

  // two i.i.d. {1:.5, 2:.5}: Pr[max >= 2] = 0.75 >= 1 - e^{-1/2}, so q = 2
  auto coin = ValueDistribution::discrete({1, 2}, {0.5, 0.5});
  std::vector<ValueDistribution> coins = {coin, coin};
  CHECK(anchoring_point(coins) == doctest::Approx(4.0));
}

TEST_CASE("anchoring point errors") {
  std::vector<ValueDistribution> zeros = {ValueDistribution::point_mass(0.0)};
  CHECK_THROWS_AS(anchoring_point(zeros), DegenerateInstanceError);
  // positive expectation but no positive anchor
  std::vector<ValueDistribution> thin = {
      ValueDistribution::discrete({0.0, 1.0}, {0.9, 0.1})};
  CHECK_THROWS_AS(anchoring_point(thin), DegenerateInstanceError);
}

TEST_CASE("anchoring point satisfies its defining inequality") {
  RandomStream rng(314);
  for (int trial = 0; trial < 8; ++trial) {
    std::vector<ValueDistribution> dists;
    int k = 1 + static_cast<int>(rng.next_u64() % 4);
    for (int i = 0; i < k; ++i) {
      switch (rng.next_u64() % 3) {
        case 0:
          dists.push_back(ValueDistribution::exponential(0.3 + 2 * rng.next_unit()));
          break;
        case 1: {
          double lo = rng.next_unit();
          dists.push_back(ValueDistribution::uniform(lo, lo + 0.5 + rng.next_unit()));
          break;
        }
        default:
          dists.push_back(ValueDistribution::discrete(
              {0.5 + rng.next_unit(), 2.0 + rng.next_unit()}, {0.5, 0.5}));
      }
    }
    double beta = anchoring_point(dists, 1000 + trial);
    double mass = sampled_tail_mass(dists, beta / 2.0, 1000000, 555 + trial);
    CHECK(mass >= 1.0 - 1.0 / std::sqrt(std::exp(1.0)) - 0.01);
  }
}

TEST_CASE("truncation interval formulas") {
  auto [lo2, hi2] = truncation_interval(2.0, 0.1);
  CHECK(hi2 == doctest::Approx(4.0 * std::log(10.0)));
  CHECK(lo2 == doctest::Approx(0.1));

  auto [lo3, hi3] = truncation_interval(1.0, 0.2);
  CHECK(hi3 == doctest::Approx(2.0 * std::log(5.0)));
  CHECK(lo3 == doctest::Approx(0.1));

  CHECK_THROWS_AS(truncation_interval(1.0, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(truncation_interval(0.0, 0.1), std::invalid_argument);
}

TEST_CASE("truncation ratio is (4/eps) ln(1/eps) exactly") {
  for (double eps : {0.01, 0.05, 0.1, 0.2, 0.24}) {
    auto [lo, hi] = truncation_interval(3.7, eps);
    CHECK(hi / lo ==
          doctest::Approx((4.0 / eps) * std::log(1.0 / eps)).epsilon(1e-12));
  }
}

TEST_CASE("iid reserve discrete enumeration") {
  auto coin = ValueDistribution::discrete({1, 2}, {0.5, 0.5});
  auto two = iid_reserve(coin, 2, 0.1);
  CHECK(two.reserve == doctest::Approx(2.0));
  CHECK(two.guarantee == doctest::Approx(1.5));

  auto one = iid_reserve(coin, 1, 0.1);  // both candidates score 1.0; tie -> 1
  CHECK(one.reserve == doctest::Approx(1.0));
  CHECK(one.guarantee == doctest::Approx(1.0));

  auto point = iid_reserve(ValueDistribution::point_mass(5.0), 7, 0.1);
  CHECK(point.reserve == doctest::Approx(5.0));
  CHECK(point.guarantee == doctest::Approx(5.0));
}

TEST_CASE("iid reserve discrete equals brute force over the support") {
  RandomStream rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    int sz = 2 + static_cast<int>(rng.next_u64() % 4);
    std::vector<double> sup, pr;
    double v = 0.0, rest = 1.0;
    for (int i = 0; i < sz; ++i) {
      v += 0.2 + 2.0 * rng.next_unit();
      sup.push_back(v);
      double p = i + 1 == sz ? rest : rest * (0.2 + 0.6 * rng.next_unit());
      pr.push_back(p);
      rest -= p;
    }
    auto dist = ValueDistribution::discrete(sup, pr);
    int m = 1 + static_cast<int>(rng.next_u64() % 5);
    auto got = iid_reserve(dist, m, 0.1);

    double best = -1.0, best_r = 0.0;
    for (double r : sup) {
      double below = dist.cdf_below(r);
      double g = (1.0 - std::pow(below, m)) * r;
      if (g > best + 1e-15) {
        best = g;
        best_r = r;
      }
    }
    CHECK(got.reserve == doctest::Approx(best_r));
    CHECK(got.guarantee == doctest::Approx(best));
  }
}

TEST_CASE("iid reserve guarantee never exceeds expected max") {
  auto coin = ValueDistribution::discrete({1, 2, 4}, {0.5, 0.25, 0.25});
  for (int m : {1, 2, 5, 10}) {
    auto res = iid_reserve(coin, m, 0.1);
    std::vector<ValueDistribution> copies(m, coin);
    double emax = expected_max(copies, 0, 0);  // exact, discrete
    CHECK(res.guarantee <= emax + 1e-9);
    // the objective identity at the returned reserve
    double below = coin.cdf_below(res.reserve);
    CHECK(res.guarantee ==
          doctest::Approx((1.0 - std::pow(below, m)) * res.reserve));
  }

  // continuous route: exponential, guarantee below E[max] as well
  auto exp1 = ValueDistribution::exponential(1.0);
  auto res = iid_reserve(exp1, 10, 0.1);
  std::vector<ValueDistribution> copies(10, exp1);
  double emax = expected_max(copies, 200000, 9);
  CHECK(res.guarantee <= emax + 0.02);
  CHECK(res.guarantee > 0.0);
}

TEST_CASE("tail profile bundles the pieces") {
  std::vector<ValueDistribution> p4 = {ValueDistribution::point_mass(4.0)};
  TailProfile tp = tail_profile(p4, 0.1);
  CHECK(tp.beta == doctest::Approx(8.0));
  CHECK(tp.truncLo == doctest::Approx(0.4));
  CHECK(tp.truncHi == doctest::Approx(16.0 * std::log(10.0)));
  CHECK(tp.ratio == doctest::Approx(40.0 * std::log(10.0)));
  CHECK(tp.epsilon == 0.1);
}
