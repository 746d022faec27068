#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "rrtime/rng.hpp"
#include "rrtime/stats.hpp"

using namespace rrtime;

TEST_CASE("type-7 quantiles") {
  const std::vector<double> v = {3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0};
  CHECK(quantile(v, 0.0) == 1.0);
  CHECK(quantile(v, 1.0) == 9.0);
  CHECK(quantile(v, 0.5) == doctest::Approx(3.5));
  // h = (n - 1) p = 7 * 0.25 = 1.75 -> 1 + 0.75 * (2 - 1)
  CHECK(quantile(v, 0.25) == doctest::Approx(1.75));
  CHECK(quantile(std::vector<double>{7.0}, 0.3) == 7.0);
  CHECK_THROWS(quantile(std::vector<double>{}, 0.5));
  CHECK_THROWS(quantile(v, 1.5));
}

TEST_CASE("mean and sample variance") {
  const std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
  CHECK(mean(v) == 2.5);
  CHECK(sample_variance(v) == doctest::Approx(5.0 / 3.0));
}

TEST_CASE("normal quantile matches Boost across the range") {
  const boost::math::normal_distribution<double> nd;
  for (double p : {1e-300, 1e-100, 1e-20, 1e-10, 1e-5, 0.001, 0.01, 0.025, 0.05, 0.1, 0.2, 0.3, 0.425, 0.5, 0.575,
                   0.7, 0.9, 0.95, 0.975, 0.99, 0.999, 1 - 1e-10}) {
    const double expected = boost::math::quantile(nd, p);
    CHECK(std::abs(normal_quantile(p) - expected) <= 1e-12 * std::max(1.0, std::abs(expected)));
  }
  CHECK(std::abs(normal_quantile(0.05) + 1.6449) < 1e-4);
  CHECK(std::abs(normal_quantile(0.975) - 1.9600) < 1e-4);
  CHECK_THROWS(normal_quantile(0.0));
  CHECK_THROWS(normal_quantile(1.0));
}

TEST_CASE("normal cdf inverts the quantile") {
  for (double p = 0.001; p < 1.0; p += 0.01) CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
}

TEST_CASE("chi-squared survival matches Boost") {
  for (double dof : {1.0, 5.0, 19.0})
    for (double x : {0.5, 3.0, 19.0, 40.0}) {
      const boost::math::chi_squared_distribution<double> cs(dof);
      CHECK(chi_square_sf(x, dof) == doctest::Approx(boost::math::cdf(boost::math::complement(cs, x))).epsilon(1e-12));
    }
}

TEST_CASE("rank uniformity test") {
  std::vector<int> uniform_ranks;
  for (int i = 0; i < 2000; ++i) uniform_ranks.push_back(i % 200);
  CHECK(rank_uniformity_pvalue(uniform_ranks, 199, 20) > 0.999);
  std::vector<int> piled(2000, 0);
  CHECK(rank_uniformity_pvalue(piled, 199, 20) < 1e-10);
  CHECK_THROWS(rank_uniformity_pvalue(uniform_ranks, 198, 20));

  RandomStream r(4);
  std::vector<int> random_ranks;
  for (int i = 0; i < 1000; ++i) random_ranks.push_back(static_cast<int>(r.uniform() * 200));
  CHECK(rank_uniformity_pvalue(random_ranks, 199, 20) > 1e-3);
}

TEST_CASE("KS distance") {
  const std::vector<double> s = {0.5};
  // Empirical CDF jumps from 0 to 1 at 0.5; against U(0,1) the sup gap is 0.5.
  CHECK(ks_distance(s, [](double x) { return std::clamp(x, 0.0, 1.0); }) == doctest::Approx(0.5));
  RandomStream r(6);
  std::vector<double> z(20000);
  for (auto& v : z) v = r.normal();
  CHECK(ks_distance(z, normal_cdf) < 0.015);
  CHECK(ks_distance(z, [](double x) { return normal_cdf(x - 0.2); }) > 0.05);
}
