#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "htif/errors.hpp"
#include "htif/rv_core.hpp"
#include "htif/tail_stats.hpp"

using namespace htif;

namespace {

std::vector<double> pareto_grid(double alpha, double scale, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = pareto_quantile({alpha, scale}, (i + 0.5) / n);
  return v;
}

std::vector<double> pareto_draws(double alpha, double scale, std::size_t n, RngHandle& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = sample_pareto({alpha, scale}, rng);
  return v;
}

}  // namespace

TEST_CASE("hill estimator by hand") {
  const std::vector<double> x{1, 2, 4, 8};
  // Top two are 8 and 4 over X_(3) = 2: mean of ln 4 and ln 2 is 1.5 ln 2.
  const auto e = hill_estimate(x, 2);
  CHECK(e.alpha_hat == doctest::Approx(1.0 / (1.5 * std::log(2.0))).epsilon(1e-14));
  CHECK(e.alpha_hat == doctest::Approx(0.9617966939).epsilon(1e-9));
  CHECK(e.k == 2);
  CHECK(e.n_samples == 4);
  CHECK(e.ci_low <= e.alpha_hat);
  CHECK(e.ci_high >= e.alpha_hat);
  CHECK(e.ci_low == doctest::Approx(e.alpha_hat * (1 - 1.96 / std::sqrt(2.0))));
}

TEST_CASE("hill estimator on an exact Pareto quantile grid") {
  const auto grid = pareto_grid(0.6, 1.0, 100000);
  const auto e = hill_estimate(grid, 1000);
  CHECK(std::abs(e.alpha_hat - 0.6) <= 0.04);
}

TEST_CASE("hill estimator is scale invariant") {
  RngHandle rng(3, 0);
  auto x = pareto_draws(0.6, 1.0, 20000, rng);
  auto y = x;
  for (auto& v : y) v *= 7.0;
  CHECK(hill_estimate(x, 500).alpha_hat == doctest::Approx(hill_estimate(y, 500).alpha_hat).epsilon(1e-12));
}

TEST_CASE("hill preconditions") {
  const std::vector<double> x{1, 2, 3};
  CHECK_THROWS_AS(hill_estimate(x, 0), std::domain_error);
  CHECK_THROWS_AS(hill_estimate(x, 3), std::domain_error);
  const std::vector<double> bad{1, 0, 3, 4};
  CHECK_THROWS_AS(hill_estimate(bad, 1), std::domain_error);
  const std::vector<double> neg{1, -2, 3, 4};
  CHECK_THROWS_AS(hill_estimate(neg, 1), std::domain_error);
}

TEST_CASE("hill sweep agrees with direct estimates") {
  RngHandle rng(4, 0);
  const auto x = pareto_draws(0.6, 1.0, 50000, rng);
  const auto ks = default_sweep_ks(x.size());
  CHECK(std::find(ks.begin(), ks.end(), default_hill_k(x.size())) != ks.end());
  CHECK(default_hill_k(100000) == 1000);
  const auto sweep = hill_sweep(x, ks);
  REQUIRE(sweep.size() == ks.size());
  for (std::size_t i = 0; i < ks.size(); ++i) {
    CHECK(sweep[i].alpha_hat == doctest::Approx(hill_estimate(x, ks[i]).alpha_hat).epsilon(1e-9));
  }
}

TEST_CASE("hill is monotone under stochastic dominance on exact grids") {
  // Heavier tail (smaller alpha) gives a smaller estimate at the same k.
  double prev = 0.0;
  for (double a : {0.3, 0.5, 0.7, 0.9}) {
    const double est = hill_estimate(pareto_grid(a, 1.0, 20000), 300).alpha_hat;
    CHECK(est > prev);
    prev = est;
  }
}

TEST_CASE("empirical quantiles use the ceil(qN)-th order statistic") {
  std::vector<double> x(10);
  std::iota(x.begin(), x.end(), 1.0);
  const std::vector<double> levels{0.1, 0.5, 0.55, 0.9, 0.99};
  const auto q = empirical_quantiles(x, levels);
  CHECK(q == std::vector<double>{1, 5, 6, 9, 10});
  CHECK(exceedance_fraction(x, 9.0) == 0.1);
}

TEST_CASE("equivalence ratio") {
  RngHandle rng(5, 0);
  const auto x = pareto_draws(0.6, 1.0, 2000000, rng);
  const auto same = equivalence_ratio(x, x, kDefaultQuantileGrid);
  for (double r : same.ratios) CHECK(r == 1.0);

  // Scale 1 against scale 2: tail ratio is 2^-0.6 wherever both tails are pure power laws.
  const auto y = pareto_draws(0.6, 2.0, 2000000, rng);
  const auto scaled = equivalence_ratio(x, y, kDefaultQuantileGrid);
  CHECK(std::abs(scaled.at(0.99) - std::pow(2.0, -0.6)) <= 0.02);
  CHECK(std::abs(scaled.at(0.999) - std::pow(2.0, -0.6)) <= 0.06);
  CHECK_FALSE(scaled.flagged_nonequivalent());

  // Different tail indices: the ratio drifts across the grid.
  const auto lighter = pareto_draws(0.8, 1.0, 2000000, rng);
  const auto mismatch = equivalence_ratio(x, lighter, kDefaultQuantileGrid);
  CHECK(mismatch.flagged_nonequivalent());
  CHECK(mismatch.ratios.back() > mismatch.ratios.front());

  const std::vector<double> small(100, 1.0);
  CHECK_THROWS_AS(equivalence_ratio(small, x, kDefaultQuantileGrid), InsufficientDataError);
}

TEST_CASE("upper-tail independence") {
  RngHandle rng(6, 0);
  const std::size_t n = 1'000'000;
  const auto x = pareto_draws(0.6, 1.0, n, rng);
  const auto y = pareto_draws(0.6, 1.0, n, rng);

  const auto comonotone = upper_tail_independence(x, x, x, kDefaultQuantileGrid);
  for (double r : comonotone.ratios) CHECK(r == 1.0);

  // Independent pairs: the ratio factorizes to P(ref > z_q) = 1 - q.
  const auto indep = upper_tail_independence(x, y, x, kDefaultQuantileGrid);
  CHECK(std::abs(indep.at(0.9) - 0.1) <= 0.005);
  CHECK(std::abs(indep.at(0.99) - 0.01) <= 0.003);
  CHECK(indep.at(0.999) <= 0.005);
  CHECK(indep.ratios.front() > indep.ratios.back());

  // Common shock: ratio -> E[min(U1,U2)^a] / E[U^a] = 0.9853435 / 1.1256484 for U ~ U[0.5, 2], a = 0.6.
  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = sample_pareto({0.6, 1.0}, rng);
    a[i] = sample_bounded_multiplier(0.5, 2.0, rng) * w;
    b[i] = sample_bounded_multiplier(0.5, 2.0, rng) * w;
  }
  const auto shock = upper_tail_independence(a, b, a, kDefaultQuantileGrid);
  CHECK(std::abs(shock.at(0.999) - 0.9853434966220959 / 1.1256483980531553) <= 0.05);

  const std::vector<double> short_y(n - 1, 1.0);
  CHECK_THROWS_AS(upper_tail_independence(x, short_y, x, kDefaultQuantileGrid), std::domain_error);
}

TEST_CASE("lagged tail dependence") {
  RngHandle rng(8, 0);
  const auto x = pareto_draws(0.6, 1.0, 200000, rng);
  const std::vector<std::size_t> lags{1, 2, 3};
  const auto d = lagged_tail_dependence(x, lags, kDefaultQuantileGrid, 100000);
  for (std::size_t lag : lags) CHECK(d.at(lag, 0.999) <= 0.01);

  // Every value repeated: half of the lag-1 pairs are duplicates.
  std::vector<double> doubled;
  for (std::size_t i = 0; i < 100000; ++i) {
    doubled.push_back(x[i]);
    doubled.push_back(x[i]);
  }
  const auto dd = lagged_tail_dependence(doubled, lags, kDefaultQuantileGrid, 100000);
  CHECK(std::abs(dd.at(1, 0.999) - 0.5) <= 0.01);
  CHECK(dd.at(2, 0.999) <= 0.01);
  CHECK_THROWS_AS(lagged_tail_dependence(std::span(x).first(1000), lags, kDefaultQuantileGrid, 100000),
                  InsufficientDataError);
}

TEST_CASE("spectral estimate") {
  RngHandle rng(9, 0);
  const std::size_t n = 100000;
  VectorSample comonotone(2), independent(2), shock(2);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = sample_pareto({0.6, 1.0}, rng);
    const double c[2] = {w, w};
    comonotone.push_back(c);
    const double ind[2] = {sample_pareto({0.6, 1.0}, rng), sample_pareto({0.6, 1.0}, rng)};
    independent.push_back(ind);
    const double s[2] = {sample_bounded_multiplier(0.5, 2.0, rng) * w, sample_bounded_multiplier(0.5, 2.0, rng) * w};
    shock.push_back(s);
  }

  const auto co = spectral_estimate(comonotone, 0.99, 10);
  CHECK(co.norm == "L1");
  CHECK(co.exceedances >= 500);
  CHECK(co.histogram[5] == 1.0);
  for (std::size_t i = 0; i < co.exceedances; ++i) {
    CHECK(co.angle(i)[0] == 0.5);
    CHECK(co.angle(i)[1] == 0.5);
  }

  const auto ind = spectral_estimate(independent, 0.99, 10);
  CHECK(ind.histogram[0] + ind.histogram[9] >= 0.8);
  for (std::size_t i = 0; i < ind.exceedances; ++i) {
    CHECK(std::abs(ind.angle(i)[0] + ind.angle(i)[1] - 1.0) <= 1e-12);
  }
  CHECK(std::accumulate(ind.histogram.begin(), ind.histogram.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));

  // Coordinate ratio in [1/4, 4] puts the first angular coordinate in [1/5, 4/5].
  const auto sh = spectral_estimate(shock, 0.99, 10);
  for (std::size_t i = 0; i < sh.exceedances; ++i) {
    CHECK(sh.angle(i)[0] >= 0.2 - 1e-12);
    CHECK(sh.angle(i)[0] <= 0.8 + 1e-12);
  }
  CHECK(sh.histogram[0] + sh.histogram[1] + sh.histogram[8] + sh.histogram[9] <= 1e-12);

  CHECK_THROWS_AS(spectral_estimate(comonotone, 0.999, 10), InsufficientDataError);
  VectorSample one(1);
  CHECK_THROWS_AS(spectral_estimate(one, 0.9, 10), std::domain_error);
}

TEST_CASE("radial regular-variation check") {
  // Exact Pareto(0.5) radius split over two coordinates.
  RngHandle rng(10, 0);
  VectorSample v(2);
  for (std::size_t i = 0; i < 400000; ++i) {
    const double r = sample_pareto({0.5, 1.0}, rng);
    const double u = rng.next_uniform();
    const double row[2] = {u * r, (1 - u) * r};
    v.push_back(row);
  }
  const std::vector<double> ts{1.0, 2.0};
  const std::vector<double> levels{0.99};
  const auto check = radial_rv_check(v, ts, levels);
  REQUIRE(check.rows.size() == 2);
  CHECK(check.rows[0].empirical == 1.0);
  CHECK(std::abs(check.rows[1].empirical - std::sqrt(0.5)) <= 0.03);

  // Common-shock vectors in three dimensions.
  VectorSample shock(3);
  for (std::size_t i = 0; i < 400000; ++i) {
    const double w = sample_pareto({0.6, 1.0}, rng);
    double row[3];
    for (double& x : row) x = sample_bounded_multiplier(0.5, 2.0, rng) * w;
    shock.push_back(row);
  }
  const std::vector<double> grid{2.0, 4.0, 8.0};
  const std::vector<double> base{0.995};
  const auto sc = radial_rv_check(shock, grid, base);
  CHECK(sc.max_abs_deviation <= 0.03);
  CHECK(sc.max_deviation_for(std::span(grid).first(1)) <= sc.max_abs_deviation);
}
