#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fedprice/aggregation.hpp"
#include "fedprice/rng.hpp"

using namespace fedprice;

TEST_CASE("aggregate_mean basics") {
    CHECK(aggregate_mean({{1, 1}, {3, 3}}) == ParameterVector{2, 2});
    CHECK(aggregate_mean({{5}}) == ParameterVector{5});
    CHECK_THROWS_AS(aggregate_mean({}), std::invalid_argument);
    CHECK_THROWS_AS(aggregate_mean({{1, 2}, {3}}), std::invalid_argument);
}

TEST_CASE("aggregate_mean matches brute re-summation") {
    Rng rng(7);
    std::vector<ParameterVector> ws(3, ParameterVector(4));
    for (auto& w : ws)
        for (auto& v : w) v = rng.gaussian(0, 2);
    const ParameterVector m = aggregate_mean(ws);
    for (int k = 0; k < 4; ++k) {
        double s = 0.0;
        for (const auto& w : ws) s += w[k];
        CHECK(m[k] == doctest::Approx(s / 3.0).epsilon(1e-15));
    }
}

TEST_CASE("aggregate_mle weights") {
    // equal sigmas reduce to the mean
    const std::vector<ParameterVector> ws{{1, 4}, {3, 0}, {5, 2}};
    const auto m1 = aggregate_mle(ws, NoiseProfile({2, 2, 2}));
    const auto m2 = aggregate_mean(ws);
    for (int k = 0; k < 2; ++k) CHECK(m1[k] == doctest::Approx(m2[k]).epsilon(1e-15));
    // weight collapses onto the low-noise client
    const auto m3 = aggregate_mle({{0}, {10}}, NoiseProfile({1.0, 1e9}));
    CHECK(std::abs(m3[0]) < 1e-15);
    // sigma (1,2) gives weights (0.8, 0.2)
    const auto m4 = aggregate_mle({{0}, {5}}, NoiseProfile({1.0, 2.0}));
    CHECK(m4[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(aggregate_mle(ws, NoiseProfile({1, 2})), std::invalid_argument);
    CHECK_THROWS_AS(NoiseProfile({1.0, -2.0}), std::domain_error);
    CHECK_THROWS_AS(NoiseProfile({1.0, 0.0}), std::domain_error);
}

TEST_CASE("delta_mle values") {
    CHECK(delta_mle(NoiseProfile({1, 1, 1, 1})) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(delta_mle(NoiseProfile({3.7})) == doctest::Approx(3.7).epsilon(1e-15));
    CHECK(delta_mle(NoiseProfile({1, 2})) ==
          doctest::Approx(0.8944271909999159).epsilon(1e-15));
}

TEST_CASE("delta_mean values") {
    CHECK(delta_mean(NoiseProfile({1, 1, 1, 1})) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(delta_mean(NoiseProfile({1, 2})) ==
          doctest::Approx(1.118033988749895).epsilon(1e-15));
}

TEST_CASE("delta_mle below min sigma; ordering vs delta_mean") {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_below(19));
        std::vector<double> s(n);
        for (auto& v : s) v = std::exp(rng.uniform(-1.5, 1.5));
        const NoiseProfile prof(s);
        double smin = s[0];
        for (double v : s) smin = std::min(smin, v);
        CHECK(delta_mle(prof) < smin);
        CHECK(delta_mle(prof) <= delta_mean(prof) + 1e-15);
    }
    // equality exactly on equal-sigma profiles
    for (double v : {0.3, 1.0, 7.7}) {
        const NoiseProfile eq({v, v, v});
        CHECK(delta_mle(eq) == doctest::Approx(delta_mean(eq)).epsilon(1e-14));
    }
}

TEST_CASE("delta_mle symmetric and increasing in each sigma") {
    const NoiseProfile a({1.0, 2.0, 0.5});
    const NoiseProfile b({0.5, 1.0, 2.0});
    CHECK(delta_mle(a) == doctest::Approx(delta_mle(b)).epsilon(1e-15));
    NoiseProfile c = a;
    c.sigmas[1] *= 1.01;
    CHECK(delta_mle(c) > delta_mle(a));
}

TEST_CASE("delta_incomplete") {
    // truthful profile reduces to delta_mle to machine precision
    const NoiseProfile s({1.3, 0.8, 2.2});
    CHECK(delta_incomplete(s, s) == doctest::Approx(delta_mle(s)).epsilon(1e-14));
    CHECK(delta_incomplete(NoiseProfile({1, 1}), NoiseProfile({1, 1})) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    // actual (2,2) vs presumed (1,1): sqrt(4+4)/2 = sqrt(2)
    CHECK(delta_incomplete(NoiseProfile({2, 2}), NoiseProfile({1, 1})) ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    // single client: the presumed weighting cancels
    CHECK(delta_incomplete(NoiseProfile({3.1}), NoiseProfile({0.4})) ==
          doctest::Approx(3.1).epsilon(1e-15));
    CHECK_THROWS_AS(delta_incomplete(NoiseProfile({1}), NoiseProfile({1, 2})),
                    std::invalid_argument);
}

TEST_CASE("convergence_bound") {
    const LearningConfig cfg = LearningConfig::make(1.0, 1.0, 30);
    CHECK(cfg.kappa() == 16.0);
    CHECK(convergence_bound(0.0, cfg) == 0.0);
    CHECK(convergence_bound(1.0, cfg) == doctest::Approx(24.0).epsilon(1e-15));
    CHECK(convergence_bound(1.0, cfg) < convergence_bound(2.0, cfg));
    CHECK_THROWS_AS(convergence_bound(-0.1, cfg), std::domain_error);
    CHECK_THROWS_AS(LearningConfig::make(0.0, 1.0, 30), std::domain_error);
    CHECK_THROWS_AS(LearningConfig::make(1.0, -1.0, 30), std::domain_error);
    CHECK_THROWS_AS(LearningConfig::make(1.0, 1.0, 0), std::domain_error);
}

TEST_CASE("Monte-Carlo: aggregate spread matches the delta formulas") {
    const NoiseProfile prof({1.0, 2.0, 0.7});
    const int trials = 200000;
    Rng rng(99);
    double sum_mle = 0, sq_mle = 0, sum_mean = 0, sq_mean = 0;
    for (int t = 0; t < trials; ++t) {
        std::vector<ParameterVector> noisy(3, ParameterVector(1));
        for (int i = 0; i < 3; ++i) noisy[i][0] = rng.gaussian(0.0, prof[i]);
        const double m = aggregate_mle(noisy, prof)[0];
        const double a = aggregate_mean(noisy)[0];
        sum_mle += m;
        sq_mle += m * m;
        sum_mean += a;
        sq_mean += a * a;
    }
    const double std_mle = std::sqrt(sq_mle / trials - (sum_mle / trials) * (sum_mle / trials));
    const double std_mean =
        std::sqrt(sq_mean / trials - (sum_mean / trials) * (sum_mean / trials));
    // sample std has relative standard error ~ 1/sqrt(2 trials)
    const double se = 1.0 / std::sqrt(2.0 * trials);
    CHECK(std::abs(std_mle / delta_mle(prof) - 1.0) < 3.0 * se);
    CHECK(std::abs(std_mean / delta_mean(prof) - 1.0) < 3.0 * se);
}

TEST_CASE("Monte-Carlo: misweighted aggregation matches delta_incomplete") {
    const NoiseProfile actual({2.0, 2.0});
    const NoiseProfile presumed({1.0, 1.0});
    const int trials = 200000;
    Rng rng(123);
    double sum = 0, sq = 0;
    for (int t = 0; t < trials; ++t) {
        std::vector<ParameterVector> noisy(2, ParameterVector(1));
        for (int i = 0; i < 2; ++i) noisy[i][0] = rng.gaussian(0.0, actual[i]);
        const double m = aggregate_mle(noisy, presumed)[0];
        sum += m;
        sq += m * m;
    }
    const double sd = std::sqrt(sq / trials - (sum / trials) * (sum / trials));
    CHECK(std::abs(sd / delta_incomplete(actual, presumed) - 1.0) <
          3.0 / std::sqrt(2.0 * trials));
}
