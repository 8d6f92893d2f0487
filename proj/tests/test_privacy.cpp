#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fedprice/privacy.hpp"

using namespace fedprice;

TEST_CASE("min_noise_multiplier matches closed form") {
    // delta = 1.25 e^{-1/2} solves 2 ln(1.25/delta) = 1
    CHECK(min_noise_multiplier(1.25 * std::exp(-0.5)) == doctest::Approx(1.0).epsilon(1e-14));
    // direct evaluation of sqrt(2 ln(1.25e5)), cross-checked at 30 digits
    CHECK(min_noise_multiplier(1e-5) ==
          doctest::Approx(4.8448052626053894).epsilon(1e-14));
}

TEST_CASE("min_noise_multiplier domain") {
    CHECK_THROWS_AS(min_noise_multiplier(1.25), std::domain_error);  // ln(1)=0 but delta >= 1
    CHECK_THROWS_AS(min_noise_multiplier(0.0), std::domain_error);
    CHECK_THROWS_AS(min_noise_multiplier(1.0), std::domain_error);
    CHECK_THROWS_AS(min_noise_multiplier(-0.1), std::domain_error);
}

TEST_CASE("min_noise_multiplier strictly decreasing in delta") {
    double prev = min_noise_multiplier(1e-9);
    for (double d = 1e-8; d < 1.0; d *= 10.0) {
        const double c = min_noise_multiplier(d);
        CHECK(c < prev);
        prev = c;
    }
}

TEST_CASE("PrivacyParams invariants") {
    CHECK_THROWS_AS(PrivacyParams(1.0, 1.0, 1e-5), std::domain_error);  // c too small
    CHECK_THROWS_AS(PrivacyParams(5.0, 0.0, 1e-5), std::domain_error);
    CHECK_THROWS_AS(PrivacyParams(5.0, 1.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(PrivacyParams(5.0, 1.0, 1.0), std::domain_error);
    const PrivacyParams p = PrivacyParams::minimal(1.0, 1e-5);
    CHECK(p.c == doctest::Approx(min_noise_multiplier(1e-5)));
}

TEST_CASE("EpsilonBudget domain") {
    CHECK_THROWS_AS(EpsilonBudget(0.0), std::domain_error);
    CHECK_THROWS_AS(EpsilonBudget(1.0), std::domain_error);
    CHECK_THROWS_AS(EpsilonBudget(1.5), std::domain_error);
    CHECK(EpsilonBudget(0.37).epsilon == 0.37);
}

TEST_CASE("sigma_for_epsilon direct ratios") {
    const PrivacyParams p1(1.0, 1.0, 0.76);
    CHECK(sigma_for_epsilon(p1, EpsilonBudget(0.5)) == doctest::Approx(2.0).epsilon(1e-15));
    const PrivacyParams p2(2.0, 3.0, 0.76);
    CHECK(sigma_for_epsilon(p2, EpsilonBudget(0.6)) == doctest::Approx(10.0).epsilon(1e-15));
}

TEST_CASE("privacy_loss_bound values and domain") {
    const PrivacyParams p(1.0, 1.0, 0.76);
    CHECK(privacy_loss_bound(1.0, p) == doctest::Approx(1.0));
    const PrivacyParams p2(1.0, 2.0, 0.76);
    CHECK(privacy_loss_bound(4.0, p2) == doctest::Approx(0.5));
    CHECK_THROWS_AS(privacy_loss_bound(0.0, p), std::domain_error);
    CHECK_THROWS_AS(privacy_loss_bound(-1.0, p), std::domain_error);
}

TEST_CASE("inverse pair identity") {
    const PrivacyParams p = PrivacyParams::minimal(2.5, 1e-5);
    for (double eps : {0.1, 0.37, 0.99}) {
        const double sigma = sigma_for_epsilon(p, EpsilonBudget(eps));
        CHECK(privacy_loss_bound(sigma, p) == doctest::Approx(eps).epsilon(1e-13));
    }
}

TEST_CASE("privacy_loss_bound strictly decreasing in sigma") {
    const PrivacyParams p = PrivacyParams::minimal(1.0, 1e-5);
    double prev = privacy_loss_bound(std::pow(2.0, -8), p);
    for (int k = -7; k <= 8; ++k) {
        const double cur = privacy_loss_bound(std::pow(2.0, k), p);
        CHECK(cur < prev);
        prev = cur;
    }
    // monotonicity example: sigma 1 vs 2 with c=S=1
    const PrivacyParams unit(1.0, 1.0, 0.76);
    CHECK(privacy_loss_bound(1.0, unit) > privacy_loss_bound(2.0, unit));
}
