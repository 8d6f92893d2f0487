#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fedprice/game.hpp"
#include "fedprice/rng.hpp"
#include "fedprice/rootfind.hpp"

using namespace fedprice;

namespace {

GameParams unit_params() {
    // c = S = 1 (valid at delta = 0.76), kappa = 16, L_F = 1
    return GameParams(PrivacyParams(1.0, 1.0, 0.76), LearningConfig::make(1.0, 1.0, 30));
}

// central finite-difference gradient of J_i in its own sigma
double fd_gradient(const TypeProfile& al, const NoiseProfile& sig, std::size_t i,
                   const GameParams& p) {
    const double h = sig[i] * 1e-5;
    NoiseProfile up = sig, dn = sig;
    up.sigmas[i] += h;
    dn.sigmas[i] -= h;
    return (client_cost(al[i], up, i, p) - client_cost(al[i], dn, i, p)) / (2 * h);
}

}  // namespace

TEST_CASE("client_cost degenerate types") {
    const GameParams p = unit_params();
    const NoiseProfile sig({1.0, 2.0, 0.5});
    // alpha = 0: pure accuracy term, identical across clients
    CHECK(client_cost(0.0, sig, 0, p) == doctest::Approx(client_cost(0.0, sig, 2, p)));
    CHECK(client_cost(0.0, sig, 0, p) ==
          doctest::Approx(convergence_bound(delta_mle(sig), p.learning)));
    // alpha = 1: exactly cS / sigma_i
    CHECK(client_cost(1.0, sig, 1, p) == doctest::Approx(p.cs() / 2.0).epsilon(1e-15));
}

TEST_CASE("client_cost frozen example") {
    // N=2, alpha=0.5, sigma=(1,1), kappa=16, L_F=1, c=S=1; evaluated by an
    // independent oracle: 0.5*16*2^{-1/2}(1 + 2^{-1/2}/2) + 0.5
    const GameParams p = unit_params();
    const NoiseProfile sig({1.0, 1.0});
    CHECK(client_cost(0.5, sig, 0, p) ==
          doctest::Approx(8.156854249492380).epsilon(1e-14));
}

TEST_CASE("social_cost properties") {
    const GameParams p = unit_params();
    const NoiseProfile sig({1.0, 1.0});
    const TypeProfile sym({0.5, 0.5});
    CHECK(social_cost(sym, sig, p) ==
          doctest::Approx(2.0 * client_cost(0.5, sig, 0, p)).epsilon(1e-15));
    // brute re-summation oracle + domination by the max
    Rng rng(5);
    std::vector<double> al(4), s(4);
    for (int i = 0; i < 4; ++i) {
        al[i] = rng.uniform(0.1, 0.9);
        s[i] = std::exp(rng.uniform(-1, 1));
    }
    const TypeProfile prof(al);
    const NoiseProfile noise(s);
    double total = 0.0, worst = 0.0;
    for (int i = 0; i < 4; ++i) {
        const double c = client_cost(al[i], noise, i, p);
        total += c;
        worst = std::max(worst, c);
    }
    CHECK(social_cost(prof, noise, p) == doctest::Approx(total).epsilon(1e-14));
    CHECK(social_cost(prof, noise, p) >= worst);
    CHECK_THROWS_AS(social_cost(TypeProfile({0.5}), noise, p), std::invalid_argument);
}

TEST_CASE("solve_ne_complete: symmetry, residual, stationarity") {
    const GameParams p = unit_params();
    const TypeProfile sym({0.4, 0.4, 0.4, 0.4, 0.4});
    const CompleteSolution ne = solve_ne_complete(sym, p);
    for (int i = 1; i < 5; ++i)
        CHECK(std::abs(ne.sigma[i] - ne.sigma[0]) / ne.sigma[0] < 1e-9);
    CHECK(ne.residual <= 1e-9);
    // finite-difference stationarity of each client's cost
    for (int i = 0; i < 5; ++i) {
        const double g = fd_gradient(sym, ne.sigma, i, p);
        const double scale = sym[i] * p.cs() / (ne.sigma[i] * ne.sigma[i]);
        CHECK(std::abs(g) <= std::max(1e-6, 1e-4 * scale));
    }
}

TEST_CASE("solve_ne_complete: structural law and multistart uniqueness") {
    const GameParams p = unit_params();
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = (trial % 3 == 0) ? 2 : ((trial % 3 == 1) ? 5 : 20);
        std::vector<double> al(n);
        for (auto& a : al) a = rng.uniform(0.05, 0.95);
        const TypeProfile prof(al);
        const CompleteSolution ne = solve_ne_complete(prof, p);
        CHECK(ne.residual <= 1e-9);
        // within one equilibrium, sigma_i* alpha_i/(1-alpha_i) is the same
        // constant A(H) for every client (Eq.-9 structure)
        const double ref = ne.sigma[0] * al[0] * p.cs() / (1.0 - al[0]);
        for (int i = 1; i < n; ++i) {
            const double v = ne.sigma[i] * al[i] * p.cs() / (1.0 - al[i]);
            CHECK(std::abs(v - ref) / ref < 1e-12);
        }
        // 8 random initialisations agree
        for (int s = 0; s < 8; ++s) {
            std::vector<double> x0(n);
            for (auto& v : x0) v = std::exp(rng.uniform(std::log(1e-2), std::log(1e2)));
            const CompleteSolution again = solve_ne_complete(prof, p, &x0);
            for (int i = 0; i < n; ++i)
                CHECK(std::abs(again.sigma[i] - ne.sigma[i]) / ne.sigma[i] < 1e-6);
        }
    }
}

TEST_CASE("solve_ne_complete: permutation equivariance") {
    const GameParams p = unit_params();
    const TypeProfile a({0.2, 0.5, 0.8});
    const TypeProfile b({0.8, 0.2, 0.5});
    const CompleteSolution na = solve_ne_complete(a, p);
    const CompleteSolution nb = solve_ne_complete(b, p);
    CHECK(na.sigma[0] == doctest::Approx(nb.sigma[1]).epsilon(1e-12));
    CHECK(na.sigma[1] == doctest::Approx(nb.sigma[2]).epsilon(1e-12));
    CHECK(na.sigma[2] == doctest::Approx(nb.sigma[0]).epsilon(1e-12));
}

TEST_CASE("boundary types rejected; clamping provided") {
    const GameParams p = unit_params();
    CHECK_THROWS_AS(solve_ne_complete(TypeProfile({0.0, 0.5}), p), std::domain_error);
    CHECK_THROWS_AS(solve_ne_complete(TypeProfile({1.0, 0.5}), p), std::domain_error);
    const TypeProfile clamped = p.clamp({0.0, 1.0, 0.5});
    CHECK(clamped[0] == p.alpha_floor);
    CHECK(clamped[1] == 1.0 - p.alpha_floor);
    CHECK(clamped[2] == 0.5);
    CHECK_NOTHROW(solve_ne_complete(clamped, p));
}

TEST_CASE("solve_so_complete: N=1 coincides with NE, SO below NE") {
    const GameParams p = unit_params();
    const TypeProfile one({0.6});
    const CompleteSolution ne = solve_ne_complete(one, p);
    const CompleteSolution so = solve_so_complete(one, p);
    CHECK(ne.sigma[0] == doctest::Approx(so.sigma[0]).epsilon(1e-12));

    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng.next_below(6));
        std::vector<double> al(n);
        for (auto& a : al) a = rng.uniform(0.05, 0.95);
        const TypeProfile prof(al);
        const CompleteSolution ne2 = solve_ne_complete(prof, p);
        const CompleteSolution so2 = solve_so_complete(prof, p);
        for (int i = 0; i < n; ++i) CHECK(so2.sigma[i] <= ne2.sigma[i] * (1 + 1e-12));
        CHECK(social_cost(prof, so2.sigma, p) <= social_cost(prof, ne2.sigma, p) + 1e-12);
    }
}

TEST_CASE("solve_so_complete: stationarity and scaling-direction minimality") {
    const GameParams p = unit_params();
    const TypeProfile prof({0.3, 0.5, 0.7, 0.2, 0.9});
    const CompleteSolution so = solve_so_complete(prof, p);
    CHECK(so.residual <= 1e-9);
    // full-gradient stationarity of SC at sigma**
    for (int i = 0; i < 5; ++i) {
        const double h = so.sigma[i] * 1e-5;
        NoiseProfile up = so.sigma, dn = so.sigma;
        up.sigmas[i] += h;
        dn.sigmas[i] -= h;
        const double g = (social_cost(prof, up, p) - social_cost(prof, dn, p)) / (2 * h);
        const double scale = prof[i] * p.cs() / (so.sigma[i] * so.sigma[i]);
        CHECK(std::abs(g) <= std::max(1e-6, 1e-4 * scale));
    }
    // along the uniform scaling direction the cost strictly rises off t=1
    const double base = social_cost(prof, so.sigma, p);
    for (double t : {0.8, 0.9, 1.1, 1.25}) {
        NoiseProfile scaled = so.sigma;
        for (auto& s : scaled.sigmas) s *= t;
        CHECK(social_cost(prof, scaled, p) > base);
    }
}

TEST_CASE("price_of_anarchy: bounds and divergence") {
    const GameParams p = unit_params();
    const EquilibriumResult sym = price_of_anarchy(TypeProfile({0.5, 0.5}), p);
    CHECK(sym.gamma >= 1.0 - 1e-9);
    CHECK(std::isfinite(sym.gamma));

    const EquilibriumResult solo = price_of_anarchy(TypeProfile({0.6}), p);
    CHECK(solo.gamma == doctest::Approx(1.0).epsilon(1e-10));

    // pushing one type to 1-floor and the rest to floor blows gamma up
    double prev = 0.0;
    bool above10 = false, above100 = false;
    for (double floor : {0.05, 0.01, 1e-3, 1e-4, 1e-5, 1e-6}) {
        GameParams q = p;
        q.alpha_floor = floor;
        std::vector<double> al(5, floor);
        al[0] = 1.0 - floor;
        const EquilibriumResult r = price_of_anarchy(TypeProfile(al), q);
        CHECK(r.gamma >= prev);  // monotone along the schedule
        prev = r.gamma;
        above10 = above10 || r.gamma > 10.0;
        above100 = above100 || r.gamma > 100.0;
    }
    CHECK(above10);
    CHECK(above100);
}

TEST_CASE("boundary solutions are flagged") {
    GameParams p = unit_params();
    p.sigma_max = 3.0;  // tight box so an extreme instance must clamp
    p.alpha_floor = 1e-6;
    std::vector<double> al(5, 1e-6);
    al[0] = 1.0 - 1e-6;
    const CompleteSolution ne = solve_ne_complete(TypeProfile(al), p);
    CHECK(ne.boundary);
}
