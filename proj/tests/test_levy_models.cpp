#include <cmath>
#include <complex>
#include <random>

#include <doctest.h>

#include "branchmax/errors.hpp"
#include "branchmax/levy_model.hpp"

using namespace branchmax;

namespace {

std::vector<LevyModel> catalog() {
    return {LevyModel::brownian(0.0, 1.0), LevyModel::stable(1.5),
            LevyModel::brownian_exp_jumps(1.0, 1.0, 2.0, 1.0),
            LevyModel::stable_with_drift(0.5, 1.5, 1.0)};
}

} // namespace

TEST_CASE("psi closed forms") {
    CHECK(psi(LevyModel::brownian(0.0, 1.0), 1.0) == doctest::Approx(0.5));
    CHECK(psi(LevyModel::stable(1.5), 4.0) == doctest::Approx(8.0));
    CHECK(psi(LevyModel::brownian_exp_jumps(1.0, 0.0, 1.0, 1.0), 1.0) ==
          doctest::Approx(0.5));
    CHECK(psi(LevyModel::stable_with_drift(-0.5, 1.5), 2.0) ==
          doctest::Approx(-1.0 + std::pow(2.0, 1.5)));
}

TEST_CASE("psi_prime closed forms and the regime classifier") {
    CHECK(psi_prime(LevyModel::brownian_exp_jumps(1.0, 1.0, 2.0, 1.0), 0.0) ==
          doctest::Approx(-1.0));
    CHECK(psi_prime(LevyModel::stable(1.5), 0.0) == doctest::Approx(0.0));
    CHECK(psi_prime(LevyModel::brownian(-1.0, 1.0), 2.0) == doctest::Approx(1.0));

    CHECK(drift_regime(LevyModel::brownian(0.0, 1.0)) == DriftRegime::Oscillating);
    CHECK(drift_regime(LevyModel::stable(1.5)) == DriftRegime::Oscillating);
    CHECK(drift_regime(LevyModel::brownian_exp_jumps(1.0, 1.0, 2.0, 1.0)) ==
          DriftRegime::DriftDown);
    CHECK(drift_regime(LevyModel::stable_with_drift(0.5, 1.5)) == DriftRegime::DriftUp);
}

TEST_CASE("psi_complex agrees with the real axis and rejects Re <= 0") {
    auto m = LevyModel::brownian(0.0, 1.0);
    auto v = psi_complex(m, {1.0, 0.0});
    CHECK(std::abs(v - std::complex<double>(0.5, 0.0)) < 1e-12);
    CHECK_THROWS_AS((void)psi_complex(m, {0.0, 1.0}), std::domain_error);

    auto s = LevyModel::stable(2.0, 0.5);
    auto w = psi_complex(s, {1.0, 1.0});
    CHECK(std::abs(w - std::complex<double>(0.0, 1.0)) < 1e-12);

    for (const auto& model : catalog()) {
        for (double lam : {0.3, 1.0, 2.7}) {
            CHECK(std::abs(psi_complex(model, {lam, 0.0}).real() - psi(model, lam)) <=
                  1e-12 * std::max(1.0, std::abs(psi(model, lam))));
        }
    }
}

TEST_CASE("phi finds the largest root") {
    CHECK(phi(LevyModel::stable(1.5), 8.0).phi == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(phi(LevyModel::brownian(0.0, 1.0), 1.0).phi ==
          doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    // two roots of psi(l) = 0; the largest is 2
    CHECK(phi(LevyModel::brownian(-1.0, 1.0), 0.0).phi ==
          doctest::Approx(2.0).epsilon(1e-12));
    CHECK(phi(LevyModel::brownian(0.0, 1.0), 0.0).phi == doctest::Approx(0.0));
}

TEST_CASE("phi solves psi(phi)=q across the catalog with increasing phi") {
    for (const auto& m : catalog()) {
        double prev = -1.0;
        for (double q : {0.0, 0.25, 0.5, 1.0, 2.0}) {
            PhiSolution sol = phi(m, q);
            CHECK(std::abs(psi(m, sol.phi) - q) <= 1e-10 * std::max(1.0, q));
            CHECK(sol.psi_prime_at_phi >= 0.0);
            CHECK(sol.phi >= prev);
            prev = sol.phi;
        }
        // finer monotonicity probe
        prev = -1.0;
        for (int i = 0; i < 50; ++i) {
            double q = 0.05 * i;
            double p = phi(m, q).phi;
            CHECK(p >= prev - 1e-12);
            prev = p;
        }
    }
}

TEST_CASE("psi is convex on random triples") {
    std::mt19937 gen(991);
    std::uniform_real_distribution<double> dist(0.0, 10.0);
    for (const auto& m : catalog()) {
        for (int i = 0; i < 100; ++i) {
            double a = dist(gen), b = dist(gen);
            if (a > b) std::swap(a, b);
            double mid = 0.5 * (a + b);
            CHECK(psi(m, mid) <= 0.5 * (psi(m, a) + psi(m, b)) + 1e-10);
        }
    }
}

TEST_CASE("construction rejects the negative of a subordinator") {
    CHECK_THROWS_AS(LevyModel::brownian(-1.0, 0.0), ValidationError);
    CHECK_THROWS_AS(LevyModel::brownian_exp_jumps(0.0, 0.0, 1.0, 1.0), ValidationError);
    CHECK_THROWS_AS(LevyModel::stable(0.9), ValidationError);
    CHECK_THROWS_AS(LevyModel::stable(1.5, -1.0), ValidationError);
    CHECK_NOTHROW(LevyModel::brownian_exp_jumps(1.0, 0.0, 0.5, 2.0));
}
