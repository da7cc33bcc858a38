#include <cmath>
#include <vector>

#include <doctest.h>

#include "branchmax/errors.hpp"
#include "branchmax/quadrature.hpp"
#include "branchmax/scale.hpp"

using namespace branchmax;

namespace {

std::vector<LevyModel> catalog() {
    return {LevyModel::brownian(0.0, 1.0), LevyModel::stable(1.5),
            LevyModel::brownian_exp_jumps(1.0, 1.0, 2.0, 1.0),
            LevyModel::stable_with_drift(0.5, 1.5, 1.0)};
}

// integral of theta^(q) over the real line, numerically; equals 1/q.
double theta_total_mass(const LevyModel& m, double q) {
    PotentialDensity theta(m, q);
    double total = simpson([&](double z) { return theta(z); }, -20.0, 20.0, 16000);
    // positive side beyond 20 is exactly exponential
    double phi_q = theta.phi_solution().phi;
    total += theta.phi_prime() * std::exp(-phi_q * 20.0) / phi_q;
    // negative side beyond 20 may decay only polynomially (stable members)
    double z = 20.0;
    double prev = theta(-z);
    while (z < 2e5) {
        double z2 = z * 1.05;
        double cur = theta(-z2);
        total += 0.5 * (prev + cur) * (z2 - z);
        z = z2;
        prev = cur;
        if (cur * z < 1e-9) break;
    }
    return total;
}

} // namespace

TEST_CASE("scale closed forms match hand values") {
    ScaleEvaluator bm0(LevyModel::brownian(0.0, 1.0), 0.0);
    CHECK(bm0.value(3.0) == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(bm0.value(-1.0) == 0.0);
    CHECK(bm0.derivative(2.5) == doctest::Approx(2.0).epsilon(1e-12));

    ScaleEvaluator st0(LevyModel::stable(1.5), 0.0);
    CHECK(st0.value(4.0) == doctest::Approx(2.0 / std::tgamma(1.5)).epsilon(1e-12));
    CHECK(st0.derivative(4.0) ==
          doctest::Approx(0.25 / std::tgamma(1.5)).epsilon(1e-10));

    ScaleEvaluator bm1(LevyModel::brownian(0.0, 1.0), 1.0);
    double r2 = std::sqrt(2.0);
    CHECK(bm1.value(1.0) == doctest::Approx(r2 * std::sinh(r2)).epsilon(1e-12));
    CHECK(bm1.derivative(1.0) == doctest::Approx(2.0 * std::cosh(r2)).epsilon(1e-12));
    CHECK(bm1.value(0.0) == doctest::Approx(0.0));
}

TEST_CASE("scale function vanishes left of 0 and is nondecreasing") {
    for (const auto& m : catalog()) {
        for (double q : {0.0, 0.5, 1.0}) {
            ScaleEvaluator ev(m, q);
            CHECK(ev.value(-0.5) == 0.0);
            double prev = 0.0;
            for (double x = 0.05; x <= 12.0; x += 0.05) {
                double v = ev.value(x);
                CHECK(v >= prev - 1e-12 * std::max(1.0, prev));
                prev = v;
            }
        }
    }
}

TEST_CASE("Laplace round-trip of W against 1/(psi - q)") {
    for (const auto& m : catalog()) {
        for (double q : {0.0, 1.0}) {
            ScaleEvaluator ev(m, q);
            double phi_q = ev.phi_solution().phi;
            for (double shift : {0.5, 1.0, 2.0}) {
                double beta = phi_q + shift;
                double X = 40.0;
                double integral = simpson(
                    [&](double x) { return std::exp(-beta * x) * ev.value(x); }, 0.0, X,
                    12000);
                double dpsi = ev.phi_solution().psi_prime_at_phi;
                if (dpsi > 0.0) {
                    integral += std::exp(-(beta - phi_q) * X) / ((beta - phi_q) * dpsi);
                }
                double expected = 1.0 / (psi(m, beta) - q);
                CHECK(integral == doctest::Approx(expected).epsilon(1e-4));
            }
        }
    }
}

TEST_CASE("stable scale function is regularly varying with index alpha-1") {
    ScaleEvaluator closed(LevyModel::stable(1.5), 0.0);
    for (double x : {0.5, 1.0, 3.0}) {
        CHECK(closed.value(2.0 * x) / closed.value(x) ==
              doctest::Approx(std::pow(2.0, 0.5)).epsilon(1e-12));
    }
    ScaleEvaluator inv(LevyModel::stable(1.5), 0.0, ScaleBackend::ContourInversion);
    for (double x : {0.5, 1.0, 3.0}) {
        CHECK(inv.value(2.0 * x) / inv.value(x) ==
              doctest::Approx(std::pow(2.0, 0.5)).epsilon(1e-5));
    }
}

TEST_CASE("closed form and contour inversion agree to 1e-6") {
    for (const auto& m : catalog()) {
        for (double q : {0.0, 0.5, 1.0}) {
            ScaleEvaluator closed(m, q);
            ScaleEvaluator inv(m, q, ScaleBackend::ContourInversion);
            for (double x = 0.1; x <= 10.0; x *= 1.6) {
                double a = closed.value(x);
                double b = inv.value(x);
                CHECK(std::abs(a - b) <= 1e-6 * std::max(std::abs(a), std::abs(b)));
            }
        }
    }
}

TEST_CASE("inversion derivative passes its step-halving check and matches closed form") {
    for (const auto& m : catalog()) {
        ScaleEvaluator closed(m, 1.0);
        ScaleEvaluator inv(m, 1.0, ScaleBackend::ContourInversion);
        for (double x : {0.5, 2.0, 6.0}) {
            CHECK(inv.derivative(x) == doctest::Approx(closed.derivative(x)).epsilon(1e-5));
        }
    }
}

TEST_CASE("exponential growth diagnostic stays below 0.05") {
    CHECK(ScaleEvaluator(LevyModel::brownian(-1.0, 1.0), 0.0).asymptote_deviation() <= 0.05);
    CHECK(ScaleEvaluator(LevyModel::brownian(0.0, 1.0), 1.0).asymptote_deviation() <= 0.05);
    CHECK(ScaleEvaluator(LevyModel::stable(1.5), 1.0).asymptote_deviation() <= 0.05);
    CHECK_THROWS_AS(ScaleEvaluator(LevyModel::brownian(0.0, 1.0), 0.0).asymptote_deviation(),
                    ValidationError);
}

TEST_CASE("residual matches high-precision reference on both branches") {
    // reference values from a 60-digit evaluation of the defining series
    ScaleEvaluator st(LevyModel::stable(1.5), 1.0);
    CHECK(st.residual(10.0) == doctest::Approx(0.00129430079463).epsilon(1e-6));
    CHECK(st.residual(20.0) == doctest::Approx(0.000235415041461).epsilon(1e-4));

    ScaleEvaluator sd(LevyModel::stable_with_drift(0.5, 1.5), 1.0);
    CHECK(sd.residual(14.0) == doctest::Approx(0.000485875166402).epsilon(1e-3));
    CHECK(sd.residual(27.0) == doctest::Approx(0.000102116700031).epsilon(1e-3));
}

TEST_CASE("residual stays positive and smooth across the evaluation switch") {
    for (const auto& m : {LevyModel::stable(1.5), LevyModel::stable_with_drift(0.5, 1.5)}) {
        ScaleEvaluator ev(m, 1.0);
        double prev = ev.residual(0.5);
        for (double x = 0.6; x <= 35.0; x += 0.1) {
            double r = ev.residual(x);
            CHECK(r > 0.0);
            CHECK(r < prev * 1.01); // decreasing up to branch-switch noise
            prev = r;
        }
    }
}

TEST_CASE("potential density: Brownian closed form, symmetry, positivity") {
    PotentialDensity theta(LevyModel::brownian(0.0, 1.0), 1.0);
    double r2 = std::sqrt(2.0);
    CHECK(theta(0.7) == doctest::Approx(std::exp(-r2 * 0.7) / r2).epsilon(1e-10));
    CHECK(theta(-0.7) == doctest::Approx(std::exp(-r2 * 0.7) / r2).epsilon(1e-10));
    for (double z = -12.0; z <= 12.0; z += 0.25) {
        CHECK(theta(z) == doctest::Approx(std::exp(-r2 * std::abs(z)) / r2).epsilon(1e-6));
    }
}

TEST_CASE("potential density integrates to 1/q and stays nonnegative") {
    for (const auto& m : catalog()) {
        PotentialDensity theta(m, 1.0);
        for (double z = -20.0; z <= 20.0; z += 0.05) {
            CHECK(theta(z) >= 0.0);
        }
        CHECK(theta_total_mass(m, 1.0) == doctest::Approx(1.0).epsilon(1e-4));
    }
    CHECK(theta_total_mass(LevyModel::brownian(0.0, 1.0), 0.5) ==
          doctest::Approx(2.0).epsilon(1e-4));
}

TEST_CASE("0-potential density exists only in the drift-down regime") {
    CHECK_THROWS_AS(PotentialDensity(LevyModel::brownian(0.0, 1.0), 0.0), ValidationError);
    PotentialDensity theta0(LevyModel::brownian(-0.5, 1.0), 0.0);
    // continuity in q at 0: theta^(q) -> theta^(0) pointwise
    PotentialDensity theta_eps(LevyModel::brownian(-0.5, 1.0), 1e-7);
    for (double z : {-3.0, -1.0, 0.5, 2.0}) {
        CHECK(theta0(z) == doctest::Approx(theta_eps(z)).epsilon(1e-4));
    }
}
