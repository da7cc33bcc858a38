#include <cmath>
#include <vector>

#include <doctest.h>

#include "branchmax/errors.hpp"
#include "branchmax/solver.hpp"

using namespace branchmax;

namespace {

OffspringLaw delta0() { return OffspringLaw({1.0}); }
OffspringLaw binary_critical() { return OffspringLaw({0.5, 0.0, 0.5}); }
OffspringLaw subcritical_law() { return OffspringLaw({0.75, 0.0, 0.25}); }

std::vector<LevyModel> catalog() {
    return {LevyModel::brownian(0.0, 1.0), LevyModel::stable(1.5),
            LevyModel::brownian_exp_jumps(1.0, 1.0, 2.0, 1.0),
            LevyModel::stable_with_drift(0.5, 1.5, 1.0)};
}

} // namespace

TEST_CASE("no branching: the solve reproduces exp(-Phi(1) x) at every node") {
    for (const auto& m : catalog()) {
        SolverOptions opts;
        opts.x_max = 20.0;
        opts.h = 0.02;
        SolverReport rep;
        SurvivalCurve curve = solve_u(m, delta0(), opts, &rep);
        CHECK(rep.converged);
        double phi1 = phi(m, 1.0).phi;
        for (std::size_t i = 0; i < curve.values().size(); ++i) {
            double x = opts.h * static_cast<double>(i);
            CHECK(std::abs(curve.values()[i] - std::exp(-phi1 * x)) <= 1e-9);
        }
    }
}

TEST_CASE("no branching: reconstructed Delta equals u itself") {
    LevyModel m = LevyModel::brownian(0.0, 1.0);
    SolverOptions opts;
    opts.x_max = 20.0;
    opts.h = 0.02;
    SurvivalCurve curve = solve_u(m, delta0(), opts);
    DeltaReconstruction delta(curve, m, delta0());
    double phi1 = std::sqrt(2.0);
    for (double x : {0.5, 1.0, 2.0, 4.0}) {
        CHECK(delta.at(x) == doctest::Approx(std::exp(-phi1 * x)).epsilon(1e-6));
    }
}

TEST_CASE("curve invariants: u(0) = 1, nonincreasing, zero left of 0") {
    SolverOptions opts;
    opts.x_max = 30.0;
    opts.h = 0.02;
    SurvivalCurve curve = solve_u(LevyModel::brownian(0.0, 1.0), subcritical_law(), opts);
    CHECK(curve(-1.0) == 0.0);
    CHECK(curve.values()[0] == doctest::Approx(1.0));
    for (std::size_t i = 1; i < curve.values().size(); ++i) {
        CHECK(curve.values()[i] <= curve.values()[i - 1] + 1e-15);
        CHECK(curve.values()[i] >= 0.0);
        CHECK(curve.values()[i] <= 1.0);
    }
}

TEST_CASE("subcritical solve: fitted tail rate approaches Phi(1 - E[p])") {
    SolverOptions opts;
    opts.x_max = 30.0;
    opts.h = 0.02;
    opts.tol = 1e-12;
    SolverReport rep;
    SurvivalCurve curve = solve_u(LevyModel::brownian(0.0, 1.0), subcritical_law(), opts,
                                  &rep);
    CHECK(rep.converged);
    // Phi(1/2) = 1 for the standard Brownian member
    CHECK(curve.tail().rate == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("subcritical renewal residual is small and reacts to perturbation") {
    SolverOptions opts;
    opts.x_max = 30.0;
    opts.h = 0.02;
    opts.tol = 1e-12;
    LevyModel m = LevyModel::brownian(0.0, 1.0);
    SurvivalCurve curve = solve_u(m, subcritical_law(), opts);
    ResidualReport base = subcritical_renewal_residual(curve, m, subcritical_law());
    CHECK(base.max_residual <= 1e-3);
    CHECK(base.points > 0);
    // perturb u while keeping the base Delta: the pair stops solving the equation
    std::vector<double> dgrid =
        DeltaReconstruction(curve, m, subcritical_law()).on_grid();
    ResidualReport bumped =
        subcritical_renewal_residual(curve.scaled(1.05), m, subcritical_law(), &dgrid);
    CHECK(bumped.max_residual >= 10.0 * base.max_residual);
}

TEST_CASE("no branching: both renewal forms reduce to u = Delta") {
    LevyModel m = LevyModel::brownian(0.0, 1.0);
    SolverOptions opts;
    opts.x_max = 20.0;
    opts.h = 0.02;
    SurvivalCurve curve = solve_u(m, delta0(), opts);
    ResidualReport rep = subcritical_renewal_residual(curve, m, delta0());
    CHECK(rep.max_residual <= 1e-6);
}

TEST_CASE("critical oscillating solve satisfies the one-sided renewal equation") {
    SolverOptions opts;
    opts.x_max = 100.0;
    opts.h = 0.05;
    LevyModel m = LevyModel::brownian(0.0, 1.0);
    SolverReport srep;
    SurvivalCurve curve = solve_u(m, binary_critical(), opts, &srep);
    CHECK(srep.converged);
    ResidualReport rep = critical_renewal_residual(curve, m, binary_critical());
    CHECK(rep.max_residual <= 1e-3);
    CHECK(rep.points > 0);
    std::vector<double> dgrid =
        DeltaReconstruction(curve, m, binary_critical()).on_grid();
    ResidualReport bumped =
        critical_renewal_residual(curve.scaled(1.05), m, binary_critical(), &dgrid);
    CHECK(bumped.max_residual >= 10.0 * rep.max_residual);

    // gamma(x) = x W(x) u(x) should sit in a modest band on [10, 50]
    ScaleEvaluator w0(m, 0.0);
    double lo = 1e9, hi = 0.0;
    for (double x = 10.0; x <= 50.0; x += 0.5) {
        double g = x * w0.value(x) * curve(x);
        lo = std::min(lo, g);
        hi = std::max(hi, g);
    }
    CHECK(hi / lo <= 3.0);
}

TEST_CASE("reconstructed Delta decays at the sup-window rate") {
    LevyModel m = LevyModel::brownian(0.0, 1.0);
    SolverOptions opts;
    opts.x_max = 30.0;
    opts.h = 0.02;
    opts.tol = 1e-12;
    SurvivalCurve curve = solve_u(m, subcritical_law(), opts);
    DeltaReconstruction delta(curve, m, subcritical_law());
    double phi1 = std::sqrt(2.0);
    double base = 0.0;
    for (double x = 2.0; x <= 3.0; x += 0.25) {
        base = std::max(base, std::abs(delta.at(x)) * std::exp((phi1 - 0.1) * x));
    }
    for (double x = 3.0; x <= 12.0; x += 0.5) {
        double b = std::abs(delta.at(x)) * std::exp((phi1 - 0.1) * x);
        CHECK(b <= 3.0 * base + 1e-10);
    }
    // left of the origin: |Delta(x)| <= (m1 + m2 + m3) P(L_e < x)
    OffspringLaw law = subcritical_law();
    double K = law.mean() + law.second_moment() + law.third_moment();
    // P(L_e < -2) for standard Brownian: exp(-sqrt(2) * 2)/2
    double p_left = 0.5 * std::exp(-2.0 * phi1);
    CHECK(std::abs(delta.at(-2.0)) <= 1.05 * K * p_left);
}

TEST_CASE("g = R - E[p^2-p] u^2 / 2 is ultimately negative on converged curves") {
    LevyModel m = LevyModel::brownian(0.0, 1.0);
    SolverOptions opts;
    opts.x_max = 30.0;
    opts.h = 0.02;
    SurvivalCurve curve = solve_u(m, subcritical_law(), opts);
    OffspringLaw law = subcritical_law();
    bool negative_beyond = true;
    for (double x = 1.0; x <= 15.0; x += 0.1) {
        double u = curve(x);
        double g = law.remainder(u) - 0.5 * law.factorial_variance() * u * u;
        if (x >= 0.5 && g >= 0.0) negative_beyond = false;
    }
    CHECK(negative_beyond);
}

TEST_CASE("scale-free limit family solves its kernel equation") {
    std::vector<double> xs{0.5, 1.0, 2.0, 5.0, 10.0};
    CHECK(limit_family_residual(2.0, 1.0, 0.0, xs) <= 1e-6);
    CHECK(limit_family_residual(2.0, 1.0, 1.0, xs) <= 1e-3);
    CHECK(limit_family_residual(1.5, 1.0, 0.0, xs) <= 1e-3);
    CHECK(limit_family_residual(1.5, 1.0, 1.0, xs) <= 1e-3);
    CHECK(limit_family_residual(1.5, 2.0, 0.5, xs) <= 1e-3);
}

TEST_CASE("solver rejects bad options") {
    SolverOptions opts;
    opts.h = 0.2; // too coarse per contract
    CHECK_THROWS_AS(solve_u(LevyModel::brownian(0.0, 1.0), delta0(), opts),
                    ValidationError);
    SolverOptions opts2;
    opts2.omega = 1.5;
    CHECK_THROWS_AS(solve_u(LevyModel::brownian(0.0, 1.0), delta0(), opts2),
                    ValidationError);
}
