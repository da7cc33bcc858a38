#include <cmath>
#include <limits>

#include <doctest.h>

#include "branchmax/asymptotics.hpp"
#include "branchmax/simulator.hpp"

using namespace branchmax;

namespace {

OffspringLaw delta0() { return OffspringLaw({1.0}); }
OffspringLaw binary_critical() { return OffspringLaw({0.5, 0.0, 0.5}); }

} // namespace

TEST_CASE("with no branching the hit frequency is the sup-window tail") {
    SimConfig cfg(LevyModel::brownian(0.0, 1.0), delta0());
    cfg.levels = {0.0, 1.0};
    cfg.n_reps = 100000;
    cfg.seed = 11;
    TailEstimate est = estimate_survival(cfg);
    CHECK(est.levels[0].u_hat == doctest::Approx(1.0)); // ancestor starts at 0
    double expected = std::exp(-std::sqrt(2.0));
    double half = 0.5 * (est.levels[1].ci_high - est.levels[1].ci_low);
    CHECK(std::abs(est.levels[1].u_hat - expected) <= 1.5 * half);
    CHECK(est.levels[1].killed_particles == 0);
}

TEST_CASE("estimates are byte-identical across worker counts") {
    SimConfig cfg(LevyModel::stable(1.5), binary_critical());
    cfg.levels = {1.0, 2.0};
    cfg.n_reps = 20000;
    cfg.seed = 99;
    cfg.threads = 1;
    TailEstimate one = estimate_survival(cfg);
    cfg.threads = 4;
    TailEstimate four = estimate_survival(cfg);
    for (std::size_t i = 0; i < one.levels.size(); ++i) {
        CHECK(one.levels[i].hits == four.levels[i].hits);
        CHECK(one.levels[i].killed_particles == four.levels[i].killed_particles);
        CHECK(one.levels[i].u_hat == four.levels[i].u_hat); // bitwise: same counts
    }
}

TEST_CASE("u_hat is nonincreasing across levels within one run") {
    SimConfig cfg(LevyModel::brownian(0.0, 1.0), binary_critical());
    cfg.levels = {0.5, 1.0, 2.0, 3.0, 4.0};
    cfg.n_reps = 20000;
    cfg.seed = 7;
    TailEstimate est = estimate_survival(cfg);
    for (std::size_t i = 1; i < est.levels.size(); ++i) {
        CHECK(est.levels[i].u_hat <= est.levels[i - 1].u_hat);
    }
}

TEST_CASE("subcritical trees die out even without the barrier") {
    SimConfig cfg(LevyModel::brownian(0.0, 1.0), OffspringLaw({0.75, 0.0, 0.25}));
    cfg.levels = {5.0};
    cfg.n_reps = 10000;
    cfg.seed = 3;
    cfg.kill_barrier = std::numeric_limits<double>::infinity();
    TailEstimate est = estimate_survival(cfg);
    CHECK(est.levels[0].truncated_frac < 0.001);
}

TEST_CASE("doubling the kill barrier moves estimates by less than one CI half-width") {
    SimConfig cfg(LevyModel::brownian(0.0, 1.0), binary_critical());
    cfg.levels = {2.0, 3.0};
    cfg.n_reps = 30000;
    cfg.seed = 21;
    TailEstimate base = estimate_survival(cfg);
    cfg.kill_barrier = 2.0 * base.barrier;
    TailEstimate wide = estimate_survival(cfg);
    for (std::size_t i = 0; i < base.levels.size(); ++i) {
        double half = 0.5 * (base.levels[i].ci_high - base.levels[i].ci_low);
        CHECK(std::abs(wide.levels[i].u_hat - base.levels[i].u_hat) < half);
    }
}

TEST_CASE("critical survival dominates the thinned subcritical law") {
    SimConfig crit(LevyModel::brownian(0.0, 1.0), binary_critical());
    crit.levels = {1.0, 2.0, 3.0};
    crit.n_reps = 30000;
    crit.seed = 5;
    TailEstimate a = estimate_survival(crit);
    // thin p2 by 10%, moving the removed mass to p0
    SimConfig sub(LevyModel::brownian(0.0, 1.0), OffspringLaw({0.55, 0.0, 0.45}));
    sub.levels = crit.levels;
    sub.n_reps = crit.n_reps;
    sub.seed = 6;
    TailEstimate b = estimate_survival(sub);
    for (std::size_t i = 0; i < a.levels.size(); ++i) {
        double se = 0.5 * (a.levels[i].ci_high - a.levels[i].ci_low) +
                    0.5 * (b.levels[i].ci_high - b.levels[i].ci_low);
        CHECK(a.levels[i].u_hat >= b.levels[i].u_hat - se);
    }
}

TEST_CASE("subcritical tail rate from the simulator matches Phi(1 - E[p])") {
    SimConfig cfg(LevyModel::brownian(0.0, 1.0), OffspringLaw({0.75, 0.0, 0.25}));
    cfg.levels = {2.0, 3.0, 4.0, 5.0};
    cfg.n_reps = 300000;
    cfg.seed = 17;
    cfg.threads = 2;
    TailEstimate est = estimate_survival(cfg);
    // least-squares slope of log u_hat; Phi(1/2) = 1 for this model
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& lv : est.levels) {
        double y = std::log(lv.u_hat);
        sx += lv.x;
        sy += y;
        sxx += lv.x * lv.x;
        sxy += lv.x * y;
    }
    double n = static_cast<double>(est.levels.size());
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope == doctest::Approx(-1.0).epsilon(0.08));
}

TEST_CASE("grid backend: biased low, bias shrinks with dt, stable case in range") {
    double expected = std::exp(-std::sqrt(2.0));
    SimConfig cfg(LevyModel::brownian(0.0, 1.0), delta0());
    cfg.levels = {1.0};
    cfg.n_reps = 20000;
    cfg.seed = 31;
    cfg.backend = SimBackend::EulerGrid;
    cfg.dt = 4e-3;
    double u_coarse = estimate_survival(cfg).levels[0].u_hat;
    cfg.dt = 1e-3;
    TailEstimate fine = estimate_survival(cfg);
    double u_fine = fine.levels[0].u_hat;
    double half = 0.5 * (fine.levels[0].ci_high - fine.levels[0].ci_low);
    CHECK(u_fine <= expected + 1.5 * half);
    CHECK(u_fine >= 0.95 * expected - 1.5 * half);
    CHECK(u_fine >= u_coarse - 2.0 * half);

    SimConfig st(LevyModel::stable(1.5), delta0());
    st.levels = {2.0};
    st.n_reps = 20000;
    st.seed = 32;
    st.backend = SimBackend::EulerGrid;
    st.dt = 1e-3;
    double u_st = estimate_survival(st).levels[0].u_hat;
    CHECK(std::abs(u_st - std::exp(-2.0)) <= 0.05 * std::exp(-2.0) + 0.01);
}

TEST_CASE("stable increments have the right positivity fraction") {
    // time-average of P(L_s >= 0) is 1/alpha for the stable member
    double frac = spitzer_positivity(LevyModel::stable(1.5), 50.0, 10000, 0.1, 8);
    CHECK(std::abs(frac - 1.0 / 1.5) <= 0.02);
}
