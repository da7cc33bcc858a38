#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "branchmax/scale.hpp"
#include "branchmax/window_law.hpp"

using namespace branchmax;

namespace {

std::vector<LevyModel> catalog() {
    return {LevyModel::brownian(0.0, 1.0), LevyModel::stable(1.5),
            LevyModel::brownian_exp_jumps(1.0, 1.0, 2.0, 1.0),
            LevyModel::stable_with_drift(0.5, 1.5, 1.0)};
}

// CDF of L_e assembled from the 1-potential density: exact exponential on the
// right, numeric accumulation of the residual tail on the left.
struct LeCdf {
    explicit LeCdf(const LevyModel& m) : theta(m, 1.0) {
        phi1 = theta.phi_solution().phi;
        double z = 2000.0;
        double prev = theta(-z);
        left_mass = prev * z / 1.5; // crude start for the far power tail
        zs.push_back(-z);
        cs.push_back(left_mass);
        while (z > 1e-3) {
            double z2 = z / 1.02;
            double cur = theta(-z2);
            left_mass += 0.5 * (prev + cur) * (z - z2);
            zs.push_back(-z2);
            cs.push_back(left_mass);
            prev = cur;
            z = z2;
        }
    }
    double operator()(double z) const {
        if (z >= 0.0) {
            return 1.0 - theta.phi_prime() / phi1 * std::exp(-phi1 * z);
        }
        auto it = std::lower_bound(zs.begin(), zs.end(), z);
        if (it == zs.begin()) return cs.front();
        if (it == zs.end()) return cs.back();
        std::size_t i = static_cast<std::size_t>(it - zs.begin());
        double t = (z - zs[i - 1]) / (zs[i] - zs[i - 1]);
        return cs[i - 1] + t * (cs[i] - cs[i - 1]);
    }
    PotentialDensity theta;
    double phi1;
    double left_mass = 0.0;
    std::vector<double> zs, cs;
};

} // namespace

TEST_CASE("sup_tail is the exponential law of the running supremum") {
    WindowLaw bm(LevyModel::brownian(0.0, 1.0));
    CHECK(bm.sup_tail(1.0) == doctest::Approx(std::exp(-std::sqrt(2.0))).epsilon(1e-12));
    CHECK(bm.sup_tail(0.0) == doctest::Approx(1.0));
    WindowLaw st(LevyModel::stable(1.5));
    CHECK(st.phi1() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(st.sup_tail(2.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
}

TEST_CASE("Brownian D-law equals the law of S_e") {
    WindowLaw bm(LevyModel::brownian(0.0, 1.0));
    double r2 = std::sqrt(2.0);
    CHECK(bm.atom0() == doctest::Approx(0.0));
    for (double z : {0.1, 0.5, 1.0, 2.0, 5.0}) {
        CHECK(bm.d_density(z) == doctest::Approx(r2 * std::exp(-r2 * z)).epsilon(1e-10));
    }
}

TEST_CASE("D-law mass and Laplace transform across the catalog") {
    for (const auto& m : catalog()) {
        WindowLaw wl(m);
        CHECK(wl.d_mass_defect() <= 1e-4);
        double phi1 = wl.phi1();
        for (double lam : {0.1, 0.5, phi1 / 2.0}) {
            double lt = 0.0;
            for (const auto& cell : wl.cells()) {
                lt += cell.mass * std::exp(-lam * cell.center);
            }
            double expected = (phi1 - lam) / (phi1 * (1.0 - psi(m, lam)));
            CHECK(lt == doctest::Approx(expected).epsilon(1e-3));
        }
        bool expect_atom = m.variant == LevyVariant::BrownianExpJumps && m.eta == 0.0;
        CHECK((wl.atom0() > 0.0) == expect_atom);
    }
}

TEST_CASE("bounded-variation member carries a genuine atom at 0") {
    LevyModel bv = LevyModel::brownian_exp_jumps(1.5, 0.0, 0.5, 1.0);
    WindowLaw wl(bv);
    CHECK(wl.reduced_confidence());
    ScaleEvaluator w1(bv, 1.0);
    CHECK(wl.atom0() == doctest::Approx(w1.value(0.0) / wl.phi1()).epsilon(1e-12));
    CHECK(wl.atom0() > 0.01);
    CHECK(wl.d_mass_defect() <= 1e-4);
}

TEST_CASE("convolving Exp(Phi(1)) with the reflected D-law recovers theta1") {
    // the in-process falsification of the independence import
    for (const auto& m : catalog()) {
        WindowLaw wl(m);
        PotentialDensity theta(m, 1.0);
        double phi1 = wl.phi1();
        double worst = 0.0;
        for (double z = -10.0; z <= 10.0; z += 0.05) {
            double conv = 0.0;
            for (const auto& cell : wl.cells()) {
                double s = z + cell.center;
                if (s >= 0.0) conv += cell.mass * phi1 * std::exp(-phi1 * s);
            }
            worst = std::max(worst, std::abs(conv - theta(z)));
        }
        CHECK(worst <= 1e-3);
    }
}

TEST_CASE("window samples satisfy l <= s with the exponential s-marginal") {
    for (const auto& m : {LevyModel::brownian(0.0, 1.0), LevyModel::stable(1.5)}) {
        WindowLaw wl(m);
        CounterRng rng = CounterRng::keyed(77, 1);
        const int n = 100000;
        double sum_s = 0.0;
        long l_positive = 0;
        for (int i = 0; i < n; ++i) {
            auto [s, l] = wl.sample(rng);
            REQUIRE(l <= s);
            sum_s += s;
            if (l > 0.0) ++l_positive;
        }
        double mean_s = sum_s / n;
        double se = 1.0 / (wl.phi1() * std::sqrt(static_cast<double>(n)));
        CHECK(std::abs(mean_s - 1.0 / wl.phi1()) <= 3.0 * se);
        if (m.variant == LevyVariant::BrownianDrift) {
            double p = static_cast<double>(l_positive) / n;
            CHECK(std::abs(p - 0.5) <= 3.0 * 0.5 / std::sqrt(static_cast<double>(n)));
        }
    }
}

TEST_CASE("sampled l-marginal matches the 1-potential law (KS)") {
    for (const auto& m : {LevyModel::brownian(0.0, 1.0), LevyModel::stable(1.5)}) {
        WindowLaw wl(m);
        LeCdf cdf(m);
        const int n = 1000000;
        CounterRng rng = CounterRng::keyed(4242, 7);
        std::vector<double> ls(n);
        for (int i = 0; i < n; ++i) ls[i] = wl.sample(rng).second;
        std::sort(ls.begin(), ls.end());
        double ks = 0.0;
        for (int i = 0; i < n; i += 97) { // stride keeps the scan cheap
            double fe = (i + 0.5) / n;
            ks = std::max(ks, std::abs(fe - cdf(ls[i])));
        }
        CHECK(ks < 0.005);
    }
}
