#include "branchmax/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "branchmax/errors.hpp"
#include "branchmax/simulator.hpp"

namespace branchmax {

std::string regime_name(Regime r) {
    switch (r) {
        case Regime::Subcritical: return "subcritical";
        case Regime::CritDriftUp: return "critical_drift_up";
        case Regime::CritOscillating: return "critical_oscillating";
        case Regime::CritDriftDown: return "critical_drift_down";
    }
    return "?";
}

std::optional<RegularVariation> regular_variation(const LevyModel& m) {
    switch (m.variant) {
        case LevyVariant::SNStable:
            return RegularVariation{m.alpha, m.c};
        case LevyVariant::StableWithDrift:
            if (m.a == 0.0) return RegularVariation{m.alpha, m.c};
            return std::nullopt;
        case LevyVariant::BrownianDrift:
        case LevyVariant::BrownianExpJumps:
            if (psi_prime(m, 0.0) == 0.0) {
                return RegularVariation{2.0, 0.5 * psi_second(m, 0.0)};
            }
            return std::nullopt;
    }
    return std::nullopt;
}

RegimePrediction predict(const LevyModel& model, const OffspringLaw& law) {
    RegimePrediction p{};
    if (law.classify() == Criticality::Subcritical) {
        p.regime = Regime::Subcritical;
        p.kind = RegimePrediction::Kind::ExpRate;
        p.value = phi(model, 1.0 - law.mean()).phi;
        p.formula = "rate Phi(1 - E[p])";
        return p;
    }
    double sigma2 = law.factorial_variance();
    switch (drift_regime(model)) {
        case DriftRegime::DriftUp:
            p.regime = Regime::CritDriftUp;
            p.kind = RegimePrediction::Kind::XuLimit;
            p.value = 2.0 * psi_prime(model, 0.0) / sigma2;
            p.formula = "x u(x) -> 2 psi'(0+)/sigma^2";
            return p;
        case DriftRegime::DriftDown:
            p.regime = Regime::CritDriftDown;
            p.kind = RegimePrediction::Kind::ExpRate;
            p.value = phi(model, 0.0).phi;
            p.formula = "rate Phi(0)";
            return p;
        case DriftRegime::Oscillating: {
            p.regime = Regime::CritOscillating;
            p.kind = RegimePrediction::Kind::GammaBand;
            auto rv = regular_variation(model);
            if (rv) {
                p.regularly_varying = true;
                p.alpha = rv->alpha;
                p.ell = rv->ell;
                double B = std::exp(2.0 * std::lgamma(rv->alpha) - std::lgamma(2.0 * rv->alpha));
                p.value = 2.0 / (sigma2 * B);
                p.formula = "x W(x) u(x) band around 2/(sigma^2 B(alpha,alpha))";
            } else {
                p.value = 0.0;
                p.formula = "x W(x) u(x) bounded band";
            }
            return p;
        }
    }
    return p;
}

RateFit fit_exp_rate(const std::vector<std::pair<double, double>>& points, double window_lo,
                     double window_hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (auto [x, u] : points) {
        if (x < window_lo || x > window_hi || u <= 0.0) continue;
        double y = std::log(u);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 8) throw ValidationError("rate fit needs at least 8 positive points in window");
    double denom = n * sxx - sx * sx;
    double slope = (n * sxy - sx * sy) / denom;
    double intercept = (sy - slope * sx) / n;
    double ss = 0.0;
    for (auto [x, u] : points) {
        if (x < window_lo || x > window_hi || u <= 0.0) continue;
        double r = std::log(u) - (intercept + slope * x);
        ss += r * r;
    }
    RateFit fit;
    fit.rate = -slope;
    fit.points = n;
    fit.std_err = n > 2 ? std::sqrt(ss / (n - 2) / (sxx - sx * sx / n)) : 0.0;
    return fit;
}

PlateauFit fit_power_product(const std::vector<std::pair<double, double>>& points,
                             const std::function<double(double)>& weight, double window_lo,
                             double window_hi) {
    std::vector<double> gamma;
    for (auto [x, u] : points) {
        if (x < window_lo || x > window_hi || u <= 0.0) continue;
        gamma.push_back(x * weight(x) * u);
    }
    if (gamma.size() < 8) {
        throw ValidationError("plateau fit needs at least 8 positive points in window");
    }
    PlateauFit fit;
    fit.points = static_cast<int>(gamma.size());
    fit.min_value = *std::min_element(gamma.begin(), gamma.end());
    fit.max_value = *std::max_element(gamma.begin(), gamma.end());
    fit.band_ratio = fit.min_value > 0.0 ? fit.max_value / fit.min_value
                                         : std::numeric_limits<double>::infinity();
    std::nth_element(gamma.begin(), gamma.begin() + gamma.size() / 2, gamma.end());
    fit.median = gamma[gamma.size() / 2];
    return fit;
}

double spitzer_positivity(const LevyModel& model, double t, long n_paths, double dt,
                          std::uint64_t seed) {
    long steps = static_cast<long>(std::ceil(t / dt));
    double total = 0.0;
    for (long p = 0; p < n_paths; ++p) {
        CounterRng rng = CounterRng::keyed(seed, static_cast<std::uint64_t>(p), 0x5017ull);
        double pos = 0.0;
        long nonneg = 0;
        for (long s = 0; s < steps; ++s) {
            pos += sample_increment(model, dt, rng);
            if (pos >= 0.0) ++nonneg;
        }
        total += static_cast<double>(nonneg) / static_cast<double>(steps);
    }
    return total / static_cast<double>(n_paths);
}

} // namespace branchmax
