#include "branchmax/window_law.hpp"

#include <algorithm>
#include <cmath>

#include "branchmax/errors.hpp"

namespace branchmax {

namespace {
constexpr int kGridNodes = 4096;
constexpr double kTailTarget = 1e-9;
} // namespace

WindowLaw::WindowLaw(const LevyModel& model)
    : model_(model), w1_(model, 1.0, ScaleBackend::ClosedForm) {
    phi1_ = w1_.phi_solution().phi;
    atom0_ = w1_.value(0.0) / phi1_;
    reduced_confidence_ = model.variant == LevyVariant::BrownianExpJumps && model.eta == 0.0;
    build_table();
}

double WindowLaw::sup_tail(double x) const {
    if (x < 0.0) throw ValidationError("sup_tail requires x >= 0");
    return std::exp(-phi1_ * x);
}

double WindowLaw::d_density(double z) const {
    if (z <= 0.0) throw ValidationError("d_density requires z > 0");
    double v = w1_.residual(z) - w1_.residual_derivative(z) / phi1_;
    if (v < 0.0) {
        if (v < -1e-10) throw NumericError("D-density went negative beyond round-off");
        v = 0.0;
    }
    return v;
}

void WindowLaw::build_table() {
    // Expand the grid end until the local power-law tail estimate of the
    // remaining mass drops below target. Heavy-tailed members (pure stable)
    // genuinely need a large cap; the estimate is conservative for
    // exponential tails, where the local exponent blows up quickly.
    double z_lo = 1e-7 / phi1_;
    double z_hi = 16.0 / phi1_;
    auto tail_estimate = [this](double z) {
        double f1 = d_density(z);
        double f2 = d_density(z * 1.1);
        if (f1 <= 0.0 || f2 <= 0.0) return 0.0;
        double k = std::log(f1 / f2) / std::log(1.1);
        if (k <= 1.0) return 1.0; // not integrable-looking yet; keep expanding
        return f1 * z / (k - 1.0);
    };
    while (z_hi < 1e8 && tail_estimate(z_hi) > kTailTarget) z_hi *= 2.0;
    tail_mass_ = tail_estimate(z_hi);

    z_.assign(1, 0.0);
    double ratio = std::pow(z_hi / z_lo, 1.0 / (kGridNodes - 1));
    for (int i = 0; i < kGridNodes; ++i) {
        z_.push_back(z_lo * std::pow(ratio, i));
    }

    std::vector<double> f(z_.size(), 0.0);
    for (std::size_t i = 1; i < z_.size(); ++i) f[i] = d_density(z_[i]);

    cdf_.assign(z_.size(), 0.0);
    cdf_[0] = atom0_;
    cells_.clear();
    cells_.push_back({atom0_, 0.0});

    for (std::size_t i = 0; i + 1 < z_.size(); ++i) {
        double a = z_[i], b = z_[i + 1];
        double fa = i == 0 ? f[1] : f[i];
        double fb = f[i + 1];
        double mass, center;
        if (fa <= 0.0 || fb <= 0.0) {
            mass = 0.5 * (std::max(fa, 0.0) + std::max(fb, 0.0)) * (b - a);
            center = 0.5 * (a + b);
        } else if (i == 0) {
            // Head cell [0, z_1]: local power f ~ C z^g, g > -1.
            double g = std::log(f[2] / f[1]) / std::log(z_[2] / z_[1]);
            if (g <= -0.999) g = -0.999;
            mass = fb * b / (g + 1.0);
            center = b * (g + 1.0) / (g + 2.0);
        } else {
            double r = b / a;
            double g = std::log(fb / fa) / std::log(r);
            double g1 = g + 1.0, g2 = g + 2.0;
            if (std::abs(g1) < 1e-8) {
                mass = fa * a * std::log(r);
            } else {
                mass = fa * a * (std::pow(r, g1) - 1.0) / g1;
            }
            if (std::abs(g2) < 1e-8) {
                center = fa * a * a * std::log(r) / std::max(mass, 1e-300);
            } else {
                center = fa * a * a * (std::pow(r, g2) - 1.0) / g2 / std::max(mass, 1e-300);
            }
            if (!(center >= a && center <= b)) center = 0.5 * (a + b);
        }
        cdf_[i + 1] = cdf_[i] + mass;
        if (mass > 0.0) cells_.push_back({mass, center});
    }
    total_mass_ = cdf_.back();
    mass_defect_ = std::abs(total_mass_ + tail_mass_ - 1.0);
    if (tail_mass_ > 0.0) {
        cells_.push_back({tail_mass_, z_.back() + 1.0 / phi1_});
    }
}

double WindowLaw::sample_d(CounterRng& rng) const {
    double u = rng.uniform();
    if (u < atom0_) return 0.0;
    if (u >= total_mass_) {
        double denom = std::max(1.0 - total_mass_, 1e-300);
        double excess = std::min((u - total_mass_) / denom, 1.0 - 1e-16);
        return z_.back() - std::log1p(-excess) / phi1_;
    }
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
    if (i == 0) return 0.0;
    if (i >= cdf_.size()) i = cdf_.size() - 1;
    double c0 = cdf_[i - 1], c1 = cdf_[i];
    if (c1 <= c0) return z_[i];
    double t = (u - c0) / (c1 - c0);
    return z_[i - 1] + t * (z_[i] - z_[i - 1]);
}

std::pair<double, double> WindowLaw::sample(CounterRng& rng) const {
    double s = -std::log(rng.uniform()) / phi1_;
    double d = sample_d(rng);
    return {s, s - d};
}

} // namespace branchmax
