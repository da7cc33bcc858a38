#include "branchmax/scale.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "branchmax/errors.hpp"
#include "branchmax/laplace_inversion.hpp"
#include "branchmax/quadrature.hpp"

namespace branchmax {

namespace {

// Past this many e-folds of the dominant exponential, direct series lose the
// residual to cancellation and the asymptotic tail expansion takes over. The
// drift-perturbed series alternates inside, so it runs out of digits earlier.
constexpr double kResidualSwitchStable = 16.0;
constexpr double kResidualSwitchDrift = 11.0;

LevyModel structural_normal_form(const LevyModel& m) {
    if (m.variant == LevyVariant::SNStable && m.alpha == 2.0) {
        return LevyModel::brownian(0.0, std::sqrt(2.0 * m.c));
    }
    if (m.variant == LevyVariant::StableWithDrift) {
        if (m.alpha == 2.0) return LevyModel::brownian(m.a, std::sqrt(2.0 * m.c));
        if (m.a == 0.0) return LevyModel::stable(m.alpha, m.c);
    }
    return m;
}

double log_binom(int n, int k) {
    return std::lgamma(n + k + 1.0) - std::lgamma(n + 1.0) - std::lgamma(k + 1.0);
}

} // namespace

ScaleEvaluator::ScaleEvaluator(const LevyModel& model, double q, ScaleBackend backend,
                               int inversion_nodes)
    : model_(model), norm_(structural_normal_form(model)), q_(q), backend_(backend),
      nodes_(inversion_nodes) {
    if (q < 0.0) throw ValidationError("scale functions require q >= 0");
    phi_ = phi(norm_, q);

    switch (norm_.variant) {
        case LevyVariant::BrownianDrift:
        case LevyVariant::BrownianExpJumps:
            form_ = Form::ExpSum;
            setup_expsum();
            break;
        case LevyVariant::SNStable:
            form_ = Form::StableSeries;
            setup_stable_tail();
            break;
        case LevyVariant::StableWithDrift:
            form_ = Form::StableDriftSeries;
            setup_stable_tail();
            break;
    }
}

void ScaleEvaluator::setup_expsum() {
    rates_.clear();
    coefs_.clear();
    lin0_ = lin1_ = 0.0;
    phi_term_ = -1;

    if (norm_.variant == LevyVariant::BrownianDrift) {
        double a = norm_.a, eta = norm_.eta;
        if (eta == 0.0) {
            // Pure positive drift: 1/(a b - q).
            rates_ = {q_ / a};
            coefs_ = {1.0 / a};
            phi_term_ = 0;
            return;
        }
        double e2 = eta * eta;
        if (q_ == 0.0 && a == 0.0) {
            lin1_ = 2.0 / e2; // W(x) = 2x/eta^2
            return;
        }
        double disc = std::sqrt(a * a + 2.0 * e2 * q_);
        rates_ = {(-a + disc) / e2, (-a - disc) / e2};
        coefs_ = {1.0 / disc, -1.0 / disc};
        phi_term_ = 0;
        return;
    }

    // BrownianExpJumps: 1/(psi - q) = (mu + b) / P(b) with P polynomial.
    double a = norm_.a, eta = norm_.eta, rho = norm_.rho, mu = norm_.mu;
    double d0 = psi_prime(norm_, 0.0);
    std::vector<double> roots;
    bool double_root_zero = false;

    if (eta > 0.0) {
        double p3 = 0.5 * eta * eta;
        double p2 = a + 0.5 * eta * eta * mu;
        double p1 = a * mu - q_ - rho;
        if (q_ > 0.0) {
            // Deflate the known root Phi(q), then solve the quadratic factor.
            double c2 = p3;
            double c1 = p2 + phi_.phi * c2;
            double c0 = p1 + phi_.phi * c1;
            double disc = c1 * c1 - 4.0 * c2 * c0;
            if (disc < 0.0) throw NumericError("unexpected complex scale-function roots");
            double sq = std::sqrt(disc);
            roots = {phi_.phi, (-c1 + sq) / (2.0 * c2), (-c1 - sq) / (2.0 * c2)};
        } else if (std::abs(d0) < 1e-14) {
            double_root_zero = true;
            double r = -p2 / p3;
            lin1_ = mu / p2;
            lin0_ = (p2 - mu * p3) / (p2 * p2);
            rates_ = {r};
            coefs_ = {(mu + r) / (r * r * p3)};
        } else {
            double disc = p2 * p2 - 4.0 * p3 * p1;
            double sq = std::sqrt(disc);
            roots = {0.0, (-p2 + sq) / (2.0 * p3), (-p2 - sq) / (2.0 * p3)};
        }
        if (!double_root_zero) {
            for (double r : roots) {
                double pd = 3.0 * p3 * r * r + 2.0 * p2 * r + p1;
                rates_.push_back(r);
                coefs_.push_back((mu + r) / pd);
            }
        }
    } else {
        double p2 = a;
        double p1 = a * mu - q_ - rho;
        if (q_ > 0.0) {
            roots = {phi_.phi, -q_ * mu / (a * phi_.phi)};
        } else if (std::abs(d0) < 1e-14) {
            // P(b) = a b^2; W(x) = (mu x + 1)/a.
            lin1_ = mu / a;
            lin0_ = 1.0 / a;
            return;
        } else {
            roots = {0.0, (rho - a * mu) / a};
        }
        for (double r : roots) {
            double pd = 2.0 * p2 * r + p1;
            rates_.push_back(r);
            coefs_.push_back((mu + r) / pd);
        }
    }

    for (std::size_t i = 0; i < rates_.size(); ++i) {
        if (std::abs(rates_[i] - phi_.phi) < 1e-9 * (1.0 + phi_.phi)) {
            phi_term_ = static_cast<int>(i);
            break;
        }
    }
}

void ScaleEvaluator::setup_stable_tail() {
    tail_terms_.clear();
    double alpha = norm_.alpha, c = norm_.c, a = norm_.a;

    if (q_ > 0.0) {
        // 1/(psi - q) = -(1/q) sum_m ((a b + c b^alpha)/q)^m: keep the
        // non-analytic exponents s = (m - r) + alpha r, r >= 1.
        const int m_max = 12;
        for (int m = 1; m <= m_max; ++m) {
            double qm = -std::pow(q_, -(m + 1.0));
            for (int r = 1; r <= m; ++r) {
                if (a == 0.0 && r != m) continue;
                double s = (m - r) + alpha * r;
                if (s > 14.0) continue;
                double coef = qm * std::exp(log_binom(m - r, r)) *
                              std::pow(a, static_cast<double>(m - r)) *
                              std::pow(c, static_cast<double>(r));
                tail_terms_.emplace_back(s, coef);
            }
        }
    } else if (a != 0.0) {
        // q = 0: 1/(a b + c b^alpha) = (1/(a b)) sum_m (-(c/a) b^{alpha-1})^m.
        // For drift up the m = 0 pole coincides with Phi(0) = 0 and is the
        // exponential part itself, so it is excluded.
        int m0 = a > 0.0 ? 1 : 0;
        for (int m = m0; m <= 24; ++m) {
            double s = (alpha - 1.0) * m - 1.0;
            if (s > 14.0) break;
            double coef = (1.0 / a) * std::pow(-c / a, static_cast<double>(m));
            tail_terms_.emplace_back(s, coef);
        }
    }
    std::sort(tail_terms_.begin(), tail_terms_.end());

    // Merge exponent collisions so the ascending-term truncation stays sound.
    std::vector<std::pair<double, double>> merged;
    for (const auto& [s, coef] : tail_terms_) {
        if (!merged.empty() && std::abs(merged.back().first - s) < 1e-12) {
            merged.back().second += coef;
        } else {
            merged.emplace_back(s, coef);
        }
    }
    tail_terms_ = std::move(merged);
}

double ScaleEvaluator::series_value(double x, bool derivative) const {
    return static_cast<double>(series_sum(x, derivative));
}

long double ScaleEvaluator::series_sum(double x, bool derivative) const {
    double alpha = norm_.alpha, c = norm_.c, a = norm_.a;
    double lx = std::log(x);
    double w = -a / c;
    double lw = w == 0.0 ? 0.0 : std::log(std::abs(w));
    long double acc = 0.0L;

    double qc_pow = 1.0 / c; // q^n / c^{n+1}
    for (int n = 0; n <= 400; ++n) {
        long double inner = 0.0L;
        double prev = std::numeric_limits<double>::infinity();
        for (int j = 0; j <= 600; ++j) {
            double s = alpha * (n + 1) + (alpha - 1.0) * j;
            double lt = log_binom(n, j) + j * lw + (s - 1.0 - (derivative ? 1.0 : 0.0)) * lx -
                        std::lgamma(s);
            double term = std::exp(lt);
            if (w < 0.0 && (j % 2 == 1)) term = -term;
            if (derivative) term *= (s - 1.0);
            inner += term;
            double at = std::abs(term);
            if (w == 0.0) break;
            if (at < 1e-18 * (std::abs(static_cast<double>(acc + inner)) + 1e-300) &&
                j >= 4 && at < prev) {
                break;
            }
            prev = at;
        }
        acc += static_cast<long double>(qc_pow) * inner;
        if (q_ == 0.0) break;
        double contrib = std::abs(qc_pow * static_cast<double>(inner));
        if (contrib < 1e-18 * (std::abs(static_cast<double>(acc)) + 1e-300) && n >= 2) break;
        qc_pow *= q_ / c;
    }
    return acc;
}

double ScaleEvaluator::tail_sum(double x, bool derivative) const {
    double acc = 0.0;
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& [s, coef] : tail_terms_) {
        double ig = inv_gamma(-s);
        if (ig == 0.0) continue;
        double term = coef * ig *
                      (derivative ? (-s - 1.0) * std::pow(x, -s - 2.0) : std::pow(x, -s - 1.0));
        double at = std::abs(term);
        if (at > prev) break; // asymptotic series: truncate at the smallest term
        acc += term;
        prev = at;
    }
    return acc;
}

double ScaleEvaluator::residual_switch() const {
    return form_ == Form::StableDriftSeries ? kResidualSwitchDrift : kResidualSwitchStable;
}

double ScaleEvaluator::closed_value(double x) const {
    if (x < 0.0) return 0.0;
    if (form_ == Form::ExpSum) {
        double v = lin0_ + lin1_ * x;
        for (std::size_t i = 0; i < rates_.size(); ++i) {
            v += coefs_[i] * std::exp(rates_[i] * x);
        }
        return v;
    }
    if (x == 0.0) return 0.0; // alpha > 1
    double phx = phi_.phi * x;
    if (phx <= residual_switch()) return series_value(x, false);
    return std::exp(phx) / phi_.psi_prime_at_phi + tail_sum(x, false);
}

double ScaleEvaluator::closed_derivative(double x) const {
    if (x < 0.0) return 0.0;
    if (form_ == Form::ExpSum) {
        double v = lin1_;
        for (std::size_t i = 0; i < rates_.size(); ++i) {
            v += coefs_[i] * rates_[i] * std::exp(rates_[i] * x);
        }
        return v;
    }
    if (x == 0.0) return std::numeric_limits<double>::infinity();
    double phx = phi_.phi * x;
    if (phx <= residual_switch()) return series_value(x, true);
    return phi_.phi * std::exp(phx) / phi_.psi_prime_at_phi + tail_sum(x, true);
}

double ScaleEvaluator::closed_residual(double x, bool derivative) const {
    bool phi_positive = phi_.phi > 0.0 && phi_.psi_prime_at_phi > 0.0;
    bool drift_up_q0 = q_ == 0.0 && psi_prime(norm_, 0.0) > 0.0;
    if (!phi_positive && !drift_up_q0) {
        throw ValidationError("scale residual undefined: psi'(Phi(q)) degenerates "
                              "(oscillating case at q = 0)");
    }
    if (form_ == Form::ExpSum) {
        if (phi_term_ < 0) {
            throw NumericError("exponential-sum form has no dominant term");
        }
        double v = derivative ? -lin1_ : -(lin0_ + lin1_ * x);
        for (std::size_t i = 0; i < rates_.size(); ++i) {
            if (static_cast<int>(i) == phi_term_) continue;
            double t = coefs_[i] * std::exp(rates_[i] * x);
            v -= derivative ? t * rates_[i] : t;
        }
        return v;
    }
    double phx = phi_.phi * x;
    if (phx <= residual_switch()) {
        long double ep = std::exp(static_cast<long double>(phx)) /
                         static_cast<long double>(phi_.psi_prime_at_phi);
        if (derivative) ep *= phi_.phi;
        return static_cast<double>(ep - series_sum(x, derivative));
    }
    return -tail_sum(x, derivative);
}

double ScaleEvaluator::value(double x) const {
    if (x < 0.0) return 0.0;
    if (backend_ == ScaleBackend::ClosedForm) return closed_value(x);
    return inversion_value(x);
}

double ScaleEvaluator::derivative(double x) const {
    if (x < 0.0) return 0.0;
    if (backend_ == ScaleBackend::ClosedForm) return closed_derivative(x);
    return inversion_derivative(x);
}

double ScaleEvaluator::residual(double x) const {
    if (x < 0.0) x = 0.0;
    if (backend_ == ScaleBackend::ClosedForm) return closed_residual(x, false);
    double ep = std::exp(phi_.phi * x) / phi_.psi_prime_at_phi;
    return ep - inversion_value(x);
}

double ScaleEvaluator::residual_derivative(double x) const {
    if (backend_ == ScaleBackend::ClosedForm) return closed_residual(x, true);
    double ep = phi_.phi * std::exp(phi_.phi * x) / phi_.psi_prime_at_phi;
    return ep - inversion_derivative(x);
}

double ScaleEvaluator::asymptote_deviation() const {
    bool phi_positive = phi_.phi > 0.0 && phi_.psi_prime_at_phi > 0.0;
    bool drift_up_q0 = q_ == 0.0 && psi_prime(norm_, 0.0) > 0.0;
    if (!phi_positive && !drift_up_q0) {
        throw ValidationError("asymptote check requires q > 0 or psi'(0+) != 0");
    }
    double worst = 0.0;
    for (int i = 0; i <= 30; ++i) {
        double x = 10.0 + i;
        double dev;
        if (phi_positive) {
            dev = closed_residual(x, false) * phi_.psi_prime_at_phi * std::exp(-phi_.phi * x);
        } else {
            dev = closed_value(x) * phi_.psi_prime_at_phi - 1.0;
        }
        worst = std::max(worst, std::abs(dev));
    }
    return worst;
}

double ScaleEvaluator::inversion_value(double x) const {
    if (x < 1e-8) return closed_value(0.0);
    double sigma0 = phi_.phi + std::max(1.0, 3.0 / x);
    auto F = [this](std::complex<double> b) { return 1.0 / (psi_complex(model_, b) - q_); };
    return dehoog_invert_checked(F, x, sigma0, nodes_, 1e-6);
}

double ScaleEvaluator::inversion_derivative(double x) const {
    if (x <= 0.0) throw ValidationError("scale derivative requires x > 0");
    double sigma0 = phi_.phi + std::max(1.0, 3.0 / x);
    auto F = [this](std::complex<double> b) { return 1.0 / (psi_complex(model_, b) - q_); };
    // One contour, several evaluation points: the expansion error is smooth in
    // t, so finite differences of it stay clean.
    DehoogExpansion exp(F, 4.0 * x, sigma0, 2 * nodes_);
    double h = std::max(1e-6, 1e-6 * x);
    double d1 = (exp.eval(x + h) - exp.eval(x - h)) / (2.0 * h);
    double d2 = (exp.eval(x + 0.5 * h) - exp.eval(x - 0.5 * h)) / h;
    double rel = std::abs(d1 - d2) / std::max(std::abs(d2), 1e-300);
    if (rel > 1e-5) {
        throw InversionFailure("finite-difference derivative failed its step-halving check",
                               rel);
    }
    return (4.0 * d2 - d1) / 3.0;
}

PotentialDensity::PotentialDensity(const LevyModel& model, double q)
    : scale_(model, q, ScaleBackend::ClosedForm) {
    if (q < 0.0) throw ValidationError("potential density requires q >= 0");
    if (q == 0.0 && psi_prime(model, 0.0) >= 0.0) {
        throw ValidationError("the 0-potential density exists only when psi'(0+) < 0");
    }
    double d = scale_.phi_solution().psi_prime_at_phi;
    if (d <= 0.0) throw NumericError("psi'(Phi(q)) = 0: potential density degenerates");
    phi_prime_ = 1.0 / d;
}

double PotentialDensity::operator()(double z) const {
    double v;
    if (z > 0.0) {
        v = phi_prime_ * std::exp(-scale_.phi_solution().phi * z);
    } else {
        v = scale_.residual(-z);
    }
    if (v < 0.0) {
        if (v >= -1e-12) return 0.0;
        throw NumericError("potential density went negative beyond round-off");
    }
    return v;
}

} // namespace branchmax
