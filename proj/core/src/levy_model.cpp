#include "branchmax/levy_model.hpp"

#include <cmath>
#include <sstream>

#include "branchmax/errors.hpp"

namespace branchmax {

namespace {

void check_common(const LevyModel& m) {
    if (m.eta < 0.0) throw ValidationError("eta must be >= 0");
    if (m.variant == LevyVariant::SNStable || m.variant == LevyVariant::StableWithDrift) {
        if (!(m.alpha > 1.0 && m.alpha <= 2.0))
            throw ValidationError("alpha must lie in (1, 2]");
        if (!(m.c > 0.0)) throw ValidationError("stable scale c must be > 0");
    }
    if (m.variant == LevyVariant::BrownianExpJumps) {
        if (m.rho < 0.0) throw ValidationError("jump rate rho must be >= 0");
        if (!(m.mu > 0.0)) throw ValidationError("jump-size rate mu must be > 0");
    }
    // -L must not be a subordinator: with no Gaussian part and only downward
    // finite-variation jumps, the drift has to push strictly upward.
    bool no_diffusion = m.eta == 0.0;
    bool no_heavy = m.variant == LevyVariant::BrownianDrift ||
                    m.variant == LevyVariant::BrownianExpJumps;
    if (no_diffusion && no_heavy && m.a <= 0.0) {
        throw ValidationError("model degenerates to the negative of a subordinator "
                              "(eta = 0 and drift <= 0)");
    }
    // psi must dominate any level we care about; doubling check mirrors the
    // bracket expansion used by phi().
    double lam = 1.0;
    while (psi(m, lam) <= 1.0) {
        lam *= 2.0;
        if (lam > 1e12) throw ValidationError("psi does not grow to +infinity");
    }
}

} // namespace

LevyModel LevyModel::brownian(double a, double eta) {
    LevyModel m;
    m.variant = LevyVariant::BrownianDrift;
    m.a = a;
    m.eta = eta;
    check_common(m);
    return m;
}

LevyModel LevyModel::stable(double alpha, double c) {
    LevyModel m;
    m.variant = LevyVariant::SNStable;
    m.alpha = alpha;
    m.c = c;
    check_common(m);
    return m;
}

LevyModel LevyModel::brownian_exp_jumps(double a, double eta, double rho, double mu) {
    LevyModel m;
    m.variant = LevyVariant::BrownianExpJumps;
    m.a = a;
    m.eta = eta;
    m.rho = rho;
    m.mu = mu;
    check_common(m);
    return m;
}

LevyModel LevyModel::stable_with_drift(double a, double alpha, double c) {
    LevyModel m;
    m.variant = LevyVariant::StableWithDrift;
    m.a = a;
    m.alpha = alpha;
    m.c = c;
    check_common(m);
    return m;
}

std::string LevyModel::name() const {
    std::ostringstream os;
    switch (variant) {
        case LevyVariant::BrownianDrift:
            os << "brownian_drift(a=" << a << ", eta=" << eta << ")";
            break;
        case LevyVariant::SNStable:
            os << "sn_stable(alpha=" << alpha << ", c=" << c << ")";
            break;
        case LevyVariant::BrownianExpJumps:
            os << "brownian_exp_jumps(a=" << a << ", eta=" << eta << ", rho=" << rho
               << ", mu=" << mu << ")";
            break;
        case LevyVariant::StableWithDrift:
            os << "stable_with_drift(a=" << a << ", alpha=" << alpha << ", c=" << c << ")";
            break;
    }
    return os.str();
}

double psi(const LevyModel& m, double lam) {
    switch (m.variant) {
        case LevyVariant::BrownianDrift:
            return m.a * lam + 0.5 * m.eta * m.eta * lam * lam;
        case LevyVariant::SNStable:
            return m.c * std::pow(lam, m.alpha);
        case LevyVariant::BrownianExpJumps:
            return m.a * lam + 0.5 * m.eta * m.eta * lam * lam - m.rho * lam / (m.mu + lam);
        case LevyVariant::StableWithDrift:
            return m.a * lam + m.c * std::pow(lam, m.alpha);
    }
    return 0.0;
}

std::complex<double> psi_complex(const LevyModel& m, std::complex<double> beta) {
    if (beta.real() <= 0.0) {
        throw std::domain_error("psi_complex requires Re(beta) > 0");
    }
    switch (m.variant) {
        case LevyVariant::BrownianDrift:
            return m.a * beta + 0.5 * m.eta * m.eta * beta * beta;
        case LevyVariant::SNStable:
            return m.c * std::pow(beta, m.alpha);
        case LevyVariant::BrownianExpJumps:
            return m.a * beta + 0.5 * m.eta * m.eta * beta * beta -
                   m.rho * beta / (m.mu + beta);
        case LevyVariant::StableWithDrift:
            return m.a * beta + m.c * std::pow(beta, m.alpha);
    }
    return {};
}

double psi_prime(const LevyModel& m, double lam) {
    switch (m.variant) {
        case LevyVariant::BrownianDrift:
            return m.a + m.eta * m.eta * lam;
        case LevyVariant::SNStable:
            return lam == 0.0 ? 0.0 : m.c * m.alpha * std::pow(lam, m.alpha - 1.0);
        case LevyVariant::BrownianExpJumps: {
            double d = m.mu + lam;
            return m.a + m.eta * m.eta * lam - m.rho * m.mu / (d * d);
        }
        case LevyVariant::StableWithDrift:
            return m.a + (lam == 0.0 ? 0.0 : m.c * m.alpha * std::pow(lam, m.alpha - 1.0));
    }
    return 0.0;
}

double psi_second(const LevyModel& m, double lam) {
    switch (m.variant) {
        case LevyVariant::BrownianDrift:
            return m.eta * m.eta;
        case LevyVariant::SNStable:
        case LevyVariant::StableWithDrift: {
            double stable = m.alpha == 2.0
                                ? 2.0 * m.c
                                : m.c * m.alpha * (m.alpha - 1.0) * std::pow(lam, m.alpha - 2.0);
            return stable;
        }
        case LevyVariant::BrownianExpJumps: {
            double d = m.mu + lam;
            return m.eta * m.eta + 2.0 * m.rho * m.mu / (d * d * d);
        }
    }
    return 0.0;
}

DriftRegime drift_regime(const LevyModel& m) {
    double d0 = psi_prime(m, 0.0);
    if (d0 > 1e-14) return DriftRegime::DriftUp;
    if (d0 < -1e-14) return DriftRegime::DriftDown;
    return DriftRegime::Oscillating;
}

PhiSolution phi(const LevyModel& m, double q) {
    if (q < 0.0) throw ValidationError("phi requires q >= 0");

    // Locate the minimizer of psi. psi' is increasing, so a sign bisection on
    // the derivative is enough.
    double lam_min = 0.0;
    if (psi_prime(m, 0.0) < 0.0) {
        double hi = 1.0;
        while (psi_prime(m, hi) <= 0.0) hi *= 2.0;
        double lo = 0.0;
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            (psi_prime(m, mid) < 0.0 ? lo : hi) = mid;
            if (hi - lo < 1e-15 * (1.0 + hi)) break;
        }
        lam_min = 0.5 * (lo + hi);
    }

    PhiSolution sol;
    sol.q = q;

    // q below the minimum never happens for q >= 0 (psi(lam_min) <= 0), so the
    // largest root always lies on the right branch.
    double lo = lam_min;
    double hi = std::max(1.0, 2.0 * lam_min);
    while (psi(m, hi) <= q + 1.0) hi *= 2.0;
    sol.bracket = {lo, hi};

    if (psi(m, lo) >= q) {
        // Root at the left edge (q = 0 with psi'(0+) >= 0 gives phi = 0).
        sol.phi = lo;
    } else {
        for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo + hi);
            (psi(m, mid) < q ? lo : hi) = mid;
            if (hi - lo < 1e-13) break;
        }
        double x = 0.5 * (lo + hi);
        // Newton polish on the convex right branch.
        for (int it = 0; it < 8; ++it) {
            double d = psi_prime(m, x);
            if (d <= 0.0) break;
            double step = (psi(m, x) - q) / d;
            x -= step;
            if (x < lam_min) x = lam_min;
            if (std::abs(step) < 1e-15 * (1.0 + x)) break;
        }
        sol.phi = x;
    }
    sol.psi_prime_at_phi = psi_prime(m, sol.phi);
    return sol;
}

} // namespace branchmax
