#include "branchmax/offspring.hpp"

#include <cmath>

#include "branchmax/errors.hpp"

namespace branchmax {

OffspringLaw::OffspringLaw(std::vector<double> probs) : p_(std::move(probs)) {
    if (p_.empty() || p_.size() > 65) {
        throw ValidationError("offspring law needs 1..65 entries (support 0..64)");
    }
    double sum = 0.0;
    for (double v : p_) {
        if (v < 0.0) throw ValidationError("offspring probabilities must be >= 0");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw ValidationError("offspring probabilities must sum to 1 (got " +
                              std::to_string(sum) + ")");
    }
    if (p_.size() > 1 && std::abs(p_[1] - 1.0) <= 1e-12) {
        throw ValidationError("offspring law with p_1 = 1 is degenerate");
    }
    for (std::size_t n = 0; n < p_.size(); ++n) {
        double dn = static_cast<double>(n);
        m1_ += p_[n] * dn;
        m2_ += p_[n] * dn * dn;
        m3_ += p_[n] * dn * dn * dn;
    }
    sigma2_ = m2_ - m1_;
    if (m1_ > 1.0 + 1e-12) {
        throw ValidationError("supercritical offspring law (mean " + std::to_string(m1_) +
                              " > 1) is out of scope");
    }
    cdf_.resize(p_.size());
    double c = 0.0;
    for (std::size_t n = 0; n < p_.size(); ++n) {
        c += p_[n];
        cdf_[n] = c;
    }
    cdf_.back() = 1.0;
}

Criticality OffspringLaw::classify() const {
    return std::abs(m1_ - 1.0) <= 1e-12 ? Criticality::Critical : Criticality::Subcritical;
}

double OffspringLaw::pgf(double s) const {
    if (s < 0.0 || s > 1.0) throw ValidationError("pgf argument must lie in [0,1]");
    double v = 0.0;
    for (std::size_t n = p_.size(); n-- > 0;) {
        v = v * s + p_[n];
    }
    return v;
}

double OffspringLaw::remainder(double u) const {
    if (u < 0.0 || u > 1.0) throw ValidationError("remainder argument must lie in [0,1]");
    double total = 0.0;
    for (std::size_t n = 3; n < p_.size(); ++n) {
        if (p_[n] == 0.0) continue;
        double dn = static_cast<double>(n);
        double cubic = dn * (dn - 1.0) * (dn - 2.0) / 2.0;
        double integral;
        if (u < 0.5) {
            // int_0^1 (1-ut)^{n-3}(1-t)^2 dt expanded in powers of u; the
            // terms decay at least as fast as (u)^m, so this is stable.
            integral = 0.0;
            double binom = 1.0; // C(n-3, m)
            double upow = 1.0;
            for (std::size_t m = 0; m <= n - 3; ++m) {
                double dm = static_cast<double>(m);
                integral += binom * upow * 2.0 / ((dm + 1.0) * (dm + 2.0) * (dm + 3.0));
                binom *= -(static_cast<double>(n - 3 - m)) / (dm + 1.0);
                upow *= u;
            }
        } else {
            // Same integral via the Taylor identity for (1-u)^n; safe here
            // because (1-u)^n is small and the low-order terms dominate.
            double pw = std::pow(1.0 - u, dn);
            double num = pw - 1.0 + dn * u - dn * (dn - 1.0) * u * u / 2.0;
            integral = -num / (cubic * u * u * u);
        }
        total += p_[n] * cubic * integral;
    }
    return total * u * u * u;
}

int OffspringLaw::sample(CounterRng& rng) const {
    double u = rng.uniform();
    for (std::size_t n = 0; n < cdf_.size(); ++n) {
        if (u <= cdf_[n]) return static_cast<int>(n);
    }
    return max_children();
}

} // namespace branchmax
