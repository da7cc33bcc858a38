#ifndef BRANCHMAX_OFFSPRING_HPP
#define BRANCHMAX_OFFSPRING_HPP

#include <vector>

#include "branchmax/rng.hpp"

namespace branchmax {

enum class Criticality { Critical, Subcritical };

// Finite-support reproduction law p = (p_0, ..., p_N), N <= 64. Supercritical
// laws (mean > 1) are rejected at construction, as is the degenerate p_1 = 1.
class OffspringLaw {
public:
    explicit OffspringLaw(std::vector<double> probs);

    const std::vector<double>& probs() const { return p_; }
    int max_children() const { return static_cast<int>(p_.size()) - 1; }

    double mean() const { return m1_; }          // E[p]
    double second_moment() const { return m2_; } // E[p^2]
    double third_moment() const { return m3_; }  // E[p^3]
    double factorial_variance() const { return sigma2_; } // E[p^2 - p]

    Criticality classify() const;

    // Generating function F(s) = sum p_n s^n on [0,1].
    double pgf(double s) const;

    // Cubic Taylor remainder of F(1-u) about u = 0:
    //   R(u) = u^3 sum_{n>=3} p_n [n(n-1)(n-2)/2] int_0^1 (1-ut)^{n-3}(1-t)^2 dt,
    // evaluated exactly (the integral is polynomial in u). Satisfies
    // 0 <= R(u) <= E[p^3] u^3 and
    //   1 - F(1-u) = E[p] u - E[p^2-p] u^2/2 + R(u).
    double remainder(double u) const;

    int sample(CounterRng& rng) const;

private:
    std::vector<double> p_;
    std::vector<double> cdf_;
    double m1_ = 0.0, m2_ = 0.0, m3_ = 0.0, sigma2_ = 0.0;
};

} // namespace branchmax

#endif
