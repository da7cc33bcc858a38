#ifndef BRANCHMAX_LEVY_MODEL_HPP
#define BRANCHMAX_LEVY_MODEL_HPP

#include <array>
#include <complex>
#include <string>

namespace branchmax {

enum class LevyVariant { BrownianDrift, SNStable, BrownianExpJumps, StableWithDrift };

enum class DriftRegime { DriftUp, Oscillating, DriftDown };

// A spectrally negative Levy process from the closed-form catalog, described
// by its Laplace exponent psi(lambda) = log E[exp(lambda L_1)]:
//
//   BrownianDrift(a, eta)            psi = a l + eta^2 l^2 / 2
//   SNStable(alpha, c)               psi = c l^alpha,  alpha in (1,2]
//   BrownianExpJumps(a, eta, rho, mu) psi = a l + eta^2 l^2/2 - rho l/(mu+l)
//                                    (downward jumps at rate rho, sizes Exp(mu))
//   StableWithDrift(a, alpha, c)     psi = a l + c l^alpha
//
// Construction rejects parameter sets for which -L would be a subordinator.
struct LevyModel {
    LevyVariant variant = LevyVariant::BrownianDrift;
    double a = 0.0;     // drift coefficient
    double eta = 0.0;   // Gaussian coefficient
    double alpha = 2.0; // stability index, (1,2]
    double c = 1.0;     // stable scale
    double rho = 0.0;   // jump rate
    double mu = 1.0;    // exponential jump-size rate (jumps are negative, mean 1/mu)

    static LevyModel brownian(double a, double eta);
    static LevyModel stable(double alpha, double c = 1.0);
    static LevyModel brownian_exp_jumps(double a, double eta, double rho, double mu);
    static LevyModel stable_with_drift(double a, double alpha, double c = 1.0);

    std::string name() const;
};

double psi(const LevyModel& m, double lam);

// Analytic continuation of psi to Re(beta) > 0 (principal branch for the
// stable variants). Throws std::domain_error for Re(beta) <= 0.
std::complex<double> psi_complex(const LevyModel& m, std::complex<double> beta);

// Right-derivative at 0 when lam == 0; exact derivative elsewhere.
double psi_prime(const LevyModel& m, double lam);

// Second derivative; used for the regular-variation scale at 0 when alpha = 2.
double psi_second(const LevyModel& m, double lam);

DriftRegime drift_regime(const LevyModel& m);

struct PhiSolution {
    double q = 0.0;
    double phi = 0.0;               // largest root of psi(lambda) = q
    double psi_prime_at_phi = 0.0;  // psi'(phi); 1/phi'(q) when positive
    std::array<double, 2> bracket{0.0, 0.0};
};

// Largest nonnegative root of psi(lambda) = q. The minimizer of psi is located
// first by derivative bisection so that the right branch is bracketed even
// when two roots exist.
PhiSolution phi(const LevyModel& m, double q);

} // namespace branchmax

#endif
