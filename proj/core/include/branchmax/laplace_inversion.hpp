#ifndef BRANCHMAX_LAPLACE_INVERSION_HPP
#define BRANCHMAX_LAPLACE_INVERSION_HPP

#include <complex>
#include <functional>
#include <vector>

namespace branchmax {

// Numerical inversion of a one-sided Laplace transform on a damped Bromwich
// contour, accelerated with the de Hoog / Knight / Stokes quotient-difference
// scheme (SIAM J. Sci. Stat. Comput. 1982).
//
// The expansion object holds the continued-fraction coefficients for one
// contour (abscissa gamma, half-period T), so several nearby t values can be
// evaluated from a single set of transform samples. That keeps finite
// differences of the inverse consistent to roundoff.
class DehoogExpansion {
public:
    DehoogExpansion(const std::function<std::complex<double>(std::complex<double>)>& F,
                    double T, double gamma, int M);

    double eval(double t) const;

private:
    double T_;
    double gamma_;
    int M_;
    std::vector<std::complex<double>> d_;
};

// One-shot inversion at t. sigma0 must exceed the rightmost singularity of F;
// for scale functions that is Phi(q) plus a margin.
double dehoog_invert(const std::function<std::complex<double>(std::complex<double>)>& F,
                     double t, double sigma0, int M);

// Runs the inversion at M and 2M nodes and fails if they disagree by more
// than rel_tol in relative terms.
double dehoog_invert_checked(
    const std::function<std::complex<double>(std::complex<double>)>& F, double t,
    double sigma0, int M, double rel_tol);

} // namespace branchmax

#endif
