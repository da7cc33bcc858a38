#include "branchmax/laplace_inversion.hpp"

#include <cmath>
#include <string>

#include "branchmax/errors.hpp"

namespace branchmax {

namespace {
using cplx = std::complex<double>;
}

DehoogExpansion::DehoogExpansion(const std::function<cplx(cplx)>& F, double T, double gamma,
                                 int M)
    : T_(T), gamma_(gamma), M_(M), d_(2 * M + 1) {
    const double pi = 3.14159265358979323846;

    std::vector<cplx> f(2 * M + 1);
    f[0] = 0.5 * F(cplx(gamma, 0.0));
    for (int i = 1; i <= 2 * M; ++i) {
        f[i] = F(cplx(gamma, i * pi / T));
    }

    // Quotient-difference recursion, eqn 20 of de Hoog et al.
    std::vector<std::vector<cplx>> e(2 * M + 1, std::vector<cplx>(M + 1, 0.0));
    std::vector<std::vector<cplx>> q(2 * M + 1, std::vector<cplx>(M + 1, 0.0));
    for (int i = 0; i < 2 * M; ++i) {
        q[i][1] = f[i + 1] / f[i];
    }
    for (int r = 1; r <= M - 1; ++r) {
        for (int i = 2 * (M - r); i >= 0; --i) {
            if (i < 2 * (M - r) && r > 1) {
                q[i][r] = q[i + 1][r - 1] * e[i + 1][r - 1] / e[i][r - 1];
            }
            e[i][r] = q[i + 1][r] - q[i][r] + e[i + 1][r - 1];
        }
    }

    d_[0] = f[0];
    for (int m = 1; m <= M; ++m) {
        d_[2 * m - 1] = -q[0][m];
        d_[2 * m] = -e[0][m];
    }
}

double DehoogExpansion::eval(double t) const {
    const double pi = 3.14159265358979323846;
    const int M = M_;

    // Continued-fraction evaluation with the remainder term, eqns 21-24.
    cplx z(std::cos(pi * t / T_), std::sin(pi * t / T_));
    std::vector<cplx> A(2 * M + 2), B(2 * M + 2);
    A[0] = 0.0;
    B[0] = 1.0;
    A[1] = d_[0];
    B[1] = 1.0;
    for (int n = 2; n <= 2 * M + 1; ++n) {
        cplx dz = d_[n - 1] * z;
        A[n] = A[n - 1] + dz * A[n - 2];
        B[n] = B[n - 1] + dz * B[n - 2];
    }
    cplx h2m = 0.5 * (1.0 + z * (d_[2 * M - 1] - d_[2 * M]));
    cplx r2m = -h2m * (1.0 - std::sqrt(1.0 + z * d_[2 * M] / (h2m * h2m)));
    cplx An = A[2 * M] + r2m * A[2 * M - 1];
    cplx Bn = B[2 * M] + r2m * B[2 * M - 1];

    return std::exp(gamma_ * t) / T_ * (An / Bn).real();
}

double dehoog_invert(const std::function<cplx(cplx)>& F, double t, double sigma0, int M) {
    double T = 4.0 * std::max(t, 1e-3);
    DehoogExpansion exp(F, T, sigma0, M);
    return exp.eval(t);
}

double dehoog_invert_checked(const std::function<cplx(cplx)>& F, double t, double sigma0,
                             int M, double rel_tol) {
    double v1 = dehoog_invert(F, t, sigma0, M);
    double v2 = dehoog_invert(F, t, sigma0, 2 * M);
    double scale = std::max({std::abs(v1), std::abs(v2), 1e-300});
    double disc = std::abs(v2 - v1) / scale;
    if (disc > rel_tol) {
        throw InversionFailure("Laplace inversion self-check failed at t=" +
                                   std::to_string(t) + " (discrepancy " +
                                   std::to_string(disc) + ")",
                               disc);
    }
    return v2;
}

} // namespace branchmax
