#ifndef BRANCHMAX_QUADRATURE_HPP
#define BRANCHMAX_QUADRATURE_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace branchmax {

// Composite Simpson on [a,b] with n subintervals (n rounded up to even).
template <typename F>
double simpson(F&& f, double a, double b, int n) {
    if (n % 2 != 0) ++n;
    double h = (b - a) / n;
    double sum = f(a) + f(b);
    for (int i = 1; i < n; ++i) {
        sum += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    return sum * h / 3.0;
}

// Simpson over tabulated values with uniform step h (size must be odd for an
// exact composite rule; a trailing trapezoid cell handles even sizes).
inline double simpson_tabulated(const std::vector<double>& v, double h) {
    std::size_t n = v.size();
    if (n < 2) return 0.0;
    std::size_t m = (n % 2 == 1) ? n : n - 1;
    double sum = v[0] + v[m - 1];
    for (std::size_t i = 1; i + 1 < m; ++i) sum += v[i] * (i % 2 == 1 ? 4.0 : 2.0);
    double result = sum * h / 3.0;
    if (n % 2 == 0) result += 0.5 * h * (v[n - 2] + v[n - 1]);
    return result;
}

// Gauss-Legendre nodes/weights on [-1,1], computed once by Newton iteration.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(int n) : nodes(n), weights(n) {
        const double pi = 3.14159265358979323846;
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double x = std::cos(pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }

    template <typename F>
    double integrate(F&& f, double a, double b) const {
        double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double sum = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            sum += weights[i] * f(mid + half * nodes[i]);
        }
        return sum * half;
    }
};

// 1/Gamma(x), returning 0 at the poles (nonpositive integers). Uses the
// reflection formula on the left half-line to avoid tgamma overflow issues.
inline double inv_gamma(double x) {
    if (x > 0.5) {
        double lg = std::lgamma(x);
        return lg > 700.0 ? 0.0 : std::exp(-lg);
    }
    const double pi = 3.14159265358979323846;
    if (x <= 0.0 && std::abs(x - std::round(x)) < 1e-12) return 0.0;
    double s = std::sin(pi * x);
    double lg = std::lgamma(1.0 - x);
    if (lg > 700.0) return 0.0;
    return s / pi * std::exp(lg);
}

} // namespace branchmax

#endif
