#include <algorithm>
#include <cmath>
#include <limits>

#include "branchmax/errors.hpp"
#include "branchmax/quadrature.hpp"
#include "branchmax/solver.hpp"

namespace branchmax {

namespace {

// Log-spaced completion nodes past the grid end.
std::vector<double> log_nodes(double from, double to, int count) {
    std::vector<double> v(count);
    double r = std::pow(to / from, 1.0 / (count - 1));
    double x = from;
    for (int i = 0; i < count; ++i) {
        v[i] = x;
        x *= r;
    }
    return v;
}

double trapz_nodes(const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        s += 0.5 * (y[i] + y[i + 1]) * (x[i + 1] - x[i]);
    }
    return s;
}

// Cell-wise Simpson of kernel * f on a uniform grid, with the kernel sampled
// at node and midpoint lags and f linear within cells (the curve's own
// interpolation rule). kernel_at(k) returns the kernel at offset k * h/2.
template <typename KernelAt>
double cell_simpson(const std::vector<double>& f, std::size_t lo, std::size_t hi, double h,
                    KernelAt&& kernel_at) {
    double acc = 0.0;
    for (std::size_t j = lo; j < hi; ++j) {
        double fa = f[j], fb = f[j + 1];
        double ka = kernel_at(2 * static_cast<long>(j));
        double km = kernel_at(2 * static_cast<long>(j) + 1);
        double kb = kernel_at(2 * static_cast<long>(j) + 2);
        acc += (h / 6.0) * (ka * fa + 4.0 * km * 0.5 * (fa + fb) + kb * fb);
    }
    return acc;
}

} // namespace

DeltaReconstruction::DeltaReconstruction(const SurvivalCurve& curve, const LevyModel& model,
                                         const OffspringLaw& law, int neg_extent)
    : curve_(curve), law_(law), theta_(model, 1.0), h_(curve.step()),
      n_(static_cast<int>(curve.values().size()) - 1), neg_extent_(neg_extent) {
    fu_.resize(n_ + 1);
    fu2_.resize(n_ + 1);
    fr_.resize(n_ + 1);
    for (int j = 0; j <= n_; ++j) {
        double u = curve.values()[j];
        fu_[j] = u;
        fu2_[j] = u * u;
        fr_[j] = law.remainder(u);
    }
    // Kernel on the half-grid: theta(k h/2) for k in [-2(n + neg_extent), 2n].
    theta_lag_.resize(static_cast<std::size_t>(4 * n_ + 2 * neg_extent_) + 1);
    for (int k = -2 * (n_ + neg_extent_); k <= 2 * n_; ++k) {
        theta_lag_[k + 2 * (n_ + neg_extent_)] = theta_(0.5 * h_ * k);
    }
    double X = h_ * n_;
    tail_nodes_ = log_nodes(X * (1.0 + 1e-9), std::max(1e4, 100.0 * X), 160);
    tail_u_.resize(tail_nodes_.size());
    for (std::size_t i = 0; i < tail_nodes_.size(); ++i) tail_u_[i] = curve_(tail_nodes_[i]);
}

// E[1_{L_e < x} f(x - w)] = int_0^inf theta1(x - w) f(w) dw for each of
// f = u, u^2, R(u). theta_at(k) must return theta1(x - k h/2); the kernel
// kink at w = x then falls on a cell boundary for grid-aligned x.
double DeltaReconstruction::assemble(const std::function<double(long)>& theta_at,
                                     double x) const {
    auto integral = [&](const std::vector<double>& f) {
        return cell_simpson(f, 0, static_cast<std::size_t>(n_), h_, theta_at);
    };
    double eu = integral(fu_);
    double eu2 = integral(fu2_);
    double er = integral(fr_);

    std::vector<double> tu(tail_nodes_.size()), tu2(tail_nodes_.size()), tr(tail_nodes_.size());
    for (std::size_t i = 0; i < tail_nodes_.size(); ++i) {
        double thv = theta_(x - tail_nodes_[i]);
        double u = tail_u_[i];
        tu[i] = thv * u;
        tu2[i] = thv * u * u;
        tr[i] = thv * law_.remainder(u);
    }
    eu += trapz_nodes(tail_nodes_, tu);
    eu2 += trapz_nodes(tail_nodes_, tu2);
    er += trapz_nodes(tail_nodes_, tr);

    double u_here = curve_(x);
    return u_here - law_.mean() * eu + 0.5 * law_.factorial_variance() * eu2 - er;
}

double DeltaReconstruction::at_grid(int i) const {
    if (i < -neg_extent_ || i > n_) {
        throw ValidationError("grid probe outside the cached kernel range");
    }
    int base = 2 * i + 2 * (n_ + neg_extent_);
    auto theta_at = [&](long k) { return theta_lag_[base - k]; };
    return assemble(theta_at, h_ * i);
}

double DeltaReconstruction::at(double x) const {
    double ratio = x / h_;
    int i = static_cast<int>(std::lround(ratio));
    if (std::abs(ratio - i) < 1e-9 && i >= -neg_extent_ && i <= n_) return at_grid(i);
    auto theta_at = [&](long k) { return theta_(x - 0.5 * h_ * k); };
    return assemble(theta_at, x);
}

std::vector<double> DeltaReconstruction::on_grid() const {
    std::vector<double> out(n_ + 1);
    for (int i = 0; i <= n_; ++i) out[i] = at_grid(i);
    return out;
}

ResidualReport critical_renewal_residual(const SurvivalCurve& curve, const LevyModel& model,
                                         const OffspringLaw& law,
                                         const std::vector<double>* fixed_delta) {
    if (law.classify() != Criticality::Critical) {
        throw ValidationError("critical renewal check requires a critical law");
    }
    if (drift_regime(model) == DriftRegime::DriftDown) {
        throw ValidationError("critical renewal check requires psi'(0+) >= 0");
    }

    double h = curve.step();
    int n = static_cast<int>(curve.values().size()) - 1;
    double X = h * n;
    double sigma2 = law.factorial_variance();

    ScaleEvaluator w0(model, 0.0);
    std::vector<double> w0half(2 * n + 1); // W(k h/2)
    for (int k = 0; k <= 2 * n; ++k) w0half[k] = w0.value(0.5 * h * k);

    std::vector<double> dgrid;
    if (fixed_delta) {
        dgrid = *fixed_delta;
        if (static_cast<int>(dgrid.size()) != n + 1) {
            throw ValidationError("fixed delta grid does not match the curve grid");
        }
    } else {
        dgrid = DeltaReconstruction(curve, model, law).on_grid();
    }
    std::vector<double> g(n + 1);
    for (int j = 0; j <= n; ++j) {
        double u = curve.values()[j];
        g[j] = 0.5 * sigma2 * u * u - law.remainder(u) - dgrid[j];
    }

    ResidualReport rep;
    double x_hi = 0.5 * X;
    double stride = std::max(h, std::floor((x_hi - 1.0) / 160.0 / h) * h);
    for (double x = 1.0; x <= x_hi + 1e-9; x += stride) {
        int i = static_cast<int>(std::lround(x / h));
        std::vector<double> shifted(g.begin() + i, g.end());
        double grid_part = cell_simpson(shifted, 0, shifted.size() - 1, h,
                                        [&](long k) { return w0half[k]; });

        auto nodes = log_nodes(std::max(X - x, h), std::max(1e4, 50.0 * X), 200);
        std::vector<double> ty(nodes.size());
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            double u = curve(x + nodes[k]);
            ty[k] = (0.5 * sigma2 * u * u - law.remainder(u)) * w0.value(nodes[k]);
        }
        double tail_part = trapz_nodes(nodes, ty);

        double rhs = grid_part + tail_part;
        double frac = std::abs(tail_part) / std::max(std::abs(rhs), 1e-300);
        rep.max_tail_fraction = std::max(rep.max_tail_fraction, frac);
        if (frac <= 0.10) {
            double lhs = curve.values()[i] - dgrid[i];
            rep.max_residual = std::max(rep.max_residual, std::abs(lhs - rhs));
            rep.reliable_to = x;
            ++rep.points;
        }
    }
    return rep;
}

ResidualReport subcritical_renewal_residual(const SurvivalCurve& curve, const LevyModel& model,
                                            const OffspringLaw& law,
                                            const std::vector<double>* fixed_delta) {
    if (law.classify() != Criticality::Subcritical) {
        throw ValidationError("subcritical renewal check requires mean offspring < 1");
    }
    double m1 = law.mean();
    double sigma2 = law.factorial_variance();
    double h = curve.step();
    int n = static_cast<int>(curve.values().size()) - 1;
    double X = h * n;

    PotentialDensity theta_q(model, 1.0 - m1);
    int kneg = static_cast<int>(std::ceil(30.0 / h));
    DeltaReconstruction delta(curve, model, law, kneg);

    // s(z) = g(z) + E[p] Delta(z) on z in [-Zneg, X]; g vanishes left of 0.
    std::vector<double> s(kneg + n + 1);
    std::vector<double> dgrid(n + 1);
    for (int k = 0; k < kneg; ++k) {
        s[k] = m1 * delta.at_grid(k - kneg);
    }
    for (int j = 0; j <= n; ++j) {
        double u = curve.values()[j];
        dgrid[j] = fixed_delta ? (*fixed_delta)[j] : delta.at_grid(j);
        s[kneg + j] = law.remainder(u) - 0.5 * sigma2 * u * u + m1 * dgrid[j];
    }

    // theta^(q) on the half-lag grid: theta_q(k h/2), k in [-2n, 2(n + kneg)].
    std::vector<double> thq(static_cast<std::size_t>(4 * n + 2 * kneg) + 1);
    for (int k = -2 * n; k <= 2 * (n + kneg); ++k) thq[k + 2 * n] = theta_q(0.5 * h * k);

    ResidualReport rep;
    double x_hi = 0.5 * X;
    double stride = std::max(h, std::floor((x_hi - 1.0) / 160.0 / h) * h);
    for (double x = 1.0; x <= x_hi + 1e-9; x += stride) {
        int i = static_cast<int>(std::lround(x / h));
        // z index j corresponds to z = (j - kneg) h; lag x - z = (i - j + kneg) h
        int base = 2 * (i + kneg) + 2 * n;
        double grid_part =
            cell_simpson(s, 0, s.size() - 1, h, [&](long k) { return thq[base - k]; });

        auto nodes = log_nodes(X, std::max(1e4, 50.0 * X), 200);
        std::vector<double> ty(nodes.size());
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            double u = curve(nodes[k]);
            double gz = law.remainder(u) - 0.5 * sigma2 * u * u;
            ty[k] = gz * theta_q(x - nodes[k]);
        }
        double tail_part = trapz_nodes(nodes, ty);

        double rhs = grid_part + tail_part + dgrid[i];
        double frac = std::abs(tail_part) / std::max(std::abs(rhs), 1e-300);
        rep.max_tail_fraction = std::max(rep.max_tail_fraction, frac);
        if (frac <= 0.10) {
            rep.max_residual = std::max(rep.max_residual, std::abs(curve.values()[i] - rhs));
            rep.reliable_to = x;
            ++rep.points;
        }
    }
    return rep;
}

double limit_family_residual(double alpha, double sigma2, double c_param,
                             const std::vector<double>& x_grid) {
    if (!(alpha > 1.0 && alpha <= 2.0)) throw ValidationError("alpha must lie in (1,2]");
    if (!(sigma2 > 0.0)) throw ValidationError("sigma2 must be > 0");
    if (c_param < 0.0) throw ValidationError("c must be >= 0");

    double B = std::exp(2.0 * std::lgamma(alpha) - std::lgamma(2.0 * alpha));
    double kappa = std::pow(0.5 * sigma2 * B, 1.0 / alpha);
    auto f = [&](double x) {
        if (x <= 0.0) return c_param == 0.0 ? 1.0 / (0.5 * sigma2 * B) : 0.0;
        return std::exp(alpha * (std::log(x) - std::log(c_param + kappa * x)));
    };

    static const GaussLegendre gl(32);
    // Both halves of the kernel integral map to [0,1]:
    //   int_0^inf = int_0^1 ... dz + int_0^1 f(x(1+1/w))^2 w^{alpha-1}(1+w)^{-2 alpha} dw.
    auto kernel = [&](double x) {
        auto seg = [&](auto&& integrand) {
            double acc = 0.0;
            const double cuts[5] = {0.0, 0.1, 0.3, 0.6, 1.0};
            for (int i = 0; i < 4; ++i) acc += gl.integrate(integrand, cuts[i], cuts[i + 1]);
            return acc;
        };
        double i1 = seg([&](double z) {
            double fv = f(x * (1.0 + z));
            return fv * fv * std::pow(z, alpha - 1.0) * std::pow(1.0 + z, -2.0 * alpha);
        });
        double i2 = seg([&](double w) {
            double fv = f(x * (1.0 + 1.0 / w));
            return fv * fv * std::pow(w, alpha - 1.0) * std::pow(1.0 + w, -2.0 * alpha);
        });
        return 0.5 * sigma2 * (i1 + i2);
    };

    double worst = 0.0;
    for (double x : x_grid) {
        double fv = f(x);
        if (fv <= 0.0) continue;
        worst = std::max(worst, std::abs(kernel(x) - fv) / fv);
    }
    return worst;
}

} // namespace branchmax
