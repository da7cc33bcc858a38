#include "branchmax/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "branchmax/errors.hpp"

namespace branchmax {

double TailModel::eval(double x) const {
    if (x <= x0) return u0;
    switch (form) {
        case Form::Zero:
            return 0.0;
        case Form::Exponential:
            return u0 * std::exp(-rate * (x - x0));
        case Form::InverseX:
            return u0 * x0 / x;
        case Form::InverseXW: {
            double d0 = x0 * w0->value(x0);
            double d1 = x * w0->value(x);
            return d1 > 0.0 ? u0 * d0 / d1 : 0.0;
        }
    }
    return 0.0;
}

SurvivalCurve::SurvivalCurve(double h, std::vector<double> values, TailModel tail)
    : h_(h), values_(std::move(values)), tail_(std::move(tail)) {}

double SurvivalCurve::operator()(double x) const {
    if (x < 0.0) return 0.0;
    double xm = x_max();
    if (x >= xm) return tail_.eval(x);
    double t = x / h_;
    auto i = static_cast<std::size_t>(t);
    if (i + 1 >= values_.size()) return values_.back();
    double frac = t - static_cast<double>(i);
    return values_[i] * (1.0 - frac) + values_[i + 1] * frac;
}

SurvivalCurve SurvivalCurve::scaled(double factor) const {
    std::vector<double> v = values_;
    for (double& x : v) x = std::min(1.0, x * factor);
    TailModel t = tail_;
    t.u0 = std::min(1.0, t.u0 * factor);
    return SurvivalCurve(h_, std::move(v), std::move(t));
}

namespace {

enum class SolveRegime { Subcritical, CritUp, CritOsc, CritDown };

SolveRegime solve_regime(const LevyModel& model, const OffspringLaw& law) {
    if (law.classify() == Criticality::Subcritical) return SolveRegime::Subcritical;
    switch (drift_regime(model)) {
        case DriftRegime::DriftUp: return SolveRegime::CritUp;
        case DriftRegime::Oscillating: return SolveRegime::CritOsc;
        case DriftRegime::DriftDown: return SolveRegime::CritDown;
    }
    return SolveRegime::Subcritical;
}

TailModel make_extension(SolveRegime regime, const LevyModel& model, const OffspringLaw& law,
                         std::shared_ptr<const ScaleEvaluator> w0) {
    TailModel t;
    switch (regime) {
        case SolveRegime::Subcritical:
            t.form = TailModel::Form::Exponential;
            t.rate = phi(model, 1.0 - law.mean()).phi;
            break;
        case SolveRegime::CritDown:
            t.form = TailModel::Form::Exponential;
            t.rate = phi(model, 0.0).phi;
            break;
        case SolveRegime::CritUp:
            t.form = TailModel::Form::InverseX;
            break;
        case SolveRegime::CritOsc:
            t.form = TailModel::Form::InverseXW;
            t.w0 = std::move(w0);
            break;
    }
    return t;
}

// Small dense least-squares mixer (Anderson acceleration, type I form of
// Walker & Ni). Works on the output of the damped sweep; the solve loop
// resets it whenever the residual stops improving.
class AndersonMixer {
public:
    AndersonMixer(int depth, std::size_t n) : depth_(depth), n_(n) {}

    void reset() {
        dx_.clear();
        df_.clear();
        have_prev_ = false;
    }

    std::vector<double> step(const std::vector<double>& x, const std::vector<double>& gx) {
        std::vector<double> f(n_);
        for (std::size_t i = 0; i < n_; ++i) f[i] = gx[i] - x[i];
        if (have_prev_) {
            std::vector<double> dxk(n_), dfk(n_);
            for (std::size_t i = 0; i < n_; ++i) {
                dxk[i] = x[i] - prev_x_[i];
                dfk[i] = f[i] - prev_f_[i];
            }
            dx_.push_back(std::move(dxk));
            df_.push_back(std::move(dfk));
            if (static_cast<int>(dx_.size()) > depth_) {
                dx_.erase(dx_.begin());
                df_.erase(df_.begin());
            }
        }
        prev_x_ = x;
        prev_f_ = f;
        have_prev_ = true;

        std::size_t m = dx_.size();
        if (m == 0) return gx;

        // Solve min over gamma of |f - dF gamma| by ridge-regularized normal
        // equations; m stays tiny.
        std::vector<double> A(m * m, 0.0), b(m, 0.0);
        for (std::size_t r = 0; r < m; ++r) {
            for (std::size_t c = r; c < m; ++c) {
                double s = 0.0;
                for (std::size_t i = 0; i < n_; ++i) s += df_[r][i] * df_[c][i];
                A[r * m + c] = A[c * m + r] = s;
            }
            double s = 0.0;
            for (std::size_t i = 0; i < n_; ++i) s += df_[r][i] * f[i];
            b[r] = s;
        }
        double ridge = 0.0;
        for (std::size_t r = 0; r < m; ++r) ridge = std::max(ridge, A[r * m + r]);
        ridge = ridge * 1e-12 + 1e-300;
        for (std::size_t r = 0; r < m; ++r) A[r * m + r] += ridge;
        // Gaussian elimination with partial pivoting.
        std::vector<std::size_t> piv(m);
        for (std::size_t r = 0; r < m; ++r) piv[r] = r;
        for (std::size_t col = 0; col < m; ++col) {
            std::size_t best = col;
            for (std::size_t r = col + 1; r < m; ++r) {
                if (std::abs(A[r * m + col]) > std::abs(A[best * m + col])) best = r;
            }
            if (best != col) {
                for (std::size_t c = 0; c < m; ++c) std::swap(A[col * m + c], A[best * m + c]);
                std::swap(b[col], b[best]);
            }
            double d = A[col * m + col];
            if (std::abs(d) < 1e-300) continue;
            for (std::size_t r = col + 1; r < m; ++r) {
                double factor = A[r * m + col] / d;
                if (factor == 0.0) continue;
                for (std::size_t c = col; c < m; ++c) A[r * m + c] -= factor * A[col * m + c];
                b[r] -= factor * b[col];
            }
        }
        std::vector<double> gamma(m, 0.0);
        for (std::size_t r = m; r-- > 0;) {
            double s = b[r];
            for (std::size_t c = r + 1; c < m; ++c) s -= A[r * m + c] * gamma[c];
            double d = A[r * m + r];
            gamma[r] = std::abs(d) < 1e-300 ? 0.0 : s / d;
        }

        std::vector<double> out = gx;
        for (std::size_t j = 0; j < m; ++j) {
            if (gamma[j] == 0.0) continue;
            for (std::size_t i = 0; i < n_; ++i) {
                out[i] -= gamma[j] * (dx_[j][i] + df_[j][i]);
            }
        }
        return out;
    }

private:
    int depth_;
    std::size_t n_;
    std::vector<std::vector<double>> dx_, df_;
    std::vector<double> prev_x_, prev_f_;
    bool have_prev_ = false;
};

struct SweepContext {
    double h = 0.0;
    double phi1 = 0.0;
    int n = 0;                    // nodes 0..n at x = i h
    const OffspringLaw* law = nullptr;
    std::vector<double> base;     // exp(-phi1 x_i)
    std::vector<double> kernel;   // near-lag D masses, lags 0..J
    struct FarCell {
        double mass;
        double zeta;
    };
    std::vector<FarCell> far;
    double conv_a = 0.0, conv_b = 0.0, conv_e = 0.0; // s-convolution weights
    TailModel ext;                // refreshed each sweep from the boundary value

    double w_of_u(double u) const { return 1.0 - law->pgf(1.0 - u); }

    double u_at(const std::vector<double>& u, double x) const {
        double xm = h * n;
        if (x >= xm) return ext.eval(x);
        double t = x / h;
        int i = static_cast<int>(t);
        double frac = t - i;
        return u[i] * (1.0 - frac) + u[static_cast<std::size_t>(i) + 1] * frac;
    }

    // One application of the damped operator: w = 1 - F(1-u); the D-kernel
    // correlation; then the exponential S-convolution.
    void apply(const std::vector<double>& u, double omega, std::vector<double>& out) const {
        int J = static_cast<int>(kernel.size()) - 1;
        std::vector<double> w(static_cast<std::size_t>(n) + J + 1);
        for (int i = 0; i <= n; ++i) w[i] = w_of_u(u[i]);
        for (int i = n + 1; i <= n + J; ++i) w[i] = w_of_u(ext.eval(h * i));

        std::vector<double> gt(static_cast<std::size_t>(n) + 1, 0.0);
        for (int i = 0; i <= n; ++i) {
            double s = 0.0;
            const double* wp = w.data() + i;
            for (int j = 0; j <= J; ++j) s += kernel[j] * wp[j];
            gt[i] = s;
        }
        for (const auto& fc : far) {
            for (int i = 0; i <= n; ++i) {
                gt[i] += fc.mass * w_of_u(u_at(u, h * i + fc.zeta));
            }
        }

        out.assign(static_cast<std::size_t>(n) + 1, 0.0);
        double conv = 0.0;
        out[0] = 1.0;
        for (int i = 1; i <= n; ++i) {
            conv = conv_e * conv + conv_a * gt[i] + conv_b * gt[i - 1];
            double t = base[i] + conv;
            double v = (1.0 - omega) * u[i] + omega * t;
            out[i] = std::min(1.0, std::max(0.0, v));
        }
        for (int i = n - 1; i >= 1; --i) {
            if (out[i] < out[i + 1]) out[i] = out[i + 1];
        }
    }
};

SweepContext make_context(const WindowLaw& wl, const OffspringLaw& law, double h, int n,
                          const TailModel& ext) {
    SweepContext ctx;
    ctx.h = h;
    ctx.phi1 = wl.phi1();
    ctx.n = n;
    ctx.law = &law;
    ctx.ext = ext;

    ctx.base.resize(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) ctx.base[i] = std::exp(-ctx.phi1 * h * i);

    double d_near = 30.0;
    int J = static_cast<int>(std::ceil(d_near / h));
    ctx.kernel.assign(static_cast<std::size_t>(J) + 2, 0.0);
    double pending_mass = 0.0, pending_moment = 0.0, pending_start = 0.0;
    auto flush_far = [&]() {
        if (pending_mass > 0.0) {
            ctx.far.push_back({pending_mass, pending_moment / pending_mass});
            pending_mass = pending_moment = pending_start = 0.0;
        }
    };
    for (const auto& cell : wl.cells()) {
        if (cell.center <= J * h) {
            double t = cell.center / h;
            int j = static_cast<int>(t);
            double frac = t - j;
            ctx.kernel[j] += cell.mass * (1.0 - frac);
            ctx.kernel[static_cast<std::size_t>(j) + 1] += cell.mass * frac;
        } else {
            // merge log-adjacent far cells into ~8% wide buckets
            if (pending_mass > 0.0 && cell.center > pending_start * 1.08) flush_far();
            if (pending_mass == 0.0) pending_start = cell.center;
            pending_mass += cell.mass;
            pending_moment += cell.mass * cell.center;
        }
    }
    flush_far();

    double ph = ctx.phi1 * h;
    double e = std::exp(-ph);
    double c = (1.0 - (1.0 + ph) * e) / ph;
    ctx.conv_e = e;
    ctx.conv_a = (1.0 - e) - c;
    ctx.conv_b = c;
    return ctx;
}

} // namespace

SurvivalCurve solve_u(const LevyModel& model, const OffspringLaw& law,
                      const SolverOptions& opts, SolverReport* report) {
    if (opts.h > 0.05 || opts.h <= 0.0) {
        throw ValidationError("solver grid step must lie in (0, 0.05]");
    }
    if (opts.omega <= 0.0 || opts.omega > 1.0) {
        throw ValidationError("solver damping must lie in (0, 1]");
    }
    law.classify(); // rejects supercritical input

    WindowLaw wl(model);
    double phi1 = wl.phi1();
    SolveRegime regime = solve_regime(model, law);

    std::shared_ptr<const ScaleEvaluator> w0;
    if (regime == SolveRegime::CritOsc) {
        w0 = std::make_shared<ScaleEvaluator>(model, 0.0);
    }

    // Continuation ladder: critical polynomial regimes build the far field
    // level by level; exponential regimes converge in one pass.
    std::vector<double> ladder;
    if (regime == SolveRegime::CritUp || regime == SolveRegime::CritOsc) {
        double X = std::min(50.0, opts.x_max);
        ladder.push_back(X);
        while (X < opts.x_max) {
            X = std::min(2.0 * X, opts.x_max);
            ladder.push_back(X);
        }
    } else {
        ladder.push_back(opts.x_max);
    }

    SolverReport local;
    SolverReport& rep = report ? *report : local;
    rep = SolverReport{};
    rep.omega = opts.omega;
    rep.d_truncation_mass = wl.d_tail_mass_beyond_cap();

    std::vector<double> u;
    int total_iters = 0;
    bool converged = false;

    for (std::size_t lvl = 0; lvl < ladder.size(); ++lvl) {
        double X = ladder[lvl];
        int n = static_cast<int>(std::lround(X / opts.h));
        TailModel ext = make_extension(regime, model, law, w0);
        ext.x0 = X;
        ext.u0 = 0.0;

        std::vector<double> u_new(static_cast<std::size_t>(n) + 1);
        if (lvl == 0) {
            for (int i = 0; i <= n; ++i) u_new[i] = std::exp(-phi1 * opts.h * i);
        } else {
            TailModel prev_ext = make_extension(regime, model, law, w0);
            prev_ext.x0 = ladder[lvl - 1];
            prev_ext.u0 = u.back();
            for (int i = 0; i <= n; ++i) {
                u_new[i] = i < static_cast<int>(u.size())
                               ? u[i]
                               : prev_ext.eval(opts.h * i);
            }
        }
        u = std::move(u_new);

        SweepContext ctx = make_context(wl, law, opts.h, n, ext);
        AndersonMixer mixer(opts.anderson_depth, u.size());
        double level_tol = (lvl + 1 == ladder.size()) ? opts.tol : std::max(opts.tol, 1e-8);

        std::vector<double> gu(u.size());
        double prev_update = std::numeric_limits<double>::infinity();
        int worse_count = 0;
        converged = false;
        while (total_iters < opts.max_iterations) {
            ++total_iters;
            ctx.ext.u0 = u.back();
            ctx.apply(u, opts.omega, gu);

            double update = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) {
                update = std::max(update, std::abs(gu[i] - u[i]));
            }
            rep.update_history.push_back(update);

            if (update <= level_tol) {
                u = gu;
                converged = true;
                break;
            }

            if (opts.accelerate) {
                if (update > prev_update) {
                    if (++worse_count >= 3) {
                        mixer.reset();
                        worse_count = 0;
                    }
                } else {
                    worse_count = 0;
                }
                std::vector<double> mixed = mixer.step(u, gu);
                for (std::size_t i = 0; i < mixed.size(); ++i) {
                    mixed[i] = std::min(1.0, std::max(0.0, mixed[i]));
                }
                for (std::size_t i = mixed.size() - 1; i-- > 1;) {
                    if (mixed[i] < mixed[i + 1]) mixed[i] = mixed[i + 1];
                }
                mixed[0] = 1.0;
                u = std::move(mixed);
            } else {
                u = gu;
            }
            prev_update = update;
        }
        if (!converged) break;
    }

    rep.iterations = total_iters;
    rep.final_update = rep.update_history.empty() ? 0.0 : rep.update_history.back();
    rep.converged = converged;
    if (!converged) {
        throw ConvergenceFailure("fixed-point solve did not reach tolerance " +
                                     std::to_string(opts.tol) + " within " +
                                     std::to_string(opts.max_iterations) + " iterations",
                                 rep.update_history);
    }

    // Fit the reporting tail on the last stretch of reliable values.
    TailModel tail = make_extension(regime, model, law, w0);
    int n = static_cast<int>(u.size()) - 1;
    tail.x0 = opts.h * n;
    tail.u0 = u.back();
    if (tail.form == TailModel::Form::Exponential) {
        double lo = 0.5 * opts.x_max, floor = std::max(100.0 * opts.tol, 1e-250);
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int cnt = 0;
        for (int i = 0; i <= n; ++i) {
            double x = opts.h * i;
            if (x < lo || u[i] <= floor) continue;
            double y = std::log(u[i]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++cnt;
        }
        if (cnt >= 8) {
            double denom = cnt * sxx - sx * sx;
            if (denom > 0.0) tail.rate = -(cnt * sxy - sx * sy) / denom;
        }
    }
    return SurvivalCurve(opts.h, std::move(u), std::move(tail));
}

} // namespace branchmax
