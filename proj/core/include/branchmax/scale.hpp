#ifndef BRANCHMAX_SCALE_HPP
#define BRANCHMAX_SCALE_HPP

#include <utility>
#include <vector>

#include "branchmax/levy_model.hpp"

namespace branchmax {

enum class ScaleBackend { ClosedForm, ContourInversion };

// Evaluator for the q-scale function W^(q), defined through its Laplace
// transform 1/(psi(beta) - q) on Re(beta) > Phi(q), with W^(q)(x) = 0 for
// x < 0.
//
// The closed-form backend uses, per variant:
//   - exponential sums from partial fractions (Brownian, exponential jumps),
//   - the Mittag-Leffler series x^{a-1} E_{a,a}((q/c) x^a) for the stable case,
//   - a convergent double series for stable-plus-drift.
// Far past the dominant growth e^{Phi x}/psi'(Phi) those series cancel badly,
// so the evaluator switches to an asymptotic expansion of the residual
//
//   Wres(x) = e^{Phi(q) x}/psi'(Phi(q)) - W^(q)(x),
//
// which is also exposed directly: the potential density and the window law
// need Wres, not W, in every place where the exponential part cancels.
class ScaleEvaluator {
public:
    ScaleEvaluator(const LevyModel& model, double q,
                   ScaleBackend backend = ScaleBackend::ClosedForm, int inversion_nodes = 32);

    // W^(q)(x); 0 for x < 0.
    double value(double x) const;

    // W^(q)'(x) for x > 0.
    double derivative(double x) const;

    // Wres(x) = e^{Phi x}/psi'(Phi) - W(x). Requires q > 0, or q = 0 with
    // psi'(0+) != 0.
    double residual(double x) const;
    double residual_derivative(double x) const;

    // max over x in [10,40] of |W(x) psi'(Phi) e^{-Phi x} - 1|.
    double asymptote_deviation() const;

    const PhiSolution& phi_solution() const { return phi_; }
    const LevyModel& model() const { return model_; }
    double q() const { return q_; }
    ScaleBackend backend() const { return backend_; }

private:
    enum class Form { ExpSum, StableSeries, StableDriftSeries };

    LevyModel model_;  // as given
    LevyModel norm_;   // structural normal form (alpha = 2 mapped to Brownian)
    double q_ = 0.0;
    ScaleBackend backend_ = ScaleBackend::ClosedForm;
    int nodes_ = 32;
    PhiSolution phi_;
    Form form_ = Form::ExpSum;

    // ExpSum data: W(x) = sum_i coef_i e^{rate_i x} + lin0 + lin1 x
    std::vector<double> rates_, coefs_;
    double lin0_ = 0.0, lin1_ = 0.0;
    int phi_term_ = -1;

    // Asymptotic tail of W at +infinity, from the expansion of 1/(psi - q)
    // at beta = 0: pairs (s, C) with W(x) ~ exp part + sum C x^{-s-1}/Gamma(-s).
    std::vector<std::pair<double, double>> tail_terms_;

    void setup_expsum();
    void setup_stable_tail();

    double closed_value(double x) const;
    double closed_derivative(double x) const;
    double closed_residual(double x, bool derivative) const;
    double series_value(double x, bool derivative) const;
    long double series_sum(double x, bool derivative) const;
    double tail_sum(double x, bool derivative) const;
    double residual_switch() const;

    double inversion_value(double x) const;
    double inversion_derivative(double x) const;
};

// The q-potential density theta^(q)(z) = Phi'(q) e^{-Phi(q) z} - W^(q)(-z),
// with Phi'(q) = 1/psi'(Phi(q)). Defined for q > 0; q = 0 is allowed when
// psi'(0+) < 0 (the only place the artifact needs the 0-potential).
class PotentialDensity {
public:
    PotentialDensity(const LevyModel& model, double q);

    double operator()(double z) const;

    double phi_prime() const { return phi_prime_; }
    const PhiSolution& phi_solution() const { return scale_.phi_solution(); }
    const ScaleEvaluator& scale() const { return scale_; }
    const LevyModel& model() const { return scale_.model(); }
    double q() const { return scale_.q(); }

private:
    ScaleEvaluator scale_;
    double phi_prime_ = 0.0;
};

} // namespace branchmax

#endif
