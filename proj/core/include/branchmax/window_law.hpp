#ifndef BRANCHMAX_WINDOW_LAW_HPP
#define BRANCHMAX_WINDOW_LAW_HPP

#include <utility>
#include <vector>

#include "branchmax/levy_model.hpp"
#include "branchmax/rng.hpp"
#include "branchmax/scale.hpp"

namespace branchmax {

// Law of the exponential-window triple (S_e, L_e, D = S_e - L_e), e ~ Exp(1):
//   S_e ~ Exp(Phi(1)),
//   D >= 0 independent of S_e (Wiener-Hopf factorization), with density
//     f_D(z) = W^(1)'(z)/Phi(1) - W^(1)(z)  on z > 0
//   and an atom at 0 of mass W^(1)(0)/Phi(1) (nonzero only for the
//   bounded-variation catalog member).
//
// The independence import is falsifiable in-process: convolving Exp(Phi(1))
// with the reflected D-law must reproduce the 1-potential density, which the
// test suite checks numerically.
//
// Sampling uses a tabulated inverse CDF on a log grid covering all but 1e-9
// of the mass; the remainder is drawn from an exponential tail with rate
// Phi(1). Exactly one uniform is consumed per draw of S and one per draw of
// D, so counter-keyed streams stay aligned across uses.
class WindowLaw {
public:
    explicit WindowLaw(const LevyModel& model);

    double phi1() const { return phi1_; }

    // P(S_e >= x) = exp(-Phi(1) x).
    double sup_tail(double x) const;

    double atom0() const { return atom0_; }
    double d_density(double z) const;

    double sample_d(CounterRng& rng) const;

    // Draws (s, l) with s = S_e, l = L_e = s - D.
    std::pair<double, double> sample(CounterRng& rng) const;

    // |atom + integral of f_D - 1|, from the table build.
    double d_mass_defect() const { return mass_defect_; }

    // Table coverage: quantile cap and the estimated mass beyond it.
    double d_quantile_cap() const { return z_.back(); }
    double d_tail_mass_beyond_cap() const { return tail_mass_; }

    // Flagged for the bounded-variation member pending its convolution check.
    bool reduced_confidence() const { return reduced_confidence_; }

    // Discretized D-law for quadratures: point masses at representative
    // in-cell locations (the atom is the cell at 0). Masses sum to ~1.
    struct Cell {
        double mass;
        double center;
    };
    const std::vector<Cell>& cells() const { return cells_; }

    const LevyModel& model() const { return model_; }
    const ScaleEvaluator& scale1() const { return w1_; }

private:
    LevyModel model_;
    ScaleEvaluator w1_;
    double phi1_ = 0.0;
    double atom0_ = 0.0;
    std::vector<double> z_;   // grid, z_[0] = 0
    std::vector<double> cdf_; // cdf_[i] = atom + mass of (0, z_i]
    std::vector<Cell> cells_;
    double total_mass_ = 0.0;
    double tail_mass_ = 0.0;
    double mass_defect_ = 0.0;
    bool reduced_confidence_ = false;

    void build_table();
};

} // namespace branchmax

#endif
