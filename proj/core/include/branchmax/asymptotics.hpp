#ifndef BRANCHMAX_ASYMPTOTICS_HPP
#define BRANCHMAX_ASYMPTOTICS_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "branchmax/levy_model.hpp"
#include "branchmax/offspring.hpp"

namespace branchmax {

enum class Regime { Subcritical, CritDriftUp, CritOscillating, CritDriftDown };

std::string regime_name(Regime r);

// Regular-variation data of psi at 0: psi(l) ~ l^alpha * ell(1/l) with ell
// constant across the catalog.
struct RegularVariation {
    double alpha;
    double ell;
};
std::optional<RegularVariation> regular_variation(const LevyModel& m);

// The predicted tail law for a (model, offspring) pair:
//   subcritical           u(x) ~ kappa exp(-rate x),  rate = Phi(1 - E[p])
//   critical, drift up    x u(x) -> 2 psi'(0+)/sigma^2
//   critical, oscillating gamma(x) = x W(x) u(x) stays in a band around
//                         2/(sigma^2 B(alpha,alpha)) (subsequential limit)
//   critical, drift down  u(x) ~ kappa exp(-rate x),  rate = Phi(0)
struct RegimePrediction {
    Regime regime;
    enum class Kind { ExpRate, XuLimit, GammaBand } kind;
    double value = 0.0;       // rate, limit, or band constant
    bool regularly_varying = false;
    double alpha = 0.0;
    double ell = 0.0;
    std::string formula;
};

RegimePrediction predict(const LevyModel& model, const OffspringLaw& law);

struct RateFit {
    double rate = 0.0;
    double std_err = 0.0;
    int points = 0;
};

// Least-squares slope of log u against x over [window_lo, window_hi].
RateFit fit_exp_rate(const std::vector<std::pair<double, double>>& points, double window_lo,
                     double window_hi);

struct PlateauFit {
    double median = 0.0;
    double band_ratio = 0.0; // max/min of gamma over the window
    double min_value = 0.0, max_value = 0.0;
    int points = 0;
};

// gamma_i = x_i * W(x_i) * u_i over the window; median and band spread.
PlateauFit fit_power_product(const std::vector<std::pair<double, double>>& points,
                             const std::function<double(double)>& weight, double window_lo,
                             double window_hi);

// Monte Carlo time-average of P(L_s >= 0) over [0, t]; equals 1/alpha for the
// spectrally negative stable catalog members. Validates the skew orientation
// of the stable sampler.
double spitzer_positivity(const LevyModel& model, double t, long n_paths, double dt,
                          std::uint64_t seed);

} // namespace branchmax

#endif
