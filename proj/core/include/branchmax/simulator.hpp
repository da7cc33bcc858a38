#ifndef BRANCHMAX_SIMULATOR_HPP
#define BRANCHMAX_SIMULATOR_HPP

#include <cstdint>
#include <vector>

#include "branchmax/levy_model.hpp"
#include "branchmax/offspring.hpp"
#include "branchmax/window_law.hpp"

namespace branchmax {

enum class SimBackend { WindowExact, EulerGrid };

struct SimConfig {
    LevyModel model;
    OffspringLaw law;
    std::vector<double> levels; // ascending x >= 0
    long n_reps = 100000;
    std::uint64_t seed = 1;
    // Particles whose branch value drops below x - kill_barrier are dropped.
    // <= 0 selects the default 15/Phi(1); +infinity disables killing.
    double kill_barrier = 0.0;
    long max_particles = 10000000;
    SimBackend backend = SimBackend::WindowExact;
    double dt = 1e-3; // EulerGrid only
    int threads = 1;

    SimConfig(LevyModel m, OffspringLaw l) : model(std::move(m)), law(std::move(l)) {}
};

enum class ReplicateOutcome { Hit, Died, Truncated };

struct ReplicateStats {
    ReplicateOutcome outcome = ReplicateOutcome::Died;
    long killed = 0;    // children dropped at the barrier
    long processed = 0; // particles taken off the queue
};

// One replicate of the branching particle system against level x, using the
// exact exponential-window law. Particle streams are keyed by the genealogy
// node id, so different levels see the same underlying random tree and the
// hit events are monotone in x by construction.
ReplicateStats run_replicate(const WindowLaw& wl, const OffspringLaw& law, double x,
                             double barrier_pos, long max_particles, std::uint64_t seed,
                             std::uint64_t replicate);

// Grid-path fallback: exact increments of step dt, lifetime Exp(1), supremum
// read off the visited points. The grid maximum underestimates the true
// supremum, so u_hat carries a documented negative bias that shrinks with dt.
ReplicateStats euler_replicate(const LevyModel& model, const OffspringLaw& law, double x,
                               double barrier_pos, long max_particles, double dt,
                               std::uint64_t seed, std::uint64_t replicate);

struct LevelEstimate {
    double x = 0.0;
    long n_reps = 0;
    long hits = 0;
    long truncated = 0;
    long killed_particles = 0;
    double u_hat = 0.0;
    double ci_low = 0.0, ci_high = 0.0; // 95% normal approximation
    double killed_frac = 0.0;
    double truncated_frac = 0.0;
    bool aborted = false; // truncation rate above 1%: data flagged partial
};

struct TailEstimate {
    std::vector<LevelEstimate> levels;
    std::uint64_t seed = 0;
    double barrier = 0.0;
};

// Runs n_reps independent replicates per level. Replicates are distributed
// over threads in fixed index blocks and reduced with integer counts, so the
// result is byte-identical for any thread count.
TailEstimate estimate_survival(const SimConfig& cfg);

// Exact one-step increment of L over dt, used by the grid backend and the
// positivity cross-check.
double sample_increment(const LevyModel& model, double dt, CounterRng& rng);

} // namespace branchmax

#endif
