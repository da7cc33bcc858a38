#include "branchmax/simulator.hpp"

#include <atomic>
#include <cmath>
#include <deque>
#include <limits>
#include <thread>

#include "branchmax/errors.hpp"

namespace branchmax {

namespace {

struct Particle {
    double pos;
    std::uint64_t id;
};

std::uint64_t child_id(std::uint64_t parent, int k) {
    return hash_combine(parent, static_cast<std::uint64_t>(k) + 1);
}

void validate(const SimConfig& cfg) {
    if (cfg.levels.empty()) throw ValidationError("simulation needs at least one level");
    for (std::size_t i = 0; i < cfg.levels.size(); ++i) {
        if (cfg.levels[i] < 0.0) throw ValidationError("levels must be >= 0");
        if (i > 0 && cfg.levels[i] <= cfg.levels[i - 1]) {
            throw ValidationError("levels must be strictly ascending");
        }
    }
    if (cfg.n_reps < 1) throw ValidationError("n_reps must be >= 1");
    if (cfg.backend == SimBackend::EulerGrid && !(cfg.dt > 0.0)) {
        throw ValidationError("grid backend requires dt > 0");
    }
    if (cfg.max_particles < 1) throw ValidationError("max_particles must be >= 1");
}

} // namespace

ReplicateStats run_replicate(const WindowLaw& wl, const OffspringLaw& law, double x,
                             double barrier_pos, long max_particles, std::uint64_t seed,
                             std::uint64_t replicate) {
    ReplicateStats st;
    std::deque<Particle> queue;
    queue.push_back({0.0, 1});
    while (!queue.empty()) {
        if (++st.processed > max_particles) {
            st.outcome = ReplicateOutcome::Truncated;
            return st;
        }
        Particle p = queue.front();
        queue.pop_front();
        CounterRng rng = CounterRng::keyed(seed, replicate, p.id);
        auto [s, l] = wl.sample(rng);
        if (p.pos + s >= x) {
            st.outcome = ReplicateOutcome::Hit;
            return st;
        }
        int n = law.sample(rng);
        if (n == 0) continue;
        double child_pos = p.pos + l;
        if (child_pos < barrier_pos) {
            st.killed += n;
            continue;
        }
        for (int k = 0; k < n; ++k) {
            queue.push_back({child_pos, child_id(p.id, k)});
        }
    }
    st.outcome = ReplicateOutcome::Died;
    return st;
}

double sample_increment(const LevyModel& model, double dt, CounterRng& rng) {
    const double pi = 3.14159265358979323846;
    switch (model.variant) {
        case LevyVariant::BrownianDrift:
            return model.a * dt + model.eta * std::sqrt(dt) * rng.normal();
        case LevyVariant::SNStable: {
            double scale =
                std::pow(model.c * dt * std::abs(std::cos(pi * model.alpha / 2.0)),
                         1.0 / model.alpha);
            if (model.alpha == 2.0) scale = std::sqrt(model.c * dt);
            return scale * stable_standard(model.alpha, -1.0, rng);
        }
        case LevyVariant::BrownianExpJumps: {
            double inc = model.a * dt;
            if (model.eta > 0.0) inc += model.eta * std::sqrt(dt) * rng.normal();
            int jumps = rng.poisson(model.rho * dt);
            for (int j = 0; j < jumps; ++j) inc -= rng.exponential(model.mu);
            return inc;
        }
        case LevyVariant::StableWithDrift: {
            double scale =
                std::pow(model.c * dt * std::abs(std::cos(pi * model.alpha / 2.0)),
                         1.0 / model.alpha);
            if (model.alpha == 2.0) scale = std::sqrt(model.c * dt);
            return model.a * dt + scale * stable_standard(model.alpha, -1.0, rng);
        }
    }
    return 0.0;
}

ReplicateStats euler_replicate(const LevyModel& model, const OffspringLaw& law, double x,
                               double barrier_pos, long max_particles, double dt,
                               std::uint64_t seed, std::uint64_t replicate) {
    ReplicateStats st;
    std::deque<Particle> queue;
    queue.push_back({0.0, 1});
    while (!queue.empty()) {
        if (++st.processed > max_particles) {
            st.outcome = ReplicateOutcome::Truncated;
            return st;
        }
        Particle p = queue.front();
        queue.pop_front();
        CounterRng rng = CounterRng::keyed(seed, replicate, p.id);
        double lifetime = rng.exponential(1.0);
        double pos = p.pos;
        double t = 0.0;
        bool hit = false;
        while (t < lifetime) {
            double step = std::min(dt, lifetime - t);
            pos += sample_increment(model, step, rng);
            t += step;
            if (pos >= x) {
                hit = true;
                break;
            }
        }
        if (hit) {
            st.outcome = ReplicateOutcome::Hit;
            return st;
        }
        int n = law.sample(rng);
        if (n == 0) continue;
        if (pos < barrier_pos) {
            st.killed += n;
            continue;
        }
        for (int k = 0; k < n; ++k) {
            queue.push_back({pos, child_id(p.id, k)});
        }
    }
    st.outcome = ReplicateOutcome::Died;
    return st;
}

TailEstimate estimate_survival(const SimConfig& cfg) {
    validate(cfg);

    WindowLaw wl(cfg.model);
    double barrier = cfg.kill_barrier > 0.0 ? cfg.kill_barrier : 15.0 / wl.phi1();

    TailEstimate result;
    result.seed = cfg.seed;
    result.barrier = barrier;

    int threads = std::max(1, cfg.threads);
    const long block = 4096;
    long n_blocks = (cfg.n_reps + block - 1) / block;

    for (double x : cfg.levels) {
        double barrier_pos = std::isinf(barrier) ? -std::numeric_limits<double>::infinity()
                                                 : x - barrier;
        struct Counts {
            long hits = 0, truncated = 0, killed = 0;
        };
        std::vector<Counts> per_block(n_blocks);
        std::atomic<long> next_block{0};

        auto worker = [&]() {
            for (;;) {
                long b = next_block.fetch_add(1);
                if (b >= n_blocks) break;
                Counts c;
                long lo = b * block, hi = std::min<long>(cfg.n_reps, lo + block);
                for (long rep = lo; rep < hi; ++rep) {
                    ReplicateStats st;
                    if (cfg.backend == SimBackend::WindowExact) {
                        st = run_replicate(wl, cfg.law, x, barrier_pos, cfg.max_particles,
                                           cfg.seed, static_cast<std::uint64_t>(rep));
                    } else {
                        st = euler_replicate(cfg.model, cfg.law, x, barrier_pos,
                                             cfg.max_particles, cfg.dt, cfg.seed,
                                             static_cast<std::uint64_t>(rep));
                    }
                    if (st.outcome == ReplicateOutcome::Hit) ++c.hits;
                    if (st.outcome == ReplicateOutcome::Truncated) ++c.truncated;
                    c.killed += st.killed;
                }
                per_block[b] = c;
            }
        };
        if (threads == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            pool.reserve(threads);
            for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        }

        LevelEstimate lv;
        lv.x = x;
        lv.n_reps = cfg.n_reps;
        for (const auto& c : per_block) {
            lv.hits += c.hits;
            lv.truncated += c.truncated;
            lv.killed_particles += c.killed;
        }
        long effective = cfg.n_reps - lv.truncated;
        if (effective < 1) effective = 1;
        lv.u_hat = static_cast<double>(lv.hits) / static_cast<double>(effective);
        double half = 1.96 * std::sqrt(lv.u_hat * (1.0 - lv.u_hat) /
                                       static_cast<double>(effective));
        lv.ci_low = std::max(0.0, lv.u_hat - half);
        lv.ci_high = std::min(1.0, lv.u_hat + half);
        lv.killed_frac = static_cast<double>(lv.killed_particles) /
                         static_cast<double>(cfg.n_reps);
        lv.truncated_frac = static_cast<double>(lv.truncated) /
                            static_cast<double>(cfg.n_reps);
        lv.aborted = lv.truncated_frac > 0.01;
        result.levels.push_back(lv);
    }
    return result;
}

} // namespace branchmax
