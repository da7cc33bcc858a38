#include "branchmax/experiment.hpp"

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "branchmax/asymptotics.hpp"
#include "branchmax/errors.hpp"
#include "branchmax/scale.hpp"
#include "branchmax/simulator.hpp"
#include "branchmax/solver.hpp"
#include "branchmax/version.hpp"
#include "branchmax/window_law.hpp"

namespace branchmax {

using nlohmann::json;

namespace {

void require_keys(const json& j, const std::string& where,
                  const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ValidationError(where + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw ValidationError("unknown key '" + it.key() + "' in " + where);
        }
    }
}

double get_num(const json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw ValidationError("'" + key + "' must be a number");
    return j.at(key).get<double>();
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::string& header) : out_(path) {
        if (!out_) throw NumericError("cannot open output file " + path);
        out_ << header << "\n";
    }
    void row(const std::vector<double>& vals) {
        for (std::size_t i = 0; i < vals.size(); ++i) {
            if (i) out_ << ",";
            out_ << fmt(vals[i]);
        }
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw NumericError("cannot open output file " + path);
    out << j.dump(2) << "\n";
}

struct PipelineOutput {
    std::vector<std::string> artifacts;
    json summary;
};

SimBackend backend_from_string(const std::string& s) {
    if (s == "window_exact") return SimBackend::WindowExact;
    if (s == "euler_grid") return SimBackend::EulerGrid;
    throw ValidationError("unknown simulator backend '" + s + "'");
}

// ---- pipelines ------------------------------------------------------------

PipelineOutput run_phi(const ExperimentConfig& cfg, const std::string& out_dir) {
    LevyModel model = model_from_json(cfg.raw.at("model"));
    json block = cfg.raw.value("phi", json::object());
    require_keys(block, "phi", {"q_values"});
    std::vector<double> qs = block.contains("q_values")
                                 ? block.at("q_values").get<std::vector<double>>()
                                 : std::vector<double>{0.0, 0.25, 0.5, 1.0, 2.0};

    CsvWriter csv(out_dir + "/phi.csv", "q,phi,psi_prime_at_phi,bracket_lo,bracket_hi");
    double worst = 0.0;
    for (double q : qs) {
        PhiSolution sol = phi(model, q);
        worst = std::max(worst, std::abs(psi(model, sol.phi) - q));
        csv.row({q, sol.phi, sol.psi_prime_at_phi, sol.bracket[0], sol.bracket[1]});
    }
    PipelineOutput out;
    out.artifacts = {"phi.csv"};
    out.summary = {{"max_root_defect", worst}, {"model", model.name()}};
    return out;
}

PipelineOutput run_scale(const ExperimentConfig& cfg, const std::string& out_dir) {
    LevyModel model = model_from_json(cfg.raw.at("model"));
    json block = cfg.raw.value("scale", json::object());
    require_keys(block, "scale", {"q", "x_lo", "x_hi", "points", "backend"});
    double q = get_num(block, "q", 1.0);
    double x_lo = get_num(block, "x_lo", 0.0);
    double x_hi = get_num(block, "x_hi", 10.0);
    int points = static_cast<int>(get_num(block, "points", 101));
    if (points < 2 || x_hi <= x_lo) throw ValidationError("bad scale grid");
    ScaleBackend backend = ScaleBackend::ClosedForm;
    if (block.value("backend", "closed_form") == std::string("contour_inversion")) {
        backend = ScaleBackend::ContourInversion;
    }

    ScaleEvaluator ev(model, q, backend);
    bool has_theta = q > 0.0 || psi_prime(model, 0.0) < 0.0;
    std::unique_ptr<PotentialDensity> theta;
    if (has_theta) theta = std::make_unique<PotentialDensity>(model, q);

    CsvWriter csv(out_dir + "/scale.csv", "x,W_q,W_q_prime,theta_q");
    for (int i = 0; i < points; ++i) {
        double x = x_lo + (x_hi - x_lo) * i / (points - 1);
        double w = ev.value(x);
        double wp = x > 0.0 ? ev.derivative(x) : std::nan("");
        double th = has_theta ? (*theta)(x) : std::nan("");
        csv.row({x, w, wp, th});
    }
    PipelineOutput out;
    out.artifacts = {"scale.csv"};
    out.summary = {{"model", model.name()}, {"q", q},
                   {"phi", ev.phi_solution().phi}};
    return out;
}

json simulate_sidecar(const ExperimentConfig& cfg, const TailEstimate& est) {
    return json{{"config", cfg.raw},
                {"seed", est.seed},
                {"kill_barrier", est.barrier},
                {"version", BRANCHMAX_VERSION}};
}

TailEstimate run_simulation(const ExperimentConfig& cfg, const json& block) {
    LevyModel model = model_from_json(cfg.raw.at("model"));
    OffspringLaw law = offspring_from_json(cfg.raw.at("offspring"));
    SimConfig sim(model, law);
    sim.levels = block.at("levels").get<std::vector<double>>();
    sim.n_reps = static_cast<long>(get_num(block, "n_reps", 100000));
    sim.seed = cfg.seed;
    sim.kill_barrier = get_num(block, "kill_barrier", 0.0);
    sim.max_particles = static_cast<long>(get_num(block, "max_particles", 10000000));
    sim.backend = backend_from_string(block.value("backend", "window_exact"));
    sim.dt = get_num(block, "dt", 1e-3);
    sim.threads = cfg.threads;
    return estimate_survival(sim);
}

PipelineOutput run_simulate(const ExperimentConfig& cfg, const std::string& out_dir) {
    json block = cfg.raw.at("simulate");
    require_keys(block, "simulate",
                 {"levels", "n_reps", "kill_barrier", "max_particles", "backend", "dt"});
    TailEstimate est = run_simulation(cfg, block);

    CsvWriter csv(out_dir + "/simulate.csv",
                  "x,u_hat,ci_low,ci_high,n_reps,killed_frac,truncated_frac");
    for (const auto& lv : est.levels) {
        csv.row({lv.x, lv.u_hat, lv.ci_low, lv.ci_high, static_cast<double>(lv.n_reps),
                 lv.killed_frac, lv.truncated_frac});
    }
    write_json(out_dir + "/simulate_meta.json", simulate_sidecar(cfg, est));

    PipelineOutput out;
    out.artifacts = {"simulate.csv", "simulate_meta.json"};
    bool any_aborted = false;
    for (const auto& lv : est.levels) any_aborted |= lv.aborted;
    out.summary = {{"levels", est.levels.size()}, {"aborted", any_aborted}};
    return out;
}

SolverOptions solver_options_from(const json& block) {
    require_keys(block, "solve", {"x_max", "h", "tol", "omega", "max_iterations",
                                  "accelerate"});
    SolverOptions opts;
    opts.x_max = get_num(block, "x_max", 40.0);
    opts.h = get_num(block, "h", 0.02);
    opts.tol = get_num(block, "tol", 1e-9);
    opts.omega = get_num(block, "omega", 0.7);
    opts.max_iterations = static_cast<int>(get_num(block, "max_iterations", 10000));
    opts.accelerate = block.value("accelerate", true);
    return opts;
}

PipelineOutput run_solve(const ExperimentConfig& cfg, const std::string& out_dir) {
    LevyModel model = model_from_json(cfg.raw.at("model"));
    OffspringLaw law = offspring_from_json(cfg.raw.at("offspring"));
    SolverOptions opts = solver_options_from(cfg.raw.value("solve", json::object()));

    SolverReport report;
    SurvivalCurve curve = solve_u(model, law, opts, &report);

    // Checker residuals: the renewal form for the matching regime, the decay
    // envelope of the reconstructed Delta, and the pointwise R bound.
    bool critical = law.classify() == Criticality::Critical;
    ResidualReport renewal;
    std::string renewal_kind = "none";
    if (!critical) {
        renewal = subcritical_renewal_residual(curve, model, law);
        renewal_kind = "subcritical";
    } else if (drift_regime(model) != DriftRegime::DriftDown) {
        renewal = critical_renewal_residual(curve, model, law);
        renewal_kind = "critical";
    }
    report.residual_renewal = renewal_kind == "none" ? -1.0 : renewal.max_residual;

    DeltaReconstruction delta(curve, model, law);
    double phi1 = WindowLaw(model).phi1();
    int n = static_cast<int>(curve.values().size()) - 1;
    std::vector<double> dgrid = delta.on_grid();

    double env_hi = std::min(12.0, 0.5 * curve.x_max());
    double base = 0.0, worst_env = 0.0;
    for (int i = 0; i <= n; ++i) {
        double x = curve.step() * i;
        if (x < 2.0 || x > env_hi) continue;
        double b = std::abs(dgrid[i]) * std::exp((phi1 - 0.1) * x);
        if (x <= 3.0) base = std::max(base, b);
        worst_env = std::max(worst_env, b);
    }
    report.residual_delta_rate = base > 0.0 ? worst_env / base : 0.0;

    double worst_r = 0.0;
    double m3 = law.third_moment();
    for (double u : curve.values()) {
        double bound = m3 * u * u * u;
        double r = law.remainder(u);
        if (r < -1e-15) worst_r = std::max(worst_r, -r);
        if (r > bound) worst_r = std::max(worst_r, r - bound);
    }
    report.residual_r_bound = worst_r;

    ScaleEvaluator w0(model, 0.0);
    CsvWriter csv(out_dir + "/solve.csv", "x,u,delta,gamma");
    for (int i = 0; i <= n; ++i) {
        double x = curve.step() * i;
        double u = curve.values()[i];
        csv.row({x, u, dgrid[i], x * w0.value(x) * u});
    }

    json rep{{"iterations", report.iterations},
             {"final_update", report.final_update},
             {"converged", report.converged},
             {"omega", report.omega},
             {"d_truncation_mass", report.d_truncation_mass},
             {"renewal_kind", renewal_kind},
             {"renewal_residual", report.residual_renewal},
             {"renewal_reliable_to", renewal.reliable_to},
             {"delta_envelope_growth", report.residual_delta_rate},
             {"r_bound_violation", report.residual_r_bound},
             {"tail_form", static_cast<int>(curve.tail().form)},
             {"tail_rate", curve.tail().rate},
             {"tail_anchor_x", curve.tail().x0},
             {"tail_anchor_u", curve.tail().u0}};
    write_json(out_dir + "/solve_report.json", rep);

    PipelineOutput out;
    out.artifacts = {"solve.csv", "solve_report.json"};
    out.summary = {{"iterations", report.iterations},
                   {"renewal_residual", report.residual_renewal}};
    return out;
}

PipelineOutput run_asymptotics(const ExperimentConfig& cfg, const std::string& out_dir) {
    LevyModel model = model_from_json(cfg.raw.at("model"));
    OffspringLaw law = offspring_from_json(cfg.raw.at("offspring"));
    json block = cfg.raw.value("asymptotics", json::object());
    require_keys(block, "asymptotics", {"window_lo", "window_hi", "tolerance"});
    SolverOptions opts = solver_options_from(cfg.raw.value("solve", json::object()));

    SurvivalCurve curve = solve_u(model, law, opts);
    RegimePrediction pred = predict(model, law);

    double window_lo = get_num(block, "window_lo", 0.5 * opts.x_max * 0.2);
    double window_hi = get_num(block, "window_hi", 0.5 * opts.x_max);

    std::vector<std::pair<double, double>> pts;
    int n = static_cast<int>(curve.values().size()) - 1;
    for (int i = 0; i <= n; ++i) pts.emplace_back(curve.step() * i, curve.values()[i]);

    json result{{"regime", regime_name(pred.regime)},
                {"formula", pred.formula},
                {"predicted", pred.value}};
    bool pass = false;
    double fitted = 0.0;
    switch (pred.kind) {
        case RegimePrediction::Kind::ExpRate: {
            double tol = get_num(block, "tolerance", 0.02);
            RateFit fit = fit_exp_rate(pts, window_lo, window_hi);
            fitted = fit.rate;
            pass = std::abs(fit.rate - pred.value) <= tol * pred.value;
            result["fitted"] = fit.rate;
            result["stderr"] = fit.std_err;
            result["tolerance"] = tol;
            break;
        }
        case RegimePrediction::Kind::XuLimit: {
            double tol = get_num(block, "tolerance", 0.10);
            double x = window_hi;
            fitted = x * curve(x);
            pass = std::abs(fitted - pred.value) <= tol * pred.value;
            result["fitted"] = fitted;
            result["at_x"] = x;
            result["tolerance"] = tol;
            break;
        }
        case RegimePrediction::Kind::GammaBand: {
            double tol = get_num(block, "tolerance", 0.15);
            ScaleEvaluator w0(model, 0.0);
            PlateauFit fit = fit_power_product(
                pts, [&](double x) { return w0.value(x); }, window_lo, window_hi);
            fitted = fit.median;
            double closest = std::numeric_limits<double>::infinity();
            for (auto [x, u] : pts) {
                if (x < window_lo || x > window_hi || u <= 0.0) continue;
                closest = std::min(closest,
                                   std::abs(x * w0.value(x) * u - pred.value) / pred.value);
            }
            pass = fit.band_ratio <= 3.0 && (!pred.regularly_varying || closest <= tol);
            result["fitted_median"] = fit.median;
            result["band_ratio"] = fit.band_ratio;
            result["closest_approach"] = closest;
            result["tolerance"] = tol;
            break;
        }
    }
    result["window"] = {window_lo, window_hi};
    result["pass"] = pass;
    write_json(out_dir + "/asymptotics.json", result);

    PipelineOutput out;
    out.artifacts = {"asymptotics.json"};
    out.summary = {{"predicted", pred.value}, {"fitted", fitted}, {"pass", pass}};
    return out;
}

PipelineOutput run_compare(const ExperimentConfig& cfg, const std::string& out_dir) {
    json block = cfg.raw.at("compare");
    require_keys(block, "compare",
                 {"levels", "n_reps", "kill_barrier", "max_particles", "backend", "dt"});
    LevyModel model = model_from_json(cfg.raw.at("model"));
    OffspringLaw law = offspring_from_json(cfg.raw.at("offspring"));

    // Solver and simulator stay independent: the solver is deterministic on
    // its own grid, the simulator owns the seed.
    SolverOptions opts = solver_options_from(cfg.raw.value("solve", json::object()));
    SurvivalCurve curve = solve_u(model, law, opts);
    TailEstimate est = run_simulation(cfg, block);

    CsvWriter csv(out_dir + "/compare.csv",
                  "x,u_solver,u_hat,ci_low,ci_high,ci_half,agree");
    double worst_units = 0.0;
    bool all_agree = true;
    for (const auto& lv : est.levels) {
        double us = curve(lv.x);
        double half = 0.5 * (lv.ci_high - lv.ci_low);
        double units = half > 0.0 ? std::abs(us - lv.u_hat) / half : 0.0;
        bool agree = units <= 3.0;
        all_agree &= agree;
        worst_units = std::max(worst_units, units);
        csv.row({lv.x, us, lv.u_hat, lv.ci_low, lv.ci_high, half, agree ? 1.0 : 0.0});
    }
    write_json(out_dir + "/compare_meta.json", simulate_sidecar(cfg, est));

    PipelineOutput out;
    out.artifacts = {"compare.csv", "compare_meta.json"};
    out.summary = {{"max_discrepancy_ci_halfwidths", worst_units}, {"agree", all_agree}};
    return out;
}

} // namespace

LevyModel model_from_json(const json& j) {
    require_keys(j, "model", {"variant", "a", "eta", "alpha", "c", "rho", "mu"});
    if (!j.contains("variant")) throw ValidationError("model block needs a 'variant'");
    std::string v = j.at("variant").get<std::string>();
    if (v == "brownian_drift") {
        return LevyModel::brownian(get_num(j, "a", 0.0), get_num(j, "eta", 1.0));
    }
    if (v == "sn_stable") {
        return LevyModel::stable(get_num(j, "alpha", 1.5), get_num(j, "c", 1.0));
    }
    if (v == "brownian_exp_jumps") {
        return LevyModel::brownian_exp_jumps(get_num(j, "a", 1.0), get_num(j, "eta", 1.0),
                                             get_num(j, "rho", 1.0), get_num(j, "mu", 1.0));
    }
    if (v == "stable_with_drift") {
        return LevyModel::stable_with_drift(get_num(j, "a", 0.5), get_num(j, "alpha", 1.5),
                                            get_num(j, "c", 1.0));
    }
    throw ValidationError("unknown model variant '" + v + "'");
}

OffspringLaw offspring_from_json(const json& j) {
    if (!j.is_array()) throw ValidationError("offspring must be an array [p0, p1, ...]");
    return OffspringLaw(j.get<std::vector<double>>());
}

ExperimentConfig ExperimentConfig::parse(const json& j) {
    require_keys(j, "config",
                 {"pipeline", "seed", "threads", "model", "offspring", "phi", "scale",
                  "simulate", "solve", "asymptotics", "compare"});
    ExperimentConfig cfg;
    cfg.raw = j;
    if (!j.contains("pipeline")) throw ValidationError("config needs a 'pipeline'");
    cfg.pipeline = j.at("pipeline").get<std::string>();
    static const std::set<std::string> known{"phi", "scale", "simulate",
                                             "solve", "asymptotics", "compare"};
    if (!known.count(cfg.pipeline)) {
        throw ValidationError("unknown pipeline '" + cfg.pipeline + "'");
    }
    cfg.seed = static_cast<std::uint64_t>(get_num(j, "seed", 1.0));
    cfg.threads = static_cast<int>(get_num(j, "threads", 1.0));
    if (cfg.threads < 1) throw ValidationError("threads must be >= 1");
    return cfg;
}

std::string config_hash(const json& config) {
    std::string s = config.dump();
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a:%016" PRIx64, h);
    return buf;
}

json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read config file " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ValidationError(std::string("config parse error: ") + e.what());
    }
    return j;
}

RunResult run_experiment(const json& config, const std::string& out_dir) {
    RunResult result;
    auto t0 = std::chrono::steady_clock::now();
    try {
        ExperimentConfig cfg = ExperimentConfig::parse(config);
        std::filesystem::create_directories(out_dir);

        PipelineOutput po;
        if (cfg.pipeline == "phi") po = run_phi(cfg, out_dir);
        else if (cfg.pipeline == "scale") po = run_scale(cfg, out_dir);
        else if (cfg.pipeline == "simulate") po = run_simulate(cfg, out_dir);
        else if (cfg.pipeline == "solve") po = run_solve(cfg, out_dir);
        else if (cfg.pipeline == "asymptotics") po = run_asymptotics(cfg, out_dir);
        else po = run_compare(cfg, out_dir);

        double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                          .count();
        json manifest{{"pipeline", cfg.pipeline},
                      {"version", BRANCHMAX_VERSION},
                      {"seed", cfg.seed},
                      {"threads", cfg.threads},
                      {"config", cfg.raw},
                      {"config_hash", config_hash(cfg.raw)},
                      {"wall_time_s", wall},
                      {"artifacts", po.artifacts},
                      {"summary", po.summary}};
        write_json(out_dir + "/manifest.json", manifest);
        result.artifacts = po.artifacts;
        result.artifacts.push_back("manifest.json");
        result.exit_code = 0;
        result.message = "ok";
    } catch (const ValidationError& e) {
        result.exit_code = 2;
        result.message = e.what();
    } catch (const std::exception& e) {
        result.exit_code = 3;
        result.message = e.what();
    }
    return result;
}

} // namespace branchmax
