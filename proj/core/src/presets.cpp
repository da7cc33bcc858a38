#include "branchmax/experiment.hpp"

namespace branchmax {

using nlohmann::json;

namespace {

json bm_std() { return {{"variant", "brownian_drift"}, {"a", 0.0}, {"eta", 1.0}}; }
json stable15() { return {{"variant", "sn_stable"}, {"alpha", 1.5}, {"c", 1.0}}; }
json delta0() { return json::array({1.0}); }
json binary_critical() { return json::array({0.5, 0.0, 0.5}); }
json subcritical_law() { return json::array({0.75, 0.0, 0.25}); }

std::map<std::string, json> build() {
    std::map<std::string, json> p;

    p["nobranch-bm"] = {{"pipeline", "compare"},
                        {"seed", 20240801},
                        {"model", bm_std()},
                        {"offspring", delta0()},
                        {"solve", {{"x_max", 20.0}, {"h", 0.02}}},
                        {"compare", {{"levels", {0.5, 1.0, 2.0, 3.0}}, {"n_reps", 100000}}}};

    p["nobranch-stable"] = {{"pipeline", "compare"},
                            {"seed", 20240802},
                            {"model", stable15()},
                            {"offspring", delta0()},
                            {"solve", {{"x_max", 20.0}, {"h", 0.02}}},
                            {"compare",
                             {{"levels", {0.5, 1.0, 2.0, 3.0}}, {"n_reps", 100000}}}};

    p["thm1-bm-subcritical"] = {{"pipeline", "asymptotics"},
                                {"seed", 20240803},
                                {"model", bm_std()},
                                {"offspring", subcritical_law()},
                                {"solve", {{"x_max", 30.0}, {"h", 0.02}, {"tol", 1e-12}}},
                                {"asymptotics",
                                 {{"window_lo", 12.0}, {"window_hi", 26.0},
                                  {"tolerance", 0.02}}}};

    p["thm1-stable-subcritical"] = {{"pipeline", "asymptotics"},
                                    {"seed", 20240804},
                                    {"model", stable15()},
                                    {"offspring", subcritical_law()},
                                    {"solve",
                                     {{"x_max", 45.0}, {"h", 0.025}, {"tol", 1e-12}}},
                                    {"asymptotics",
                                     {{"window_lo", 20.0}, {"window_hi", 42.0},
                                      {"tolerance", 0.02}}}};

    p["thm2-driftup"] = {{"pipeline", "asymptotics"},
                         {"seed", 20240805},
                         {"model", {{"variant", "brownian_drift"}, {"a", 0.2}, {"eta", 1.0}}},
                         {"offspring", binary_critical()},
                         {"solve", {{"x_max", 400.0}, {"h", 0.05}}},
                         {"asymptotics",
                          {{"window_lo", 100.0}, {"window_hi", 200.0}, {"tolerance", 0.10}}}};

    p["thm2-oscillating-bm"] = {{"pipeline", "asymptotics"},
                                {"seed", 20240806},
                                {"model", bm_std()},
                                {"offspring", binary_critical()},
                                {"solve", {{"x_max", 400.0}, {"h", 0.05}}},
                                {"asymptotics",
                                 {{"window_lo", 20.0}, {"window_hi", 200.0},
                                  {"tolerance", 0.15}}}};

    p["thm2-oscillating-stable"] = {{"pipeline", "asymptotics"},
                                    {"seed", 20240807},
                                    {"model", stable15()},
                                    {"offspring", binary_critical()},
                                    {"solve", {{"x_max", 400.0}, {"h", 0.05}}},
                                    {"asymptotics",
                                     {{"window_lo", 20.0}, {"window_hi", 200.0},
                                      {"tolerance", 0.15}}}};

    p["thm2-driftdown"] = {{"pipeline", "asymptotics"},
                           {"seed", 20240808},
                           {"model",
                            {{"variant", "brownian_drift"}, {"a", -0.5}, {"eta", 1.0}}},
                           {"offspring", binary_critical()},
                           {"solve", {{"x_max", 30.0}, {"h", 0.02}, {"tol", 1e-12}}},
                           {"asymptotics",
                            {{"window_lo", 12.0}, {"window_hi", 26.0},
                             {"tolerance", 0.02}}}};

    p["scale-bm"] = {{"pipeline", "scale"},
                     {"model", bm_std()},
                     {"scale", {{"q", 1.0}, {"x_lo", 0.0}, {"x_hi", 10.0}, {"points", 201}}}};

    p["phi-catalog-bm"] = {{"pipeline", "phi"},
                           {"model", bm_std()},
                           {"phi", {{"q_values", {0.0, 0.25, 0.5, 1.0, 2.0}}}}};

    return p;
}

} // namespace

const std::map<std::string, json>& presets() {
    static const std::map<std::string, json> p = build();
    return p;
}

} // namespace branchmax
