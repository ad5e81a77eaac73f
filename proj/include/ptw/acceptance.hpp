#pragma once

#include "ptw/io.hpp"

#include <functional>
#include <string>
#include <vector>

namespace ptw {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string measured;
    std::string expected;
    double seconds = 0;
    json details = json::object();
};

struct AcceptanceSettings {
    int vdw_m = 128;          // collocation points per period for dense vdw spectra
    int surface_m = 64;       // collocation points for surface tracking
    int decay_cells = 256;
    int nonlinear_cells = 64;
    unsigned seed = 7;
};

// One entry per criterion; `only` selects a subset by id (empty: all).
std::vector<CriterionResult> run_acceptance(const AcceptanceSettings& s = {}, const std::vector<int>& only = {},
                                            const std::function<void(const CriterionResult&)>& on_result = {});

// Sanity suite on the configured model around a constant state: Evans closed form, Bloch isometry,
// root counting, mass conservation and (for parabolic constant-coefficient models) heat-kernel decay rates.
std::vector<CriterionResult> run_baseline(const RunConfig& cfg,
                                          const std::function<void(const CriterionResult&)>& on_result = {});

json to_json(const CriterionResult& r);
// "PASS  3  name  measured=...  expected=..."
std::string summary_line(const CriterionResult& r);

// The built-in test waves used by the suites.
WavePoint vdw_reference_wave(const ModelSpec& vdw);
WavePoint synthetic_stable_wave(const ModelSpec& scalar);
ModelSpec synthetic_stable_model(int d);

} // namespace ptw
