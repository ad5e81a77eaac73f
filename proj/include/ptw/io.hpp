#pragma once

#include "ptw/homogenized.hpp"
#include "ptw/profile.hpp"
#include "ptw/types.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace ptw {

using json = nlohmann::ordered_json;

// 17 significant digits, so printed values round-trip exactly.
std::string fmt17(double v);

json to_json(const WavePoint& w);
WavePoint wave_from_json(const json& j);
json to_json(const VecXd& v);
json to_json(const MatXd& m);
json to_json(const cplx& z);
json to_json(const VecXc& v);

void write_text(const std::string& path, const std::string& text);
void write_json(const std::string& path, const json& j);
json read_json(const std::string& path);

// Minimal CSV writer; numbers are written with fmt17.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);
    void row(const std::vector<double>& values);
    std::string str() const { return text_; }
    void save(const std::string& path) const { write_text(path, text_); }

private:
    size_t cols_;
    std::string text_;
};

// Declarative run configuration (TOML subset: tables, key = number | string | bool | [numbers]).
struct RunConfig {
    std::string out = "out";
    long seed = 7;

    // [model]
    std::string model = "vdw_cubic";
    int d = 1;
    std::map<std::string, double> params; // [model.params]

    // [profile]
    std::string wave_file;
    std::vector<double> a{1.332139883511645, 0.0};
    double X = 0; // 0: first return time
    double s = 0;
    std::vector<double> q{0.0, 0.0};
    bool synthetic = false;
    std::vector<double> synthetic_mean{0.5};
    std::vector<double> synthetic_amplitude{0.3};
    double synthetic_period = 1;
    int synthetic_m = 16;

    // [continuation]
    std::vector<double> direction;
    int steps = 10;
    double ds = 0.01;

    // [resolution]
    int m = 128;
    int m_profile = 256;
    int xi_count = 64;
    int rays = 16;
    std::vector<double> radii{1e-4, 2e-4, 5e-4, 1e-3, 2e-3, 5e-3, 1e-2};
    int sphere_count = 16;
    int cells = 256;
    int cell_m = 16;
    int nt = 64;
    double Lt = 200;
    double t_min = 1;
    double t_max = 1000;
    int t_count = 41;
    double t_fit_min = 10;
    std::string split = "full";

    // [evans]
    double lambda_re = 0.5;
    double lambda_im = 0;
    std::vector<double> xi{0.3};
    double contour_center = 0;
    double contour_radius = 1;
    int lowfreq_rays = 10;
    std::vector<double> lowfreq_radii{4e-3, 2e-3, 1e-3};

    // [evolve]
    double amplitude = 0.1;
    double t_end = 20;
    int outputs = 41;
    bool snapshots = false;

    // [tolerance]
    double newton_tol = 1e-10;
    double ode_rtol = 1e-12;
    double ode_atol = 1e-13;
    double evans_rtol = 1e-12;
    double evans_atol = 1e-14;
    double cluster_tol = 1e-4;
    double d1_margin = 1e-8;
    double zero_speed_tol = 1e-9;
    double wrap_tol = 1e-3;
    double eps = 0.3;
    double smallness = 0.5;
    double nonlinear_rtol = 1e-6;
    double cond_max = 1e10;

    // [verify]
    std::string suite = "acceptance";

    bool operator==(const RunConfig&) const = default;
};

// Strict parse: unknown keys, wrong types and non-positive tolerances raise ErrorKind::Config
// with the offending key in the message.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& cfg);
// FNV-1a of the serialized config
std::string config_hash(const RunConfig& cfg);

// key named in a configuration error, empty when the error is not key specific
std::string config_error_key(const std::string& message);

ModelSpec model_from_config(const RunConfig& cfg);
// loads wave_file, builds the synthetic profile, or runs the periodic-orbit search
WavePoint wave_from_config(const ModelSpec& model, const RunConfig& cfg);
std::vector<double> time_grid(const RunConfig& cfg);

} // namespace ptw
