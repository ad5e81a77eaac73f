#include "ptw/io.hpp"

#include "ptw/errors.hpp"

#include <CLI11.hpp>

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>
#include <variant>

namespace ptw {

std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json to_json(const VecXd& v)
{
    json a = json::array();
    for (long i = 0; i < v.size(); ++i)
        a.push_back(v(i));
    return a;
}

json to_json(const MatXd& m)
{
    json a = json::array();
    for (long i = 0; i < m.rows(); ++i)
        a.push_back(to_json(VecXd(m.row(i).transpose())));
    return a;
}

json to_json(const cplx& z) { return json::array({z.real(), z.imag()}); }

json to_json(const VecXc& v)
{
    json a = json::array();
    for (long i = 0; i < v.size(); ++i)
        a.push_back(to_json(v(i)));
    return a;
}

namespace {

VecXd vec_from(const json& j)
{
    VecXd v(j.size());
    for (size_t i = 0; i < j.size(); ++i)
        v(i) = j[i].get<double>();
    return v;
}

MatXd mat_from(const json& j, long cols)
{
    MatXd m(j.size(), cols);
    for (size_t i = 0; i < j.size(); ++i) {
        if (static_cast<long>(j[i].size()) != cols)
            fail(ErrorKind::Io, "ragged matrix in JSON input");
        for (long c = 0; c < cols; ++c)
            m(i, c) = j[i][c].get<double>();
    }
    return m;
}

} // namespace

json to_json(const WavePoint& w)
{
    json j;
    j["model_id"] = w.model_id;
    j["n"] = w.n;
    j["d"] = w.d;
    j["X"] = w.X;
    j["s"] = w.s;
    j["nu"] = to_json(w.nu);
    j["q"] = to_json(w.q);
    j["anchor"] = to_json(w.anchor);
    j["is_solution"] = w.is_solution;
    j["M"] = to_json(w.M);
    j["F"] = to_json(w.F);
    j["samples"] = to_json(w.samples);
    return j;
}

WavePoint wave_from_json(const json& j)
{
    try {
        WavePoint w;
        w.model_id = j.at("model_id").get<std::string>();
        w.n = j.at("n").get<int>();
        w.d = j.at("d").get<int>();
        w.X = j.at("X").get<double>();
        w.s = j.at("s").get<double>();
        w.nu = vec_from(j.at("nu"));
        w.q = vec_from(j.at("q"));
        w.anchor = vec_from(j.at("anchor"));
        w.is_solution = j.at("is_solution").get<bool>();
        w.M = vec_from(j.at("M"));
        w.F = mat_from(j.at("F"), w.d);
        w.samples = mat_from(j.at("samples"), w.n);
        return w;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Io, std::string("malformed wave JSON: ") + e.what());
    }
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream os(path);
    if (!os)
        fail(ErrorKind::Io, "cannot write " + path);
    os << text;
    if (!os)
        fail(ErrorKind::Io, "short write to " + path);
}

void write_json(const std::string& path, const json& j)
{
    // numbers go through the default serializer, which prints the shortest round-trip form
    write_text(path, j.dump(2) + "\n");
}

json read_json(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        fail(ErrorKind::Io, "cannot read " + path);
    try {
        return json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Io, "cannot parse " + path + ": " + e.what());
    }
}

CsvWriter::CsvWriter(std::vector<std::string> header) : cols_(header.size())
{
    for (size_t i = 0; i < header.size(); ++i)
        text_ += (i ? "," : "") + header[i];
    text_ += "\n";
}

void CsvWriter::row(const std::vector<double>& values)
{
    require(values.size() == cols_, "CSV row has the wrong width");
    for (size_t i = 0; i < values.size(); ++i)
        text_ += (i ? "," : "") + fmt17(values[i]);
    text_ += "\n";
}

namespace {

using Slot = std::variant<int*, long*, double*, bool*, std::string*, std::vector<double>*>;

struct Field {
    const char* key;
    Slot slot;
    bool tolerance = false;
};

std::vector<Field> fields(RunConfig& c)
{
    return {
        {"out", &c.out},
        {"seed", &c.seed},
        {"model.id", &c.model},
        {"model.d", &c.d},
        {"profile.wave_file", &c.wave_file},
        {"profile.a", &c.a},
        {"profile.X", &c.X},
        {"profile.s", &c.s},
        {"profile.q", &c.q},
        {"profile.synthetic", &c.synthetic},
        {"profile.synthetic_mean", &c.synthetic_mean},
        {"profile.synthetic_amplitude", &c.synthetic_amplitude},
        {"profile.synthetic_period", &c.synthetic_period},
        {"profile.synthetic_m", &c.synthetic_m},
        {"continuation.direction", &c.direction},
        {"continuation.steps", &c.steps},
        {"continuation.ds", &c.ds},
        {"resolution.m", &c.m},
        {"resolution.m_profile", &c.m_profile},
        {"resolution.xi_count", &c.xi_count},
        {"resolution.rays", &c.rays},
        {"resolution.radii", &c.radii},
        {"resolution.sphere_count", &c.sphere_count},
        {"resolution.cells", &c.cells},
        {"resolution.cell_m", &c.cell_m},
        {"resolution.nt", &c.nt},
        {"resolution.Lt", &c.Lt},
        {"resolution.t_min", &c.t_min},
        {"resolution.t_max", &c.t_max},
        {"resolution.t_count", &c.t_count},
        {"resolution.t_fit_min", &c.t_fit_min},
        {"resolution.split", &c.split},
        {"evans.lambda_re", &c.lambda_re},
        {"evans.lambda_im", &c.lambda_im},
        {"evans.xi", &c.xi},
        {"evans.contour_center", &c.contour_center},
        {"evans.contour_radius", &c.contour_radius},
        {"evans.lowfreq_rays", &c.lowfreq_rays},
        {"evans.lowfreq_radii", &c.lowfreq_radii},
        {"evolve.amplitude", &c.amplitude},
        {"evolve.t_end", &c.t_end},
        {"evolve.outputs", &c.outputs},
        {"evolve.snapshots", &c.snapshots},
        {"tolerance.newton_tol", &c.newton_tol, true},
        {"tolerance.ode_rtol", &c.ode_rtol, true},
        {"tolerance.ode_atol", &c.ode_atol, true},
        {"tolerance.evans_rtol", &c.evans_rtol, true},
        {"tolerance.evans_atol", &c.evans_atol, true},
        {"tolerance.cluster_tol", &c.cluster_tol, true},
        {"tolerance.d1_margin", &c.d1_margin, true},
        {"tolerance.zero_speed_tol", &c.zero_speed_tol, true},
        {"tolerance.wrap_tol", &c.wrap_tol, true},
        {"tolerance.eps", &c.eps, true},
        {"tolerance.smallness", &c.smallness, true},
        {"tolerance.nonlinear_rtol", &c.nonlinear_rtol, true},
        {"tolerance.cond_max", &c.cond_max, true},
        {"verify.suite", &c.suite},
    };
}

[[noreturn]] void config_fail(const std::string& key, const std::string& what)
{
    fail(ErrorKind::Config, "config key '" + key + "': " + what);
}

double to_double(const std::string& key, const std::string& s)
{
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos == s.size())
            return v;
    } catch (const std::exception&) {
    }
    config_fail(key, "expected a number, got '" + s + "'");
}

long to_long(const std::string& key, const std::string& s)
{
    try {
        size_t pos = 0;
        long v = std::stol(s, &pos);
        if (pos == s.size())
            return v;
    } catch (const std::exception&) {
    }
    config_fail(key, "expected an integer, got '" + s + "'");
}

std::string quote(const std::string& s)
{
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"' || ch == '\\')
            out += '\\';
        out += ch;
    }
    return out + "\"";
}

std::string value_text(const Slot& slot)
{
    struct V {
        std::string operator()(int* p) const { return std::to_string(*p); }
        std::string operator()(long* p) const { return std::to_string(*p); }
        std::string operator()(double* p) const { return fmt17(*p); }
        std::string operator()(bool* p) const { return *p ? "true" : "false"; }
        std::string operator()(std::string* p) const { return quote(*p); }
        std::string operator()(std::vector<double>* p) const
        {
            std::string s = "[";
            for (size_t i = 0; i < p->size(); ++i)
                s += (i ? ", " : "") + fmt17((*p)[i]);
            return s + "]";
        }
    };
    return std::visit(V{}, slot);
}

void validate(RunConfig& c)
{
    for (const Field& f : fields(c))
        if (f.tolerance && !(*std::get<double*>(f.slot) > 0))
            config_fail(f.key, "tolerances must be positive");
    auto positive = [](const char* key, double v) {
        if (!(v > 0))
            config_fail(key, "must be positive");
    };
    positive("model.d", c.d);
    positive("resolution.m", c.m);
    positive("resolution.m_profile", c.m_profile);
    positive("resolution.xi_count", c.xi_count);
    positive("resolution.rays", c.rays);
    positive("resolution.cells", c.cells);
    positive("resolution.cell_m", c.cell_m);
    positive("resolution.t_min", c.t_min);
    positive("resolution.t_count", c.t_count);
    positive("evolve.t_end", c.t_end);
    positive("evolve.outputs", c.outputs);
    positive("profile.synthetic_period", c.synthetic_period);
    if (c.t_max <= c.t_min)
        config_fail("resolution.t_max", "must exceed t_min");
    for (double r : c.radii)
        positive("resolution.radii", r);
    for (double r : c.lowfreq_radii)
        positive("evans.lowfreq_radii", r);
    if (c.split != "full" && c.split != "S_I" && c.split != "S_II")
        config_fail("resolution.split", "expected full, S_I or S_II");
    if (c.suite != "acceptance" && c.suite != "baseline")
        config_fail("verify.suite", "expected acceptance or baseline");
}

// The TOML reader merges repeated keys into one multi-valued item, so duplicates are found on the raw text.
void reject_duplicates(const std::string& text)
{
    static const std::regex header(R"(^\s*\[\s*([A-Za-z0-9_.]+)\s*\]\s*(#.*)?$)");
    static const std::regex assign(R"(^\s*([A-Za-z0-9_]+)\s*=)");
    std::istringstream is(text);
    std::set<std::string> seen;
    std::string line, section;
    std::smatch m;
    while (std::getline(is, line)) {
        if (std::regex_match(line, m, header))
            section = m[1].str() + ".";
        else if (std::regex_search(line, m, assign) && !seen.insert(section + m[1].str()).second)
            config_fail(section + m[1].str(), "duplicate key");
    }
}

} // namespace

RunConfig parse_config(const std::string& text)
{
    reject_duplicates(text);
    std::vector<CLI::ConfigItem> items;
    try {
        std::istringstream is(text);
        items = CLI::ConfigTOML().from_config(is);
    } catch (const std::exception& e) {
        fail(ErrorKind::Config, std::string("malformed config: ") + e.what());
    }
    RunConfig c;
    auto table = fields(c);
    std::set<std::string> seen;
    for (const auto& it : items) {
        if (it.name == "++" || it.name == "--")
            continue;
        const std::string key = it.fullname();
        if (!seen.insert(key).second)
            config_fail(key, "duplicate key");
        if (key.rfind("model.params.", 0) == 0 && it.parents.size() == 2) {
            if (it.inputs.size() != 1)
                config_fail(key, "expected a single number");
            c.params[it.name] = to_double(key, it.inputs[0]);
            continue;
        }
        auto f = std::find_if(table.begin(), table.end(), [&](const Field& fd) { return key == fd.key; });
        if (f == table.end())
            config_fail(key, "unknown key");
        if (std::holds_alternative<std::vector<double>*>(f->slot)) {
            auto* v = std::get<std::vector<double>*>(f->slot);
            v->clear();
            for (const auto& s : it.inputs)
                if (!s.empty())
                    v->push_back(to_double(key, s));
            continue;
        }
        if (it.inputs.size() != 1)
            config_fail(key, "expected a single value");
        const std::string& s = it.inputs[0];
        struct Assign {
            const std::string& key;
            const std::string& s;
            void operator()(int* p) const { *p = static_cast<int>(to_long(key, s)); }
            void operator()(long* p) const { *p = to_long(key, s); }
            void operator()(double* p) const { *p = to_double(key, s); }
            void operator()(bool* p) const
            {
                if (s != "true" && s != "false")
                    config_fail(key, "expected true or false");
                *p = s == "true";
            }
            void operator()(std::string* p) const { *p = s; }
            void operator()(std::vector<double>*) const {}
        };
        std::visit(Assign{key, s}, f->slot);
    }
    validate(c);
    return c;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        fail(ErrorKind::Config, "cannot open config file " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& cfg)
{
    RunConfig c = cfg;
    auto table = fields(c);
    std::string out;
    std::string section;
    for (const Field& f : table) {
        std::string key = f.key;
        auto dot = key.find('.');
        std::string sec = dot == std::string::npos ? "" : key.substr(0, dot);
        std::string name = dot == std::string::npos ? key : key.substr(dot + 1);
        if (sec != section) {
            if (section == "model" && !c.params.empty()) {
                out += "\n[model.params]\n";
                for (const auto& [k, v] : c.params)
                    out += k + " = " + fmt17(v) + "\n";
            }
            out += "\n[" + sec + "]\n";
            section = sec;
        }
        out += name + " = " + value_text(f.slot) + "\n";
    }
    return out;
}

std::string config_hash(const RunConfig& cfg)
{
    uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : serialize_config(cfg)) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

std::string config_error_key(const std::string& message)
{
    static const std::regex re("config key '([^']*)'");
    std::smatch m;
    if (std::regex_search(message, m, re))
        return m[1];
    return "";
}

namespace {

bool known_param(const std::string& id, int d, const std::string& name)
{
    if (id == "heat")
        return name == "kappa";
    if (id == "vdw_cubic")
        return name == "c3" || name == "c1";
    if (id == "scalar_viscous") {
        if (name == "c" || name == "beta" || name == "b0" || name == "b1")
            return true;
        for (int j = 1; j < d; ++j)
            if (name == "a" + std::to_string(j) || name == "kappa" + std::to_string(j))
                return true;
        return false;
    }
    if (id == "const_coeff")
        return name == "n" || std::regex_match(name, std::regex("a[0-9]_[0-9][0-9]"))
               || std::regex_match(name, std::regex("b[0-9][0-9]_[0-9][0-9]"));
    return false;
}

} // namespace

ModelSpec model_from_config(const RunConfig& cfg)
{
    for (const auto& [k, v] : cfg.params)
        if (!known_param(cfg.model, cfg.d, k))
            config_fail("model.params." + k, "unknown parameter for model '" + cfg.model + "'");
    try {
        return make_model(cfg.model, cfg.d, cfg.params);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Domain)
            config_fail("model.id", e.what());
        throw;
    }
}

WavePoint wave_from_config(const ModelSpec& model, const RunConfig& cfg)
{
    if (!cfg.wave_file.empty()) {
        WavePoint w = wave_from_json(read_json(cfg.wave_file));
        if (w.n != model.n || w.d != model.d)
            fail(ErrorKind::Domain, "wave file does not match the configured model");
        return w;
    }
    if (cfg.synthetic) {
        const int n = model.n;
        if (static_cast<int>(cfg.synthetic_mean.size()) != n || static_cast<int>(cfg.synthetic_amplitude.size()) != n)
            config_fail("profile.synthetic_mean", "needs one entry per component");
        MatXd s(cfg.synthetic_m, n);
        for (int i = 0; i < cfg.synthetic_m; ++i)
            for (int c = 0; c < n; ++c)
                s(i, c) = cfg.synthetic_mean[c] + cfg.synthetic_amplitude[c] * std::cos(2 * pi * i / cfg.synthetic_m);
        return WavePoint::synthetic(model, s, cfg.synthetic_period);
    }
    if (static_cast<int>(cfg.a.size()) != model.n)
        config_fail("profile.a", "needs one entry per component");
    if (static_cast<int>(cfg.q.size()) != model.n)
        config_fail("profile.q", "needs one entry per component");
    PeriodicGuess g;
    g.a = Eigen::Map<const VecXd>(cfg.a.data(), model.n);
    g.q = Eigen::Map<const VecXd>(cfg.q.data(), model.n);
    g.X = cfg.X;
    g.s = cfg.s;
    FindOptions fo;
    fo.m = cfg.m_profile;
    fo.newton_tol = cfg.newton_tol;
    fo.ode.rtol = cfg.ode_rtol;
    fo.ode.atol = cfg.ode_atol;
    return find_periodic(model, g, fo);
}

std::vector<double> time_grid(const RunConfig& cfg)
{
    std::vector<double> t;
    for (int k = 0; k < cfg.t_count; ++k)
        t.push_back(cfg.t_min * std::pow(cfg.t_max / cfg.t_min, cfg.t_count > 1 ? double(k) / (cfg.t_count - 1) : 0.0));
    return t;
}

} // namespace ptw
