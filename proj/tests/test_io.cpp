#include "ptw/acceptance.hpp"
#include "ptw/errors.hpp"
#include "ptw/io.hpp"

#include <doctest.h>

using namespace ptw;

namespace {

std::string config_error(const std::string& text)
{
    try {
        parse_config(text);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Config);
        return config_error_key(e.what());
    }
    return "<no error>";
}

} // namespace

TEST_CASE("config round trips through serialization")
{
    RunConfig c = parse_config(R"(out = "results/a"
seed = 11
[model]
id = "scalar_viscous"
d = 3
[model.params]
c = -0.5
b1 = 0.2
[resolution]
radii = [1e-3, 2.5e-3]
split = "S_II"
[tolerance]
eps = 0.1
[evolve]
snapshots = true
)");
    CHECK(c.out == "results/a");
    CHECK(c.seed == 11);
    CHECK(c.d == 3);
    CHECK(c.params.at("c") == -0.5);
    CHECK(c.radii == std::vector<double>{1e-3, 2.5e-3});
    CHECK(c.split == "S_II");
    CHECK(c.eps == 0.1);
    CHECK(c.snapshots);
    RunConfig back = parse_config(serialize_config(c));
    CHECK(back == c);
    CHECK(config_hash(back) == config_hash(c));
    CHECK(serialize_config(RunConfig{}) == serialize_config(parse_config(serialize_config(RunConfig{}))));
}

TEST_CASE("strict config errors name the key")
{
    CHECK(config_error("bogus = 1\n") == "bogus");
    CHECK(config_error("[resolution]\nmm = 3\n") == "resolution.mm");
    CHECK(config_error("[tolerance]\nnewton_tol = 0\n") == "tolerance.newton_tol");
    CHECK(config_error("[resolution]\nm = \"x\"\n") == "resolution.m");
    CHECK(config_error("[resolution]\nm = 2.5\n") == "resolution.m");
    CHECK(config_error("seed = 1\nseed = 2\n") == "seed");
    CHECK(config_error("[evolve]\nsnapshots = 3\n") == "evolve.snapshots");
    CHECK(config_error("[verify]\nsuite = \"all\"\n") == "verify.suite");
}

TEST_CASE("unknown model parameters are rejected")
{
    RunConfig c = parse_config("[model]\nid = \"heat\"\n[model.params]\nkapa = 2\n");
    try {
        model_from_config(c);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Config);
        CHECK(config_error_key(e.what()) == "model.params.kapa");
    }
}

TEST_CASE("synthetic wave from config")
{
    RunConfig c = parse_config("[model]\nid = \"scalar_viscous\"\n[profile]\nsynthetic = true\n");
    ModelSpec m = model_from_config(c);
    WavePoint w = wave_from_config(m, c);
    CHECK_FALSE(w.is_solution);
    CHECK(w.m() == 16);
    CHECK(w.samples(0, 0) == doctest::Approx(0.8));
}

TEST_CASE("wave JSON round trip is exact")
{
    ModelSpec m = synthetic_stable_model(2);
    WavePoint w = synthetic_stable_wave(m);
    WavePoint b = wave_from_json(json::parse(to_json(w).dump()));
    CHECK(b.samples == w.samples);
    CHECK(b.F == w.F);
    CHECK(b.X == w.X);
    CHECK(b.model_id == w.model_id);
}

TEST_CASE("numbers print with 17 significant digits")
{
    CHECK(fmt17(0.1) == "0.10000000000000001");
    CsvWriter csv({"a", "b"});
    csv.row({1.0 / 3, 2});
    CHECK(csv.str() == "a,b\n0.33333333333333331,2\n");
    CHECK(std::stod(fmt17(1.0 / 3)) == 1.0 / 3);
}

TEST_CASE("time grid")
{
    RunConfig c;
    c.t_min = 1;
    c.t_max = 100;
    c.t_count = 3;
    auto t = time_grid(c);
    CHECK(t.size() == 3);
    CHECK(t[1] == doctest::Approx(10));
}
