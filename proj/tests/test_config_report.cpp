#include <doctest.h>

#include <cstdlib>
#include <stdexcept>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "fito/config.hpp"
#include "fito/kernels.hpp"
#include "fito/noise_grid.hpp"
#include "fito/report.hpp"
#include "fito/table_cache.hpp"

using namespace fito;
namespace fs = std::filesystem;

TEST_CASE("key-value parsing with comments and overrides") {
    auto kv = KeyValueConfig::parse("# settings\nhurst = 0.75\neps-ladder = 0.2, 0.1 # trailing\nprocess=rosenblatt\n");
    CHECK(kv.get_double("hurst", 0) == 0.75);
    CHECK(kv.get_string("process", "") == "rosenblatt");
    CHECK(kv.get_doubles("eps_ladder", {}) == std::vector<double>{0.2, 0.1});
    CHECK(kv.get_int("replicates", 17) == 17);
    kv.set("hurst", "0.8");
    CHECK(kv.get_double("hurst", 0) == 0.8);
    kv.set("replicates", "many");
    CHECK_THROWS_AS(kv.get_int("replicates", 0), std::invalid_argument);
    CHECK_THROWS(KeyValueConfig::parse("no equals sign here"));
}

TEST_CASE("manifest hash ignores timestamps and outputs") {
    RunManifest a, b;
    a.command = b.command = "simulate";
    a.settings = b.settings = KeyValueConfig::parse("seed = 42");
    a.started = "2020-01-01T00:00:00Z";
    b.started = "2030-01-01T00:00:00Z";
    b.outputs = {"x.csv"};
    CHECK(a.hash() == b.hash());
    CHECK(a.hash().size() == 16);
    b.settings.set("seed", "43");
    CHECK(a.hash() != b.hash());
    const auto j = nlohmann::json::parse(a.to_json());
    CHECK(j["manifest"] == a.hash());
    CHECK(hash_hex("") == "cbf29ce484222325");  // FNV-1a 64 offset basis
}

TEST_CASE("output directory precedence") {
    CHECK(default_output_dir("given") == fs::path("given"));
    setenv("FITO_OUT", "/tmp/from-env", 1);
    CHECK(default_output_dir() == fs::path("/tmp/from-env"));
    unsetenv("FITO_OUT");
    CHECK(default_output_dir() == fs::path("fito-out"));
}

TEST_CASE("17-digit formatting round-trips") {
    for (double x : {0.1, 1.0 / 3.0, 2.06706889084954, -1e-300, 6.02214076e23})
        CHECK(std::stod(fmt17(x)) == x);
}

TEST_CASE("CSV quoting") {
    CsvTable t({"a", "b"});
    t.row({"plain", "with,comma"}).row({"with \"quote\"", ""});
    CHECK(t.str() == "a,b\nplain,\"with,comma\"\n\"with \"\"quote\"\"\",\n");
    CHECK_THROWS(t.row({"only one"}));
}

TEST_CASE("kernel table cache round-trips bit for bit") {
    const fs::path dir = fs::temp_directory_path() / "fito-cache-test";
    fs::remove_all(dir);
    const NoiseGrid g = make_graded_grid(-1.0, 1.2, 22, -50.0, 1.5);
    const TimeMesh m = make_time_mesh(g, 1.2);
    TableCache cache(dir);
    const auto a = cache.rosenblatt(0.7, g, m);
    CHECK(!fs::is_empty(dir));
    const auto b = cache.rosenblatt(0.7, g, m);  // read back
    CHECK(a->v == b->v);
    CHECK(a->node_w == b->node_w);
    CHECK(a->piece_begin == b->piece_begin);
    const auto fa = cache.fbm(0.7, g, m), fb = cache.fbm(0.7, g, m);
    CHECK(fa->c == fb->c);
    const auto other = cache.rosenblatt(0.75, g, m);  // different H, separate file
    CHECK(other->H == 0.75);
    // a corrupted file is rebuilt, not trusted
    for (const auto& e : fs::directory_iterator(dir)) {
        std::ofstream os(e.path(), std::ios::binary | std::ios::trunc);
        os << "garbage";
    }
    const auto c = cache.rosenblatt(0.7, g, m);
    CHECK(c->v == a->v);
    fs::remove_all(dir);
    TableCache off;
    CHECK(off.fbm(0.7, g, m)->c == fa->c);
}
