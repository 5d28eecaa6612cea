#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "heatpath/error.hpp"
#include "heatpath/harness.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace heatpath;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const char* name) {
    const fs::path dir = fs::temp_directory_path() / (std::string("heatpath_unit_") + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("config round trip") {
    RunConfig cfg = default_config();
    set_config_value(cfg, "geometry", "disk(2)");
    set_config_value(cfg, "grid", "0,0;0.5,-0.25");
    set_config_value(cfg, "partitions", "1,3");
    set_config_value(cfg, "seed", "18446744073709551615");
    set_config_value(cfg, "t", "0.1");
    const RunConfig back = parse_config(serialize_config(cfg));
    CHECK(back == cfg);
    CHECK(get_config_value(back, "grid") == "0,0;0.5,-0.25");
    CHECK(get_config_value(back, "t") == "0.1");
}

TEST_CASE("config parsing is strict") {
    CHECK_THROWS_AS(parse_config("bogus = 1\n"), Error);
    CHECK_THROWS_AS(parse_config("seed = 1\nseed = 2\n"), Error);
    CHECK_THROWS_AS(parse_config("seed 1\n"), Error);
    CHECK_THROWS_AS(parse_config("samples = many\n"), Error);
    const RunConfig c = parse_config("# comment\n\nsamples = 10  \n");
    CHECK(c.samples == 10);
    try {
        parse_config("bogus = 1\n");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::validation);
    }
}

TEST_CASE("hash ignores workers and output location") {
    RunConfig a = default_config();
    RunConfig b = a;
    b.workers = 8;
    b.out = "/elsewhere";
    b.format = "jsonl";
    CHECK(config_hash(a) == config_hash(b));
    b.seed = 2;
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("validation rejects unusable configs") {
    RunConfig c = default_config();
    c.t = 0.0;
    CHECK_THROWS_AS(validate_config(c), Error);
    c = default_config();
    c.partitions = {2, 1};
    CHECK_THROWS_AS(validate_config(c), Error);
    c = default_config();
    c.grid = {{-1.0}};
    CHECK_THROWS_AS(build_problem(c), Error);
    c = default_config();
    c.potential = parse_descriptor("constant(2)");
    c.alpha = 1.0;
    CHECK_THROWS_AS(build_problem(c), Error);
}

TEST_CASE("empty grid writes only a header") {
    const fs::path dir = scratch("empty");
    emit_estimates({}, 1, false, (dir / "e.csv").string(), OutputFormat::csv);
    const std::string text = read_file(dir / "e.csv");
    CHECK(text.find('\n') == text.size() - 1);
    CHECK(text.rfind("x,", 0) == 0);
    fs::remove_all(dir);
}

TEST_CASE("convergence run on the flat interval") {
    RunConfig c = default_config();
    c.samples = 20000;
    c.partitions = {1, 2};
    c.grid = {{1.0}, {2.0}};
    const ConvergenceReport r = run_convergence(c);
    REQUIRE(r.rows.size() == 4);
    for (const ReportRow& row : r.rows) CHECK(row_error(row) <= 5 * row_stderr(row));

    const fs::path dir = scratch("converge");
    c.out = dir.string();
    const auto files = emit_report(r, c.out, OutputFormat::csv);
    CHECK(fs::exists(dir / "convergence.csv"));
    CHECK(fs::exists(dir / "convergence.meta.json"));
    CHECK(read_file(dir / "convergence.meta.json").find("\"workers\"") == std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("trace of one reflected path") {
    RunConfig c = default_config();
    c.trace_start = {1.0};
    c.trace_velocity = {3.0};
    c.t = 1.0;
    c.trace_samples = 11;
    const TraceResult tr = run_trace(c);
    CHECK(tr.reflections == 1);
    CHECK(tr.rows.size() >= 11);
}
