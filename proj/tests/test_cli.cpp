#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "grushin/cli.hpp"

using namespace grushin;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string error_of(const std::string& text) {
    try {
        config_from_pairs(parse_config_pairs(text, "cfg"));
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("config text parses with comments and defaults") {
    const ProblemConfig cfg = config_from_pairs(parse_config_pairs("# demo\ngamma = 0.5\na=0.3 \nb=0.9\nT=0.25\nnx=101\n"));
    CHECK(cfg.gamma == 0.5);
    CHECK(cfg.T == 0.25);
    CHECK(cfg.nx == 101);
    CHECK(cfg.a_prime == doctest::Approx(0.5));
    CHECK(cfg.b_prime == doctest::Approx(0.7));
}

TEST_CASE("config errors name the clause") {
    CHECK(error_of("a=0.8\nb=0.3\n").find("require a < b") != std::string::npos);
    CHECK(error_of("gamma=0\n").find("require gamma > 0") != std::string::npos);
    CHECK(error_of("foo=1\n").find("cfg:1: unknown key 'foo'") != std::string::npos);
    CHECK(error_of("nx=10\nnx=20\n").find("nx") != std::string::npos);
    CHECK(error_of("T=abc\n").find("expected a real") != std::string::npos);
    CHECK(error_of("nx=1.5\n").find("expected an integer") != std::string::npos);
}

TEST_CASE("run returns exit codes and reproduces its artifacts") {
    const auto base = std::filesystem::temp_directory_path() / "grushin_cli_test";
    std::filesystem::remove_all(base);
    std::ostringstream out, err;

    RunManifest bad;
    bad.command = "eigen";
    bad.config_path = (base / "missing.cfg").string();
    CHECK(run(bad, out, err) == 1);
    CHECK(err.str().find("error: ") == 0);

    RunManifest m;
    m.command = "eigen";
    m.overrides = {{"gamma", "1"}};
    m.n = 32;
    m.output_dir = (base / "one").string();
    CHECK(run(m, out, err) == 0);
    m.output_dir = (base / "two").string();
    CHECK(run(m, out, err) == 0);
    for (const char* name : {"eigen.json", "eigen_n32.csv"}) {
        const std::string first = slurp(base / "one" / name);
        CHECK(!first.empty());
        CHECK(first == slurp(base / "two" / name));
    }

    m.overrides = {{"a", "0.9"}, {"b", "0.2"}};
    CHECK(run(m, out, err) == 1);
    std::filesystem::remove_all(base);
}
