#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <locale>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "spdc/app.hpp"
#include "support.hpp"

using namespace spdc;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t count_lines(const std::string& text) {
    std::size_t n = 0;
    for (char c : text) n += c == '\n';
    return n;
}

// Writes a database that holds only BBO, copied from the shipped file.
std::filesystem::path single_crystal_file(const std::filesystem::path& dir) {
    const auto docs = YAML::LoadAllFromFile(SPDC_TEST_DATA);
    for (const auto& doc : docs) {
        if (doc["name"].as<std::string>() != "BBO") continue;
        const auto path = dir / "bbo_only.yaml";
        YAML::Emitter e;
        e << doc;
        std::ofstream(path) << "---\n" << e.c_str() << "\n";
        return path;
    }
    FAIL("BBO missing from the shipped data");
    return {};
}

struct DecimalComma : std::numpunct<char> {
    char do_decimal_point() const override { return ','; }
    char do_thousands_sep() const override { return '.'; }
    std::string do_grouping() const override { return "\3"; }
};

}  // namespace

TEST_CASE("exit codes by error class") {
    CHECK(run({"--help"}).code == kExitOk);
    CHECK(run({"tables", "--bogus"}).code == kExitValidation);
    CHECK(run({"--no-manifest", "tables", "--crystal", "XYZ"}).code == kExitValidation);
    CHECK(run({"--no-manifest", "tables", "--crystal", "BBO", "--condition", "gvm7"}).code == kExitValidation);
    CHECK(run({"--no-manifest", "jsa", "--crystal", "BBO", "--grid", "2"}).code == kExitValidation);
    CHECK(run({"--no-manifest", "hom", "--input", "/nonexistent/jsa.csv"}).code == kExitIo);
    CHECK(run({"--data", "/nonexistent/crystals.yaml", "--no-manifest", "crystals", "list"}).code == kExitIo);

    const auto unsolved = run({"--no-manifest", "jsa", "--crystal", "LBO", "--plane", "xz", "--condition", "gvm1"});
    CHECK(unsolved.code == kExitNoSolution);
    CHECK(unsolved.err.find("not satisfied") != std::string::npos);

    const auto unknown = run({"--no-manifest", "tables", "--crystal", "XYZ"});
    CHECK(unknown.err.find("XYZ") != std::string::npos);
}

TEST_CASE("tables report unsatisfied rows without failing") {
    const auto r = run({"--no-manifest", "tables", "--crystal", "LBO", "--plane", "xz", "--format", "csv"});
    REQUIRE(r.code == kExitOk);
    CHECK(count_lines(r.out) == 4);
    CHECK(r.out.find("LBO,xz,GVM1,,,NOT_SATISFIED") != std::string::npos);
    CHECK(r.out.find("LBO,xz,GVM3,,,OK") != std::string::npos);

    const auto bbo = run({"--no-manifest", "tables", "--crystal", "BBO", "--format", "csv"});
    REQUIRE(bbo.code == kExitOk);
    CHECK(count_lines(bbo.out) == 4);
    CHECK(bbo.out.find("NOT_SATISFIED") == std::string::npos);
}

TEST_CASE("crystal data from the flag and from the environment") {
    const auto dir = test::temp_dir("cli-data");
    const auto file = single_crystal_file(dir);

    const auto by_flag = run({"--data", file.string(), "--no-manifest", "crystals", "list", "--format", "csv"});
    REQUIRE(by_flag.code == kExitOk);
    CHECK(count_lines(by_flag.out) == 2);
    CHECK(by_flag.out.find("BBO,uniaxial") != std::string::npos);

    ::setenv("SPDC_CRYSTAL_DATA", file.c_str(), 1);
    const auto by_env = run({"--no-manifest", "crystals", "list", "--format", "csv"});
    const auto missing = run({"--no-manifest", "tables", "--crystal", "LBO"});
    ::unsetenv("SPDC_CRYSTAL_DATA");
    CHECK(by_env.code == kExitOk);
    CHECK(by_env.out == by_flag.out);
    CHECK(missing.code == kExitValidation);

    const auto full = run({"--no-manifest", "crystals", "list", "--format", "csv"});
    CHECK(count_lines(full.out) == 15);
}

TEST_CASE("identical inputs give byte-identical outputs and replayable manifests") {
    const auto dir = test::temp_dir("cli-replay");
    const auto a = dir / "a.csv";
    const auto b = dir / "b.csv";
    const std::vector<std::string> base = {"jsa", "--crystal", "BBO", "--condition", "gvm3", "--grid", "65"};
    auto with_out = [&](const std::filesystem::path& p) {
        auto args = base;
        args.insert(args.end(), {"--out", p.string(), "--report", p.string() + ".report.yaml"});
        return args;
    };
    REQUIRE(run(with_out(a)).code == kExitOk);
    REQUIRE(run(with_out(b)).code == kExitOk);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a.string() + ".report.yaml") == slurp(b.string() + ".report.yaml"));

    const auto manifest = a.string() + ".manifest.yaml";
    REQUIRE(std::filesystem::exists(manifest));
    const auto m = YAML::LoadFile(manifest);
    CHECK(m["command"][0].as<std::string>() == "jsa");
    CHECK(m["engine_version"]);
    CHECK(m["crystal_data"]["sha256"].as<std::string>().size() == 64);
    CHECK(m["outputs"].size() == 2);

    const auto replay = run({"manifest", "replay", manifest});
    CHECK(replay.code == kExitOk);

    // A curve built from the JSA file replays as well.
    const auto curve = dir / "hom.csv";
    REQUIRE(run({"hom", "--input", a.string(), "--out", curve.string()}).code == kExitOk);
    CHECK(run({"manifest", "replay", curve.string() + ".manifest.yaml"}).code == kExitOk);

    // A recorded hash that no longer matches is reported as a mismatch.
    const auto tampered = dir / "tampered.manifest.yaml";
    {
        YAML::Node t = YAML::LoadFile(manifest);
        t["outputs"][0]["sha256"] = std::string(64, '0');
        YAML::Emitter e;
        e << t;
        std::ofstream(tampered) << e.c_str() << "\n";
    }
    CHECK(run({"manifest", "replay", tampered.string()}).code == kExitValidation);
}

TEST_CASE("config file values are overridden by flags") {
    const auto dir = test::temp_dir("cli-config");
    const auto cfg = dir / "run.yaml";
    std::ofstream(cfg) << "crystal: BBO\ncondition: gvm3\ngrid: 65\nlength_mm: 10\nbandwidth_nm: 1.5\n";

    const auto from_cfg = run({"--no-manifest", "jsa", "--config", cfg.string()});
    REQUIRE(from_cfg.code == kExitOk);
    const auto explicit_args = run({"--no-manifest", "jsa", "--crystal", "BBO", "--condition", "gvm3", "--grid", "65",
                                    "--length-mm", "10", "--bandwidth-nm", "1.5"});
    CHECK(from_cfg.out == explicit_args.out);

    const auto overridden = run({"--no-manifest", "jsa", "--config", cfg.string(), "--bandwidth-nm", "2.5"});
    const auto explicit_override = run({"--no-manifest", "jsa", "--crystal", "BBO", "--condition", "gvm3", "--grid", "65",
                                        "--length-mm", "10", "--bandwidth-nm", "2.5"});
    REQUIRE(overridden.code == kExitOk);
    CHECK(overridden.out == explicit_override.out);
    CHECK(overridden.out != from_cfg.out);

    std::ofstream(dir / "bad.yaml") << "crystal: [unclosed\n";
    CHECK(run({"--no-manifest", "jsa", "--config", (dir / "bad.yaml").string()}).code == kExitValidation);
}

TEST_CASE("output does not depend on the global locale") {
    const std::vector<std::string> args = {"--no-manifest", "tables", "--crystal", "BBO", "--step-nm", "1.0", "--format", "csv"};
    const auto classic = run(args);
    const std::locale saved = std::locale::global(std::locale(std::locale::classic(), new DecimalComma));
    const auto comma = run(args);
    std::locale::global(saved);
    REQUIRE(classic.code == kExitOk);
    CHECK(comma.code == kExitOk);
    CHECK(comma.out == classic.out);
}

TEST_CASE("config files reject unknown keys") {
    const auto dir = test::temp_dir("cli-config-keys");
    std::ofstream(dir / "typo.yaml") << "crystal: BBO\nlenght_mm: 10\n";
    const auto r = run({"--no-manifest", "jsa", "--config", (dir / "typo.yaml").string()});
    CHECK(r.code == kExitValidation);
    CHECK(r.err.find("lenght_mm") != std::string::npos);
}

TEST_CASE("shipped example configs run") {
    const std::filesystem::path configs = SPDC_SOURCE_DIR "/configs";
    int seen = 0;
    for (const auto& entry : std::filesystem::directory_iterator(configs)) {
        const auto text = slurp(entry.path());
        const std::string command = text.find("fixed_idler_nm") != std::string::npos ? "tables" : "jsa";
        std::vector<std::string> args = {"--no-manifest", command, "--config", entry.path().string()};
        if (command == "jsa") args.insert(args.end(), {"--grid", "101"});
        const auto r = run(args);
        CHECK_MESSAGE(r.code == kExitOk, entry.path().filename().string() << ": " << r.err);
        ++seen;
    }
    CHECK(seen >= 3);
}
