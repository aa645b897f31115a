#include "gapopen/config_io.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace gapopen;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), {}};
}

const char* kMinimal = R"(lattice: {a1: 1.0, a2: 1.0}
wall: {shape: trapezoid, a3: 0.25, c0: 1.0}
alpha: 0.4
epsilons: [0.1, 0.07, 0.05, 0.035]
)";

} // namespace

TEST(ParseConfig, ReferenceScenarioFile) {
    const auto rc = load_config(std::string(GAPOPEN_SCENARIO_DIR) + "/s1.yaml");
    EXPECT_DOUBLE_EQ(rc.op.lattice.a1, 1.0);
    EXPECT_DOUBLE_EQ(rc.op.alpha, 0.4);
    ASSERT_EQ(rc.op.epsilons.size(), 4u);
    EXPECT_DOUBLE_EQ(rc.op.epsilons.back(), 0.035);
    ASSERT_EQ(rc.op.coeffs.a0.terms.size(), 1u);
    EXPECT_DOUBLE_EQ(rc.op.coeffs.a0.terms[0].center2, 0.3);
    EXPECT_EQ(rc.op.coeffs.a0.terms[0].k1, 1);
    EXPECT_TRUE(rc.op.coeffs.a11.terms.empty());
    EXPECT_EQ(rc.predictor_nodes, 1024);
    EXPECT_EQ(rc.grid_G1, 48);
    EXPECT_EQ(rc.op.coefficient_resolution, 4096);
    EXPECT_NO_THROW(validate_config(rc.op));
}

TEST(ParseConfig, DefaultsAndOptionalSections) {
    const auto rc = parse_config(kMinimal);
    EXPECT_EQ(rc.cutoff_N, 16);
    EXPECT_EQ(rc.cutoff_Q, 0);
    EXPECT_FALSE(rc.window_C2.has_value());
    EXPECT_EQ(rc.predictor_nodes, 512);
    EXPECT_DOUBLE_EQ(rc.op.wall.a3, 0.25);
    EXPECT_EQ(rc.source_text, kMinimal);
    const auto w = parse_config(std::string(kMinimal) + "window: {C2: 7.5}\ncutoffs: {Q: 300, Ecut: 200}\n");
    EXPECT_DOUBLE_EQ(*w.window_C2, 7.5);
    EXPECT_EQ(w.cutoff_Q, 300);
    EXPECT_DOUBLE_EQ(w.mode_energy_cutoff, 200.0);
}

TEST(ParseConfig, ErrorsCarryLocations) {
    try {
        parse_config("lattice: {a1: 1.0, a2: [1.0\nwall: x\n");
        FAIL() << "expected ConfigParseError";
    } catch (const ConfigParseError& e) {
        EXPECT_NE(std::string(e.what()).find("line"), std::string::npos);
    }
    try {
        parse_config("lattice: {a1: 1.0}\n");
        FAIL() << "expected ConfigParseError";
    } catch (const ConfigParseError& e) {
        EXPECT_NE(std::string(e.what()).find("lattice.a2"), std::string::npos);
    }
    const std::string bad_shape = std::string(kMinimal).replace(std::string(kMinimal).find("trapezoid"), 9, "hexagon");
    EXPECT_THROW(parse_config(bad_shape), ConfigParseError);
    EXPECT_THROW(parse_config(std::string(kMinimal) + "coeffs: {A0: [{kind: spiral}]}\n"), ConfigParseError);
    EXPECT_THROW(parse_config(std::string(kMinimal) + "coeffs: {A0: [{kind: table, n1: 2, n2: 2, values: [1, 2, 3]}]}\n"),
                 ConfigParseError);
    EXPECT_THROW(parse_config("alpha: [1, 2"), ConfigParseError);
    EXPECT_THROW(load_config("/nonexistent/config.yaml"), MissingFile);
}

TEST(Hash, KnownDigest) {
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Format, RoundTrips) {
    for (double v : {pi, -1.0 / 3.0, 1e-300, 65.0 * pi * pi / 16.0, 0.0}) EXPECT_EQ(std::stod(fmt(v)), v);
    EXPECT_EQ(fmt(0.5), "0.5");
}

TEST(CsvWriter, PreambleHeaderAndRows) {
    const auto path = std::filesystem::temp_directory_path() / "gapopen_csv_test.csv";
    {
        CsvWriter w(path, {"eps", "k", "ok", "name"}, {{"config_hash", "abc"}, {"subcommand", "test"}});
        w.row(0.25, 3, true, std::string("x"));
        w.row(0.1, -1, false, "y");
    }
    EXPECT_EQ(slurp(path), "# config_hash: abc\n# subcommand: test\neps,k,ok,name\n0.25,3,1,x\n"
                           "0.10000000000000001,-1,0,y\n");
    std::filesystem::remove(path);
    EXPECT_THROW(CsvWriter("/nonexistent/dir/out.csv", {"a"}, {}), MissingFile);
}
