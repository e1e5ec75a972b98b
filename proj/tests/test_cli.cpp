#include "perigraph/io.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace perigraph;

namespace fs = std::filesystem;

namespace {

const fs::path kSpecs = PERIGRAPH_DEMO_SPECS;

int run(const std::string& args) {
    const std::string cmd = std::string(PERIGRAPH_CLI) + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "perigraph_cli_test";
    fs::create_directories(dir);
    return dir / name;
}

std::string spec(const std::string& name) { return (kSpecs / name).string(); }

}  // namespace

TEST(Cli, ValidateAcceptsTheLineGraph) { EXPECT_EQ(run("validate " + spec("line.json")), 0); }

TEST(Cli, ValidateRejectsBrokenGraphs) {
    auto j = read_json_file(kSpecs / "line.json");
    j["edges"].push_back({{"id", 1}, {"start", 0}, {"end", 0}});
    const auto path = scratch("loop.json");
    std::ofstream(path) << j.dump();
    EXPECT_EQ(run("validate " + path.string()), 1);
    EXPECT_EQ(run("validate " + scratch("missing.json").string()), 1);
}

TEST(Cli, DegenerateSioIsNotFredholmWithWitness) {
    const auto out = scratch("degenerate.json");
    EXPECT_EQ(run("check-fredholm " + spec("sio_degenerate.json") + " --json-out " + out.string()), 2);
    const auto report = report_from_json(read_json_file(out));
    EXPECT_EQ(report.verdict, Verdict::NotFredholm);
    ASSERT_TRUE(report.edge.witness.has_value());
    EXPECT_EQ(report.edge.witness->kind, "edge");
    EXPECT_FALSE(read_json_file(out).at("witnesses").empty());
}

TEST(Cli, FredholmVerdictsExitZero) {
    EXPECT_EQ(run("check-fredholm " + spec("identity.json") + " --json-out " + scratch("id.json").string()), 0);
    EXPECT_EQ(run("check-fredholm " + spec("convolution_shifted.json") + " --json-out " + scratch("c.json").string()), 0);
}

TEST(Cli, RaisedThresholdGivesInconclusive) {
    EXPECT_EQ(run("check-fredholm " + spec("convolution_shifted.json") + " --inv-tol 5 --json-out " +
                  scratch("c5.json").string()),
              3);
}

TEST(Cli, GaussianSpectrumCsvMatchesTheFourierRange) {
    const auto csv = scratch("gauss.csv");
    ASSERT_EQ(run("ess-spectrum " + spec("gaussian_convolution.json") + " --tau-grid 256 --csv-out " + csv.string()), 0);
    std::ifstream in(csv);
    const auto cloud = read_spectrum_csv(in);
    ASSERT_FALSE(cloud.empty());
    const double top = std::sqrt(std::numbers::pi);
    const double d = hausdorff_to_set(
        cloud, [top](cplx z) { return std::abs(z - cplx(std::clamp(z.real(), 0.0, top), 0.0)); },
        segment_samples(0.0, top, 2001));
    EXPECT_LE(d, 1e-2);
}

TEST(Cli, FiniteSectionOracleWritesEigenvalues) {
    const auto csv = scratch("section.csv");
    ASSERT_EQ(run("oracle finite-section " + spec("gaussian_convolution.json") + " --radius 5 --csv-out " + csv.string()), 0);
    std::ifstream in(csv);
    EXPECT_EQ(read_spectrum_csv(in).size(), 11u * 32u);
}

TEST(Cli, SymbolScansWriteCsv) {
    const auto edge = scratch("edge.csv"), vertex = scratch("vertex.csv");
    EXPECT_EQ(run("symbol edge " + spec("sio_periodic.json") + " --grid 8 --csv-out " + edge.string()), 0);
    EXPECT_EQ(run("symbol vertex " + spec("sio_periodic.json") + " --grid 11 --r-points 3 --csv-out " + vertex.string()), 0);
    std::ifstream e(edge), v(vertex);
    std::string line;
    int rows = 0;
    while (std::getline(v, line)) ++rows;
    EXPECT_EQ(rows, 1 + 3 * 11);
    EXPECT_EQ(run("symbol edge " + spec("convolution_shifted.json")), 1);
}

TEST(Cli, UsageErrorsExitOne) {
    EXPECT_EQ(run(""), 1);
    EXPECT_EQ(run("frobnicate"), 1);
    EXPECT_EQ(run("oracle finite-section " + spec("identity.json")), 1);  // --radius is required
    EXPECT_EQ(run("--help >/dev/null"), 0);
}
