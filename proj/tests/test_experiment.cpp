#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "symlab/experiment.hpp"

using namespace symlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("symlab_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

ExperimentConfig parse(const std::string& text)
{
    return ExperimentConfig::from_json(nlohmann::json::parse(text));
}

} // namespace

TEST(Config, RoundTripAndDefaults)
{
    const auto c = parse(R"({"experiment": "acs_1d", "n": [50, 100], "t": [2, 4]})");
    EXPECT_EQ(c.bank, "standard");
    EXPECT_EQ(c.workers, 1);
    EXPECT_NO_THROW(c.validate());
    const auto again = ExperimentConfig::from_json(c.to_json());
    EXPECT_EQ(again.to_json(), c.to_json());
}

TEST(Config, Rejections)
{
    EXPECT_THROW(parse(R"({"experiment": "acs_1d", "n": [5], "colour": 1})"), Error);
    EXPECT_THROW(parse(R"({"n": [5]})"), Error);
    EXPECT_THROW(parse(R"({"experiment": "acs_1d", "n": "five"})"), Error);
    EXPECT_THROW(parse(R"({"experiment": "acs_1d", "n": [100, 50], "t": [2]})").validate(), Error);
    EXPECT_THROW(parse(R"({"experiment": "acs_1d", "n": [], "t": [2]})").validate(), Error);
    EXPECT_THROW(parse(R"({"experiment": "acs_1d", "n": [5], "t": [4, 2]})").validate(), Error);
    EXPECT_THROW(parse(R"({"experiment": "acs_1d", "n": [5]})").validate(), Error);
    EXPECT_THROW(parse(R"({"experiment": "conditioning", "n": [5]})").validate(), Error);
    EXPECT_THROW(parse(R"({"experiment": "acs_1d", "n": [5], "t": [2], "bank": "wavelets"})").validate(),
                 Error);
    try
    {
        parse(R"({"experiment": "toeplitz_distribution", "symbol": "fd_p1", "n": [5]})").validate();
        FAIL() << "unknown symbol accepted";
    }
    catch (const Error& e)
    {
        EXPECT_NE(std::string(e.what()).find("fd_p1_2d"), std::string::npos) << e.what();
    }
}

TEST(Config, BudgetIsEnforced)
{
    auto c = parse(R"({"experiment": "conditioning", "symbol": "fd_p1_2d", "n": [8, 16]})");
    c.out = scratch("budget").string();
    c.budget = 100;
    try
    {
        run_experiment(c);
        FAIL() << "budget not enforced";
    }
    catch (const Error& e)
    {
        EXPECT_NE(std::string(e.what()).find("budget exceeded"), std::string::npos);
    }
}

TEST(Config, UnwritableOutputDirectory)
{
    const auto blocker = scratch("blocker");
    std::ofstream(blocker) << "x";
    auto c = parse(R"({"experiment": "acs_1d", "n": [10], "t": [2]})");
    c.out = (blocker / "sub").string();
    EXPECT_THROW(run_experiment(c), Error);
    fs::remove(blocker);
}

TEST(Names, ListAndDescribe)
{
    EXPECT_EQ(catalog_names().size(), 8u);
    EXPECT_EQ(experiment_kinds().size(), 6u);
    const auto p2 = describe("p2_2d");
    EXPECT_NE(p2.find("2 levels, 4x4 blocks"), std::string::npos) << p2;
    EXPECT_THROW(describe("nonsense"), Error);
    EXPECT_EQ(suggest("q1_2").front(), "q1_2d");
    EXPECT_EQ(family_for("fd_p1_2d"), Family::fd_p1);
    EXPECT_THROW(family_for("q2_2d"), Error);
}

TEST(Run, ToeplitzSentinelAndArtifacts)
{
    auto c = parse(R"({"experiment": "toeplitz_distribution", "symbol": "p1_1d", "n": [100]})");
    c.out = scratch("toeplitz").string();
    const auto r = run_experiment(c);
    EXPECT_TRUE(r.ok());
    const auto functional = slurp(fs::path(c.out) / "p1_1d_n100_functional.csv");
    std::istringstream lines(functional);
    std::string line, sentinel;
    while (std::getline(lines, line))
        if (line.rfind("one,", 0) == 0)
            sentinel = line;
    ASSERT_FALSE(sentinel.empty());
    EXPECT_EQ(std::stod(sentinel.substr(sentinel.rfind(',') + 1)), 0.0);

    const auto manifest = nlohmann::json::parse(slurp(fs::path(c.out) / "manifest.json"));
    EXPECT_EQ(manifest["schema_version"], "1");
    EXPECT_TRUE(manifest.contains("timings"));
    EXPECT_EQ(manifest["config"]["symbol"], "p1_1d");
    EXPECT_TRUE(manifest["failures"].empty());
}

TEST(Run, AcsOneDimensionalTable)
{
    auto c = parse(R"({"experiment": "acs_1d", "n": [50], "t": [2, 4, 8], "bank": "none"})");
    c.out = scratch("acs").string();
    const auto r = run_experiment(c);
    EXPECT_TRUE(r.ok());
    std::istringstream csv(slurp(fs::path(c.out) / "acs.csv"));
    std::string header;
    std::getline(csv, header);
    EXPECT_EQ(header, "n,t,N,gap,rank_witness,norm_witness,m_fraction");
    const double lmax = 2.0 - 2.0 * std::cos(50.0 * std::numbers::pi / 51.0);
    std::string row;
    int rows = 0;
    while (std::getline(csv, row))
    {
        std::vector<double> v;
        std::stringstream ss(row);
        for (std::string cell; std::getline(ss, cell, ',');)
            v.push_back(std::stod(cell));
        EXPECT_LE(v[3], std::min(1.0, lmax / v[1]) + 1e-12);
        ++rows;
    }
    EXPECT_EQ(rows, 3);
}

TEST(Run, FailingChecksAreReported)
{
    // weak-* gaps of the Q2 stiffness family are not monotone along this sweep
    auto c = parse(R"({"experiment": "toeplitz_distribution", "symbol": "q2_1d_stiffness", "n": [10, 20, 40]})");
    c.out = scratch("q2").string();
    const auto r = run_experiment(c);
    EXPECT_FALSE(r.ok());
    EXPECT_FALSE(r.failures().empty());
    const auto checks = nlohmann::json::parse(slurp(fs::path(c.out) / "checks.json"));
    EXPECT_EQ(checks.size(), r.checks.size());
    EXPECT_TRUE(fs::exists(fs::path(c.out) / "q2_1d_n40_branches.csv"));
}

TEST(Run, WorkerCountDoesNotChangeArtifacts)
{
    auto c = parse(R"({"experiment": "gacs_2d", "symbol": "q1_2d", "n": [6, 8], "t": [2, 4]})");
    c.out = scratch("w1").string();
    const auto one = run_experiment(c);
    c.out = scratch("w3").string();
    c.workers = 3;
    const auto three = run_experiment(c);
    ASSERT_EQ(one.files, three.files);
    for (const auto& f : one.files)
        EXPECT_EQ(slurp(one.directory / f), slurp(three.directory / f)) << f;
    // rerun into the same directory reproduces the bytes
    const auto again = run_experiment(c);
    for (const auto& f : again.files)
        EXPECT_EQ(slurp(again.directory / f), slurp(one.directory / f)) << f;
}
