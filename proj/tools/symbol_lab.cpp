#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "symlab/experiment.hpp"

namespace {

int list(const std::string& what)
{
    if (what == "symbols")
    {
        for (const auto& name : symlab::catalog_names())
            std::cout << symlab::describe(name) << '\n';
        return 0;
    }
    if (what == "experiments")
    {
        for (const auto& k : symlab::experiment_kinds())
            std::cout << k.name << ": " << k.doc << '\n';
        return 0;
    }
    std::cout << "standard: hats centred at 0, 1, ..., ceil(max f) with half-width 1, plus the constant one\n"
              << "none: no weak-* functionals\n";
    return 0;
}

int run(const std::string& path, const std::optional<std::string>& out,
        const std::optional<int>& workers, const std::optional<std::int64_t>& budget)
{
    std::ifstream is(path);
    if (!is)
        throw symlab::Error("cannot read config '" + path + "'");
    nlohmann::json j;
    try
    {
        j = nlohmann::json::parse(is);
    }
    catch (const nlohmann::json::parse_error& e)
    {
        throw symlab::Error("config '" + path + "': " + e.what());
    }
    auto cfg = symlab::ExperimentConfig::from_json(j);
    if (out)
        cfg.out = *out;
    if (workers)
        cfg.workers = *workers;
    if (budget)
        cfg.budget = *budget;

    const auto result = symlab::run_experiment(cfg);
    for (const auto& c : result.checks)
        std::cout << (c.passed ? "ok   " : "FAIL ") << c.name << (c.detail.empty() ? "" : "  [" + c.detail + "]")
                  << '\n';
    std::cout << "wrote " << result.files.size() + 1 << " files to " << result.directory.string() << '\n';
    if (!result.ok())
    {
        std::cerr << result.failures().dump() << '\n';
        return 2;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spectral symbols of structured matrix-sequences"};
    app.name("symbol-lab");
    app.require_subcommand(1);

    std::optional<std::string> out;
    std::optional<int> workers;
    std::optional<std::int64_t> budget;
    app.add_option("--out", out, "output directory (overrides the config)");
    app.add_option("--workers", workers, "parallel jobs")->check(CLI::PositiveNumber);
    app.add_option("--budget", budget, "largest matrix dimension allowed")->check(CLI::PositiveNumber);

    std::string config;
    auto* run_cmd = app.add_subcommand("run", "run an experiment described by a JSON config");
    run_cmd->add_option("config", config, "config file")->required();
    run_cmd->fallthrough();

    std::string what;
    auto* list_cmd = app.add_subcommand("list", "list symbols, experiments or banks");
    list_cmd->add_option("what", what)->required()->check(CLI::IsMember({"symbols", "experiments", "banks"}));

    std::string name;
    auto* describe_cmd = app.add_subcommand("describe", "describe a symbol or experiment kind");
    describe_cmd->add_option("name", name)->required();

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*run_cmd)
            return run(config, out, workers, budget);
        if (*list_cmd)
            return list(what);
        std::cout << symlab::describe(name) << '\n';
        return 0;
    }
    catch (const std::exception& e)
    {
        std::cerr << "symbol-lab: " << e.what() << '\n';
        return 1;
    }
}
