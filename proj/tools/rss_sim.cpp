// rss_sim: run scenario files, reproduce figure presets, run the self test.

#include "rss/checks.hpp"
#include "rss/figures.hpp"
#include "rss/harness.hpp"
#include "rss/report.hpp"
#include "rss/scenario_io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;

namespace {

rss::RunOptions run_options(bool timing, bool quiet)
{
    rss::RunOptions o;
    o.record_timing = timing;
    if (!quiet)
        o.progress = [](std::size_t done, std::size_t total) {
            std::fprintf(stderr, "\r%zu/%zu trials", done, total);
            if (done == total) std::fprintf(stderr, "\n");
        };
    return o;
}

void write_outputs(const std::vector<rss::ResultRow>& rows, const fs::path& dir, const std::string& stem, const std::string& title)
{
    fs::create_directories(dir);
    const auto csv = dir / (stem + ".csv");
    const auto svg = dir / (stem + ".svg");
    rss::emit_csv(rows, csv.string());
    rss::emit_plot(rows, svg.string(), title);
    std::cout << "wrote " << csv.string() << " and " << svg.string() << "\n";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"RSS-assisted OFDM link simulator"};
    app.require_subcommand(1);

    std::string scenario, out_dir = "results";
    std::optional<std::size_t> trials;
    std::optional<std::uint64_t> seed;
    bool desk = false, timing = false, quiet = false;
    int figure = 0;

    auto* run = app.add_subcommand("run", "Run a scenario file and write CSV and SVG");
    run->add_option("scenario", scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--trials", trials, "Override the trial count");
    run->add_option("--seed", seed, "Override the seed");
    run->add_flag("--desk-scale", desk, "Shrink to N=64, K=64, G=8, 100 trials");
    run->add_flag("--timing", timing, "Record wall-clock per trial (makes the CSV nondeterministic)");
    run->add_flag("--quiet", quiet, "No progress output");

    auto* fig = app.add_subcommand("figure", "Reproduce a figure preset");
    fig->add_option("number", figure, "Figure number")->required()->check(CLI::Range(1, 6));
    fig->add_option("--out", out_dir, "Output directory");
    fig->add_option("--trials", trials, "Override the trial count");
    fig->add_flag("--desk-scale", desk, "Shrink to N=64, K=64, G=8, 100 trials");
    fig->add_flag("--timing", timing, "Record wall-clock per trial");
    fig->add_flag("--quiet", quiet, "No progress output");

    auto* self = app.add_subcommand("selftest", "Run the oracle and invariant checks");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*run)
        {
            auto spec = rss::load_scenario_file(scenario);
            if (desk) rss::apply_desk_scale(spec);
            if (trials) spec.base.trials = *trials;
            if (seed) spec.base.seed = *seed;
            rss::validate_scenario([&] {
                auto c = spec.base;
                c.ofdm.P = 1.0;
                return c;
            }());
            const auto rows = rss::run_experiment(spec, run_options(timing, quiet));
            write_outputs(rows, out_dir, fs::path(scenario).stem().string(), fs::path(scenario).stem().string());
        }
        else if (*fig)
        {
            auto plan = rss::figure_plan(figure, desk);
            if (trials)
                for (auto& s : plan.sweeps) s.base.trials = *trials;
            const auto rows = rss::run_figure(plan, run_options(timing, quiet));
            write_outputs(rows, out_dir, "figure" + std::to_string(figure), plan.title);
        }
        else if (*self)
        {
            bool ok = true;
            for (const auto& r : rss::checks::run_fast_checks())
            {
                std::printf("%s  %s: %s [%.3f s]\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str(), r.seconds);
                ok = ok && r.passed;
            }
            return ok ? 0 : 1;
        }
    }
    catch (const std::exception& e)
    {
        std::cerr << "rss_sim: error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
