/**
 * @file simulate.cpp
 * @brief Command-line front end: run a preset or a JSON scenario and write
 *        CSV or plot-data files.
 *
 * Exit codes: 0 success, 1 usage error, 2 invalid parameter, 3 numerical
 * failure, 4 I/O failure.
 */

#include "fbmc/harness.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <iostream>
#include <optional>

int main(int argc, char** argv)
{
    CLI::App app{"FBMC-OQAM massive MIMO uplink simulation lab"};
    std::string preset_name;
    std::string config_path;
    std::string out_dir = "out";
    std::string format = "csv";
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    int threads = 1;
    bool list = false;
    bool print_config = false;

    auto* p = app.add_option("--preset", preset_name, "Preset experiment (see --list)");
    auto* c = app.add_option("--config", config_path, "JSON scenario file");
    p->excludes(c);
    app.add_option("--seed", seed, "Root random seed (overrides the scenario)");
    app.add_option("--trials", trials, "Monte Carlo trials per point (overrides the scenario)")
        ->check(CLI::PositiveNumber);
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--format", format, "Output format: csv or plotdata")->check(CLI::IsMember({"csv", "plotdata"}));
    app.add_option("--threads", threads, "Worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
    app.add_flag("--list", list, "List the presets and exit");
    app.add_flag("--print-config", print_config, "Print the resolved scenario as JSON and exit");
    CLI11_PARSE(app, argc, argv);

    try {
        if (list) {
            for (const auto& n : fbmc::preset_names()) std::cout << n << "\n";
            return 0;
        }
        if (preset_name.empty() && config_path.empty()) {
            std::cerr << "error: one of --preset or --config is required\n";
            return 1;
        }
        fbmc::Scenario s = preset_name.empty() ? fbmc::load_scenario(config_path) : fbmc::preset(preset_name);
        if (seed) s.seed = *seed;
        if (trials) s.trials = *trials;
        s.threads = threads;
        s.validate();
        if (print_config) {
            std::cout << fbmc::scenario_to_json(s) << "\n";
            return 0;
        }
        const auto fmt = fbmc::parse_format(format);
        for (const auto& part : fbmc::expand_series(s)) {
            const auto t0 = std::chrono::steady_clock::now();
            const auto rows = fbmc::run_scenario(part);
            const auto paths = fbmc::emit(rows, part, fmt, out_dir);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            for (const auto& path : paths) std::cout << path << "\n";
            std::cerr << part.name << (part.series_label.empty() ? "" : " [" + part.series_label + "]") << ": "
                      << rows.size() << " rows in " << secs << " s\n";
        }
        return 0;
    } catch (const fbmc::InvalidParameter& e) {
        std::cerr << "invalid parameter: " << e.what() << "\n";
        return 2;
    } catch (const fbmc::NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const fbmc::IoError& e) {
        std::cerr << "I/O failure: " << e.what() << "\n";
        return 4;
    }
}
