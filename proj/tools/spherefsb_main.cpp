// Command-line front end.
//
//   spherefsb run <config>                full pipeline, artifacts on disk
//   spherefsb melnikov <config> --grid N  drift integral as CSV on stdout
//   spherefsb version                     tool name and version
//
// Exit codes: 0 full success, 2 partial success (some branches failed and
// were recorded in the report), 1 configuration or usage error.
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "spherefsb/config.hpp"
#include "spherefsb/runner.hpp"
#include "spherefsb/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"forced-symmetry-breaking analysis of rotating waves on the sphere"};
    app.require_subcommand(1);

    std::string run_config;
    CLI::App* run = app.add_subcommand("run", "run the full scenario pipeline");
    run->add_option("config", run_config, "scenario configuration file")->required();

    std::string mel_config;
    int grid_n = 0;
    CLI::App* mel =
        app.add_subcommand("melnikov", "print the colatitude drift integral as CSV");
    mel->add_option("config", mel_config, "scenario configuration file")->required();
    mel->add_option("--grid", grid_n, "number of interior colatitude grid points")
        ->required();

    CLI::App* ver = app.add_subcommand("version", "print tool name and version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e); // prints the usage diagnostic
        return 1;    // usage problems share the config-error exit code
    }

    try {
        if (ver->parsed()) {
            std::cout << spherefsb::kToolName << " " << spherefsb::kToolVersion << "\n";
            return 0;
        }
        if (run->parsed()) {
            const spherefsb::ScenarioConfig cfg = spherefsb::load_config(run_config);
            const spherefsb::RunOutcome out = spherefsb::run_scenario(cfg);
            std::cout << "wrote " << out.report_path;
            if (out.recorded_errors > 0) {
                std::cout << " (" << out.recorded_errors << " recorded errors)";
            }
            std::cout << "\n";
            return out.exit_code;
        }
        const spherefsb::ScenarioConfig cfg = spherefsb::load_config(mel_config);
        std::cout << spherefsb::melnikov_grid_csv(cfg, grid_n);
        return 0;
    } catch (const spherefsb::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const spherefsb::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
