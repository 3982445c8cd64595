#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <string>

#include "app.hpp"
#include "rainfreq/version.hpp"

using rainfreq::cli::RunConfig;

namespace {

struct CommonFlags {
    std::string config;
    std::string model;
    std::string seed;
    std::string out;
    std::string fold;
    std::string grid_res;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config, "key=value run configuration file");
    cmd->add_option("--model", f.model, "model family: pooled|nonpooled|svc");
    cmd->add_option("--seed", f.seed, "RNG seed (overrides config)");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--fold", f.fold, "spatial CV fold id (0 = all five)");
    cmd->add_option("--grid-res", f.grid_res, "grid spacing in degrees");
}

RunConfig build_config(const CommonFlags& f) {
    RunConfig cfg = f.config.empty() ? RunConfig() : RunConfig::from_file(f.config);
    if (!f.model.empty()) cfg.set("model", f.model);
    if (!f.seed.empty()) cfg.set("seed", f.seed);
    if (!f.out.empty()) cfg.set("out", f.out);
    if (!f.fold.empty()) cfg.set("fold", f.fold);
    if (!f.grid_res.empty()) cfg.set("grid_res", f.grid_res);
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"rainfreq: nonstationary extreme-precipitation frequency analysis"};
    app.set_version_flag("--version", RAINFREQ_VERSION);
    app.require_subcommand(1);

    struct Sub {
        const char* name;
        const char* help;
        int (*run)(const RunConfig&);
        CommonFlags flags;
    };
    Sub subs[] = {
        {"ingest", "convert archives and build AMS / CO2 inputs", rainfreq::cli::cmd_ingest, {}},
        {"fit", "MAP-initialized MCMC fit; writes a bundle", rainfreq::cli::cmd_fit, {}},
        {"predict", "return levels at stations, a grid, or listed points",
         rainfreq::cli::cmd_predict, {}},
        {"validate", "cross-validated score table", rainfreq::cli::cmd_validate, {}},
        {"timeseries", "projected return-level series per location",
         rainfreq::cli::cmd_timeseries, {}},
        {"compare", "percentage difference against reference estimates",
         rainfreq::cli::cmd_compare, {}},
        {"diagnose", "convergence report for a fitted bundle", rainfreq::cli::cmd_diagnose, {}},
    };
    for (auto& s : subs) add_common(app.add_subcommand(s.name, s.help), s.flags);

    CLI11_PARSE(app, argc, argv);

    for (auto& s : subs) {
        if (!app.get_subcommand(s.name)->parsed()) continue;
        try {
            return s.run(build_config(s.flags));
        } catch (const rainfreq::input_error& e) {
            std::cerr << "error: " << e.what() << "\n";
            return rainfreq::cli::kExitInput;
        } catch (const rainfreq::convergence_error& e) {
            std::cerr << "convergence error: " << e.what() << "\n";
            return rainfreq::cli::kExitConvergence;
        } catch (const rainfreq::numerical_error& e) {
            std::cerr << "numerical error: " << e.what() << "\n";
            return rainfreq::cli::kExitNumerical;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return rainfreq::cli::kExitNumerical;
        }
    }
    return rainfreq::cli::kExitInput;
}
