#include "app.hpp"

#include <iostream>

#include "rainfreq/cross_validation.hpp"

namespace rainfreq::cli {

int cmd_validate(const RunConfig& cfg) {
    const Dataset data = load_dataset(cfg.require("ams"), cfg.require("covariate"),
                                      cfg.integer("reference_year", 1990));

    std::vector<ModelFamily> families;
    for (const auto& name : split_list(cfg.get("models", cfg.get("model", "svc"))))
        families.push_back(family_from_name(name));

    const std::string kind_name = cfg.get("cv", "odd_even");
    CvKind kind;
    if (kind_name == "odd_even") kind = CvKind::OddEvenYears;
    else if (kind_name == "spatial") kind = CvKind::SpatialGrid;
    else throw input_error("cv must be odd_even or spatial, got '" + kind_name + "'");

    const CvPlan plan = make_cv_plan(kind, data, cfg.integer("fold", 0));

    CvRunConfig run;
    run.sampler = cfg.sampler();
    run.map_starts = cfg.integer("map_starts", 8);
    run.max_prediction_draws =
        static_cast<std::size_t>(cfg.integer("prediction_draws", 2000));
    run.crps_mc_draws = cfg.integer("crps_mc_draws", 4000);

    std::cout << "validate: " << kind_name << " cross-validation, " << plan.folds.size()
              << " fold(s), " << families.size() << " family(ies)\n";
    const auto table = run_cv(families, data, plan, run, cfg.seed());

    // metrics as rows, families as columns
    std::ostringstream body;
    body << "metric";
    for (const auto& row : table) body << ',' << row.family;
    body << '\n';
    const char* metric_names[5] = {"logs", "qs_p90", "qs_p98", "qs_p99", "crps"};
    for (int m = 0; m < 5; ++m) {
        body << metric_names[m];
        for (const auto& row : table) {
            const double v = m == 0   ? row.logs
                             : m == 1 ? row.qs90
                             : m == 2 ? row.qs98
                             : m == 3 ? row.qs99
                                      : row.crps;
            body << ',' << format_double(v);
        }
        body << '\n';
    }
    body << "n_observations";
    for (const auto& row : table) body << ',' << row.n_observations;
    body << "\nn_unsupported";
    for (const auto& row : table) body << ',' << row.n_unsupported;
    body << '\n';

    for (const auto& row : table)
        std::cout << "  " << row.family << ": LogS " << format_fixed(row.logs, 4) << ", QS(0.9) "
                  << format_fixed(row.qs90, 4) << ", QS(0.98) " << format_fixed(row.qs98, 4)
                  << ", QS(0.99) " << format_fixed(row.qs99, 4) << ", CRPS "
                  << format_fixed(row.crps, 4) << "\n";

    const std::filesystem::path out(cfg.require("out"));
    const Metadata meta = make_metadata(cfg, {cfg.require("ams"), cfg.require("covariate")});
    write_with_metadata(out / "scores.csv", meta, body.str());
    std::cout << "wrote " << (out / "scores.csv").string() << "\n";
    return kExitOk;
}

} // namespace rainfreq::cli
