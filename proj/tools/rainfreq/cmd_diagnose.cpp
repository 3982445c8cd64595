#include "app.hpp"

#include <iostream>

#include "rainfreq/diagnostics.hpp"

namespace rainfreq::cli {

int cmd_diagnose(const RunConfig& cfg) {
    const Bundle bundle = load_bundle(cfg.require("bundle"));
    const ModelFamily family = family_from_name(bundle.family);
    ModelSpec spec(family, bundle.dataset);
    const auto names = spec.parameter_names();

    const Diagnostics diag = compute_diagnostics(bundle.samples);
    std::cout << "parameter,rhat,ess\n";
    for (std::size_t i = 0; i < names.size(); ++i)
        std::cout << names[i] << ',' << format_fixed(diag.rhat[i], 4) << ','
                  << format_fixed(diag.ess[i], 1) << '\n';

    // divergence counts live in the bundle's divergences.csv
    const auto div_path = std::filesystem::path(cfg.require("bundle")) / "divergences.csv";
    int divergences = 0;
    if (std::filesystem::exists(div_path)) {
        const CsvTable t = read_csv_file(div_path.string());
        const auto c = t.column("sampling_divergences");
        for (const auto& row : t.rows) divergences += parse_int(row.at(c), "divergences");
    }
    std::cout << "max rhat: " << format_fixed(diag.max_rhat(), 4)
              << ", min ess: " << format_fixed(diag.min_ess(), 1)
              << ", sampling divergences: " << divergences << "\n";

    if (cfg.has("out")) {
        std::ostringstream body;
        body << "parameter,rhat,ess,zero_variance\n";
        for (std::size_t i = 0; i < names.size(); ++i)
            body << names[i] << ',' << format_double(diag.rhat[i]) << ','
                 << format_double(diag.ess[i]) << ',' << (diag.zero_variance[i] ? 1 : 0) << '\n';
        const std::filesystem::path out(cfg.require("out"));
        write_with_metadata(out / "diagnostics.csv",
                            make_metadata(cfg, {bundle.ams_path, bundle.covariate_path}),
                            body.str());
        std::cout << "wrote " << (out / "diagnostics.csv").string() << "\n";
    }

    const double rhat_limit = cfg.number("rhat_limit", 1.05);
    return diag.max_rhat() > rhat_limit ? kExitConvergence : kExitOk;
}

} // namespace rainfreq::cli
