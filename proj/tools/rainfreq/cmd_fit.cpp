#include "app.hpp"

#include <iostream>

#include "rainfreq/diagnostics.hpp"
#include "rainfreq/optimize.hpp"

namespace rainfreq::cli {

int cmd_fit(const RunConfig& cfg) {
    const ModelFamily family = family_from_name(cfg.require("model"));
    const Dataset data = load_dataset(cfg.require("ams"), cfg.require("covariate"),
                                      cfg.integer("reference_year", 1990));
    ModelSpec spec(family, data);
    std::cout << "fit: " << family_name(family) << ", " << data.n_stations() << " stations, "
              << data.n_observations() << " station-years, " << spec.dim() << " parameters\n";

    const OptimResult map = map_estimate(spec, cfg.integer("map_starts", 8), cfg.seed());
    std::cout << "map: log-posterior " << map.log_posterior << " after " << map.iterations
              << " iterations" << (map.converged ? "" : " (gradient tolerance not reached)")
              << "\n";

    const SamplerConfig sampler_cfg = cfg.sampler();
    const PosteriorSamples samples = sample(spec, sampler_cfg, map.theta);
    const Diagnostics diag = compute_diagnostics(samples);

    const std::filesystem::path out(cfg.require("out"));
    write_bundle(out, cfg, spec, map.theta, samples);

    std::cout << "draws: " << samples.total_draws() << " kept across " << samples.n_chains()
              << " chains\n";
    std::cout << "max rhat: " << diag.max_rhat() << ", min ess: " << diag.min_ess()
              << ", divergences: " << diag.divergences << "\n";
    std::cout << "bundle written to " << out.string() << "\n";

    const double rhat_limit = cfg.number("rhat_limit", 1.05);
    if (diag.max_rhat() > rhat_limit) {
        std::cerr << "convergence failure: max rhat " << diag.max_rhat() << " > " << rhat_limit
                  << " (see " << (out / "diagnostics.csv").string() << ")\n";
        return kExitConvergence;
    }
    return kExitOk;
}

} // namespace rainfreq::cli
