#include "app.hpp"

#include <json.hpp>

#include <fstream>

#include "rainfreq/diagnostics.hpp"

namespace rainfreq::cli {

using nlohmann::json;

Metadata make_metadata(const RunConfig& cfg, const std::vector<std::string>& input_paths) {
    Metadata m;
    m.config_hash = cfg.hash();
    m.seed = cfg.seed();
    for (const auto& p : input_paths)
        m.input_digests.push_back({std::filesystem::path(p).filename().string(), file_digest(p)});
    return m;
}

Dataset load_dataset(const std::string& ams_path, const std::string& covariate_path,
                     int reference_year) {
    const CsvTable ams_table = read_csv_file(ams_path);
    std::vector<StationRecord> stations = ams_from_csv(ams_table);
    const CovariateSeries co2 = co2_from_csv(read_csv_file(covariate_path));
    return Dataset(std::move(stations), covariate_transform(co2, reference_year));
}

void write_bundle(const std::filesystem::path& out, const RunConfig& cfg, const ModelSpec& spec,
                  const Eigen::VectorXd& map_theta, const PosteriorSamples& samples) {
    std::filesystem::create_directories(out);
    const Metadata meta = make_metadata(cfg, {cfg.require("ams"), cfg.require("covariate")});
    const auto names = spec.parameter_names();

    // manifest.json
    json manifest;
    manifest["version"] = RAINFREQ_VERSION;
    manifest["family"] = family_name(spec.family());
    manifest["seed"] = cfg.seed();
    manifest["config_hash"] = cfg.hash();
    manifest["rng"] = kRngName;
    manifest["reference_year"] = cfg.integer("reference_year", 1990);
    manifest["ams"] = cfg.require("ams");
    manifest["covariate"] = cfg.require("covariate");
    manifest["station_ids"] = spec.data().sites().ids();
    manifest["parameter_names"] = names;
    manifest["chains"] = static_cast<int>(samples.n_chains());
    manifest["draws_per_chain"] = static_cast<int>(samples.draws_per_chain());
    std::vector<double> map_vec(map_theta.data(), map_theta.data() + map_theta.size());
    manifest["map_estimate"] = map_vec;
    atomic_write(out / "manifest.json", manifest.dump(2) + "\n");

    // draws.csv: draw, chain, log_posterior, each named parameter
    {
        std::ostringstream body;
        body << "draw,chain,log_posterior";
        for (const auto& n : names) body << ',' << n;
        body << '\n';
        for (std::size_t c = 0; c < samples.n_chains(); ++c) {
            const auto& chain = samples.chains()[c];
            for (std::size_t d = 0; d < chain.draws.size(); ++d) {
                body << d << ',' << c << ',' << format_double(chain.log_posterior[d]);
                for (Eigen::Index i = 0; i < chain.draws[d].size(); ++i)
                    body << ',' << format_double(chain.draws[d][i]);
                body << '\n';
            }
        }
        write_with_metadata(out / "draws.csv", meta, body.str());
    }

    // diagnostics.csv
    {
        const Diagnostics diag = compute_diagnostics(samples);
        std::ostringstream body;
        body << "parameter,rhat,ess,zero_variance\n";
        for (std::size_t i = 0; i < names.size(); ++i)
            body << names[i] << ',' << format_double(diag.rhat[i]) << ','
                 << format_double(diag.ess[i]) << ',' << (diag.zero_variance[i] ? 1 : 0) << '\n';
        write_with_metadata(out / "diagnostics.csv", meta, body.str());
    }

    // divergences.csv + adaptation record
    {
        std::ostringstream body;
        body << "chain,warmup_divergences,sampling_divergences,step_size,mass_diag_min,mass_diag_max\n";
        for (std::size_t c = 0; c < samples.n_chains(); ++c) {
            const auto& chain = samples.chains()[c];
            int post = 0;
            for (auto f : chain.divergent) post += f != 0;
            body << c << ',' << chain.warmup_divergences << ',' << post << ','
                 << format_double(chain.step_size) << ','
                 << format_double(chain.inv_mass.minCoeff()) << ','
                 << format_double(chain.inv_mass.maxCoeff()) << '\n';
        }
        write_with_metadata(out / "divergences.csv", meta, body.str());
    }
}

Bundle load_bundle(const std::string& dir) {
    const std::filesystem::path root(dir);
    const auto manifest_path = root / "manifest.json";
    if (!std::filesystem::exists(manifest_path))
        throw input_error("no manifest.json under " + dir);
    json manifest = json::parse(read_file(manifest_path.string()));

    Bundle b;
    b.family = manifest.at("family").get<std::string>();
    b.seed = manifest.at("seed").get<std::uint64_t>();
    b.reference_year = manifest.at("reference_year").get<int>();
    b.ams_path = manifest.at("ams").get<std::string>();
    b.covariate_path = manifest.at("covariate").get<std::string>();
    b.station_ids = manifest.at("station_ids").get<std::vector<std::string>>();
    b.dataset = load_dataset(b.ams_path, b.covariate_path, b.reference_year);

    if (b.dataset.sites().ids() != b.station_ids)
        throw input_error("bundle: AMS station order no longer matches the manifest");

    const auto param_names = manifest.at("parameter_names").get<std::vector<std::string>>();
    const CsvTable draws = read_csv_file((root / "draws.csv").string());
    const std::size_t dim = param_names.size();
    if (draws.header.size() != dim + 3)
        throw input_error("bundle: draws.csv column count does not match the manifest");

    const int n_chains = manifest.at("chains").get<int>();
    std::vector<ChainRecord> chains(static_cast<std::size_t>(n_chains));
    for (const auto& row : draws.rows) {
        const int chain = parse_int(row.at(1), "draws chain");
        if (chain < 0 || chain >= n_chains) throw input_error("bundle: chain index out of range");
        Eigen::VectorXd theta(static_cast<Eigen::Index>(dim));
        for (std::size_t i = 0; i < dim; ++i)
            theta[static_cast<Eigen::Index>(i)] = parse_double(row.at(3 + i), "draws value");
        auto& rec = chains[static_cast<std::size_t>(chain)];
        rec.draws.push_back(std::move(theta));
        rec.log_posterior.push_back(parse_double(row.at(2), "draws log_posterior"));
        rec.divergent.push_back(0);
        rec.tree_depth.push_back(0);
    }
    for (auto& rec : chains) {
        rec.inv_mass = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(dim));
        if (rec.draws.empty()) throw input_error("bundle: a chain has no draws");
    }
    b.samples = PosteriorSamples(std::move(chains), dim);
    return b;
}

} // namespace rainfreq::cli
