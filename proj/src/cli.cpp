#include "qmetro/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qmetro/fisher.hpp"
#include "qmetro/rng.hpp"

namespace qmetro {

namespace {

using nlohmann::json;

constexpr double kPi = std::numbers::pi;

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << text;
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string device_hash(const DeviceModel& model) {
    std::ostringstream hex;
    hex << std::hex << fnv1a(device_to_json(model));
    return hex.str();
}

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns)
        : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot open for writing: " + path.string());
        for (std::size_t i = 0; i < columns.size(); ++i)
            out_ << columns[i] << (i + 1 < columns.size() ? "," : "\n");
    }
    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i)
            out_ << format_double(values[i]) << (i + 1 < values.size() ? "," : "\n");
    }

private:
    std::ofstream out_;
};

json mode_to_json(const ModeSpec& mode) {
    if (mode.visibility_override) return json{{"visibility", *mode.visibility_override}};
    return mode.mode == PhotonMode::distinguishable ? "distinguishable" : "indistinguishable";
}

json config_to_json(const RunConfig& c) {
    json device;
    switch (c.device.kind) {
        case DeviceSpec::Kind::ideal: device = {{"kind", "ideal"}}; break;
        case DeviceSpec::Kind::perturbed:
            device = {{"kind", "perturbed"}, {"seed", c.device.seed}};
            break;
        case DeviceSpec::Kind::file:
            device = {{"kind", "file"}, {"path", c.device.path}};
            break;
    }
    return json{
        {"device", device},
        {"mode", mode_to_json(c.mode)},
        {"seed", c.seed},
        {"threads", c.threads},
        {"out_dir", c.out_dir.string()},
        {"bounds",
         {{"grid_points", c.bounds.grid_points},
          {"density_samples", c.bounds.density_samples},
          {"thresholds", c.bounds.thresholds}}},
        {"smc",
         {{"n_particles", c.smc.n_particles},
          {"prior_center", {c.smc.prior_center(0), c.smc.prior_center(1), c.smc.prior_center(2)}},
          {"prior_width", c.smc.prior_width},
          {"resample_ess_fraction", c.smc.resample_ess_fraction},
          {"liu_west_a", c.smc.liu_west_a}}},
        {"adaptive", {{"n_candidates", c.n_candidates}, {"control_span", c.control_span}}},
        {"campaign",
         {{"n_triplets", c.campaign.n_triplets},
          {"repetitions", c.campaign.repetitions},
          {"n_probes", c.campaign.n_probes}}},
        {"calibration",
         {{"power_levels", c.calibration.power_levels},
          {"shots", c.calibration.shots},
          {"multi_starts", c.calibration.fit.multi_starts},
          {"fit_seed", c.calibration.fit.seed}}},
    };
}

void write_manifest(const RunConfig& config, const std::string& command,
                    const DeviceModel& device, const std::vector<std::string>& outputs,
                    const std::vector<std::string>& warnings = {}) {
    json manifest;
    manifest["command"] = command;
    manifest["config"] = config_to_json(config);
    manifest["device_hash"] = device_hash(device);
    manifest["outputs"] = outputs;
    if (!warnings.empty()) manifest["warnings"] = warnings;
    write_file(config.out_dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse failure: ") + e.what());
    }
    try {
        RunConfig c;
        if (j.contains("device")) {
            const json& d = j["device"];
            const std::string kind = d.is_string() ? d.get<std::string>()
                                                   : d.at("kind").get<std::string>();
            if (kind == "ideal") {
                c.device.kind = DeviceSpec::Kind::ideal;
            } else if (kind == "perturbed") {
                c.device.kind = DeviceSpec::Kind::perturbed;
                if (d.is_object() && d.contains("seed"))
                    c.device.seed = d["seed"].get<std::uint64_t>();
            } else if (kind == "file") {
                c.device.kind = DeviceSpec::Kind::file;
                c.device.path = d.at("path").get<std::string>();
            } else {
                throw ConfigError("unknown device kind: " + kind);
            }
        }
        if (j.contains("mode")) {
            const json& m = j["mode"];
            if (m.is_string()) {
                const std::string s = m.get<std::string>();
                if (s == "indistinguishable")
                    c.mode.mode = PhotonMode::indistinguishable;
                else if (s == "distinguishable")
                    c.mode.mode = PhotonMode::distinguishable;
                else
                    throw ConfigError("unknown mode: " + s);
            } else {
                c.mode.visibility_override = m.at("visibility").get<double>();
                if (*c.mode.visibility_override < 0.0 || *c.mode.visibility_override > 1.0)
                    throw ConfigError("mode visibility must lie in [0, 1]");
            }
        }
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("threads")) c.threads = j["threads"].get<int>();
        if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
        if (j.contains("bounds")) {
            const json& b = j["bounds"];
            if (b.contains("grid_points")) c.bounds.grid_points = b["grid_points"].get<int>();
            if (b.contains("density_samples"))
                c.bounds.density_samples = b["density_samples"].get<int>();
            if (b.contains("thresholds"))
                c.bounds.thresholds = b["thresholds"].get<std::vector<double>>();
        }
        if (j.contains("smc")) {
            const json& s = j["smc"];
            if (s.contains("n_particles")) c.smc.n_particles = s["n_particles"].get<int>();
            if (s.contains("prior_width")) c.smc.prior_width = s["prior_width"].get<double>();
            if (s.contains("prior_center")) {
                const auto v = s["prior_center"].get<std::vector<double>>();
                if (v.size() != 3) throw ConfigError("prior_center needs 3 entries");
                c.smc.prior_center = Eigen::Vector3d(v[0], v[1], v[2]);
            }
            if (s.contains("resample_ess_fraction"))
                c.smc.resample_ess_fraction = s["resample_ess_fraction"].get<double>();
            if (s.contains("liu_west_a")) c.smc.liu_west_a = s["liu_west_a"].get<double>();
        }
        if (j.contains("adaptive")) {
            const json& a = j["adaptive"];
            if (a.contains("n_candidates")) c.n_candidates = a["n_candidates"].get<int>();
            if (a.contains("control_span")) c.control_span = a["control_span"].get<double>();
        }
        if (j.contains("campaign")) {
            const json& g = j["campaign"];
            if (g.contains("n_triplets")) c.campaign.n_triplets = g["n_triplets"].get<int>();
            if (g.contains("repetitions")) c.campaign.repetitions = g["repetitions"].get<int>();
            if (g.contains("n_probes")) c.campaign.n_probes = g["n_probes"].get<int>();
        }
        if (j.contains("calibration")) {
            const json& k = j["calibration"];
            if (k.contains("power_levels"))
                c.calibration.power_levels = k["power_levels"].get<int>();
            if (k.contains("shots")) c.calibration.shots = k["shots"].get<int>();
            if (k.contains("multi_starts"))
                c.calibration.fit.multi_starts = k["multi_starts"].get<int>();
            if (k.contains("fit_seed")) c.calibration.fit.seed = k["fit_seed"].get<std::uint64_t>();
        }
        return c;
    } catch (const ConfigError&) {
        throw;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file: " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

DeviceModel resolve_device(const RunConfig& config) {
    DeviceModel model;
    switch (config.device.kind) {
        case DeviceSpec::Kind::ideal: model = DeviceModel::ideal(); break;
        case DeviceSpec::Kind::perturbed: model = DeviceModel::perturbed(config.device.seed); break;
        case DeviceSpec::Kind::file: {
            std::ifstream in(config.device.path, std::ios::binary);
            if (!in) throw ConfigError("cannot read device file: " + config.device.path);
            std::ostringstream text;
            text << in.rdbuf();
            model = device_from_json(text.str());
            break;
        }
    }
    if (config.mode.visibility_override)
        model.visibility = *config.mode.visibility_override;
    else
        model = with_mode(model, config.mode.mode);
    return model;
}

int cmd_bounds(const RunConfig& config) {
    std::filesystem::create_directories(config.out_dir);
    const DeviceModel device = resolve_device(config);
    const DeviceLikelihood engine(device);

    json out;
    const Eigen::Matrix3d qfi = qfi_pure(engine.probe());
    out["qcrb_trace"] = qfi.inverse().trace();

    const MinCrbResult ind =
        min_crb_search(device, PhotonMode::indistinguishable, config.bounds.grid_points);
    const MinCrbResult dist =
        min_crb_search(device, PhotonMode::distinguishable, config.bounds.grid_points);
    out["min_crb"] = ind.min_trace;
    out["dist_min"] = dist.min_trace;
    json argmins = json::array();
    for (const auto& p : ind.argmins) argmins.push_back({p(0), p(1), p(2)});
    out["min_crb_argmins"] = argmins;

    out["classical_opt"] = optimal_single_photon_bound(3, 2);
    const CombinationBound comb = optimal_combination(qfi);
    out["numax"] = {comb.nu(0), comb.nu(1), comb.nu(2)};
    out["numax_bound"] = comb.value;
    out["sequential"] = sequential_bound(comb.nu, 2.0);

    json densities = json::array();
    for (std::size_t i = 0; i < config.bounds.thresholds.size(); ++i) {
        const double t = config.bounds.thresholds[i];
        const ThresholdDensity d =
            threshold_density(device, config.mode.mode, t, config.bounds.density_samples,
                              derive_seed(config.seed, 0xde, i));
        densities.push_back({{"t", t},
                             {"density", d.density},
                             {"divergence_fraction", d.divergence_fraction},
                             {"std_error", d.std_error},
                             {"n_samples", d.n_samples}});
    }
    out["densities"] = densities;
    write_file(config.out_dir / "bounds.json", out.dump(2) + "\n");

    // Full coarse scan of the CRB over [0, pi)^3.
    const int g = config.bounds.grid_points;
    auto trace_at = [&](const Eigen::Vector3d& phases) {
        return fi_inv_trace(fi_matrix_analytic(engine, phases));
    };
    {
        CsvWriter scan(config.out_dir / "scan.csv", {"phi_a", "phi_b", "phi_d", "trace_fi_inv"});
        for (int ia = 0; ia < g; ++ia)
            for (int ib = 0; ib < g; ++ib)
                for (int id = 0; id < g; ++id) {
                    const Eigen::Vector3d p(kPi * ia / g, kPi * ib / g, kPi * id / g);
                    scan.row({p(0), p(1), p(2), trace_at(p)});
                }
    }

    // Fixed-axis slices through the best point.
    const Eigen::Vector3d anchor =
        ind.argmins.empty() ? Eigen::Vector3d::Zero() : ind.argmins.front();
    const char* names[3] = {"phi_a", "phi_b", "phi_d"};
    std::vector<std::string> outputs{"bounds.json", "scan.csv", "manifest.json"};
    for (int fixed = 0; fixed < 3; ++fixed) {
        const int u = (fixed + 1) % 3, v = (fixed + 2) % 3;
        const std::string file = std::string("slice_") + names[fixed] + ".csv";
        CsvWriter slice(config.out_dir / file, {names[u], names[v], "trace_fi_inv"});
        for (int iu = 0; iu < g; ++iu)
            for (int iv = 0; iv < g; ++iv) {
                Eigen::Vector3d p;
                p(fixed) = anchor(fixed);
                p(u) = kPi * iu / g;
                p(v) = kPi * iv / g;
                slice.row({p(u), p(v), trace_at(p)});
            }
        outputs.push_back(file);
    }

    write_manifest(config, "bounds", device, outputs);
    return 0;
}

int cmd_estimate(const RunConfig& config) {
    std::filesystem::create_directories(config.out_dir);
    const DeviceModel device = resolve_device(config);

    AdaptiveConfig adaptive;
    adaptive.smc = config.smc;
    adaptive.n_candidates = config.n_candidates;
    adaptive.control_span = config.control_span;
    adaptive.threads = config.threads;

    const CampaignResult campaign =
        run_campaign(device, config.campaign.n_triplets, config.campaign.repetitions,
                     config.campaign.n_probes, adaptive, config.seed);

    {
        CsvWriter traj(config.out_dir / "trajectories.csv",
                       {"triplet_id", "repetition", "M", "trace_cov", "quad_loss", "comb_loss"});
        for (std::size_t idx = 0; idx < campaign.runs.size(); ++idx) {
            const auto& run = campaign.runs[idx];
            const int t = static_cast<int>(idx) / std::max(1, campaign.repetitions);
            const int r = static_cast<int>(idx) % std::max(1, campaign.repetitions);
            for (std::size_t m = 0; m < run.steps.size(); ++m) {
                const StepRecord& rec = run.steps[m];
                const double cerr = campaign.nu.dot(rec.posterior_mean - run.truth);
                traj.row({static_cast<double>(t), static_cast<double>(r),
                          static_cast<double>(m + 1), rec.trace_cov, rec.quadratic_loss,
                          cerr * cerr});
            }
        }
    }
    {
        CsvWriter agg(config.out_dir / "aggregate.csv",
                      {"M", "mean_quad_loss", "std_quad_loss", "mean_comb_loss", "std_comb_loss"});
        for (int m = 0; m < campaign.mean_quadratic_loss.size() && !campaign.runs.empty(); ++m)
            agg.row({static_cast<double>(m + 1), campaign.mean_quadratic_loss(m),
                     campaign.std_quadratic_loss(m), campaign.mean_combination_loss(m),
                     campaign.std_combination_loss(m)});
    }

    write_manifest(config, "estimate", device,
                   {"trajectories.csv", "aggregate.csv", "manifest.json"});
    return 0;
}

int cmd_calibrate(const RunConfig& config) {
    std::filesystem::create_directories(config.out_dir);
    const DeviceModel truth = resolve_device(config);

    std::vector<std::string> warnings;
    if (config.calibration.shots < 1000)
        warnings.push_back("low statistics: fewer than 1000 shots per setting");

    const CharacterizationDataset data =
        generate_characterization(truth, config.calibration.power_levels, config.calibration.shots,
                                  derive_seed(config.seed, 0xca1));

    {
        std::vector<std::string> cols{"power_a", "power_b", "power_d"};
        for (int i = 0; i < 10; ++i) cols.push_back("count_" + std::to_string(i));
        CsvWriter csv(config.out_dir / "dataset.csv", cols);
        for (std::size_t s = 0; s < data.settings_mw.size(); ++s) {
            std::vector<double> row{data.settings_mw[s](0), data.settings_mw[s](1),
                                    data.settings_mw[s](2)};
            for (int i = 0; i < 10; ++i) row.push_back(static_cast<double>(data.counts[s][i]));
            csv.row(row);
        }
    }

    // Fit from design values rather than the truth.
    DeviceModel initial = DeviceModel::ideal();
    initial.thermal.r1 = truth.thermal.r1;
    initial.thermal.r2 = truth.thermal.r2;
    initial.thermal.power_limit = truth.thermal.power_limit;
    initial.visibility = 0.9;
    FitOptions fit_options = config.calibration.fit;
    const FitResult fit = fit_model(data, initial, fit_options);
    if (!fit.converged) warnings.push_back("fit did not converge; best-so-far model reported");
    for (const std::string& name : fit.weak_parameters)
        warnings.push_back("weakly identified parameter: " + name);

    write_file(config.out_dir / "fitted_device.json", device_to_json(fit.model) + "\n");

    const FitReport report = fit_report(fit.model, data);
    {
        std::vector<std::string> cols{"power_a", "power_b", "power_d", "chi_square", "dof"};
        for (int i = 0; i < 10; ++i) cols.push_back("residual_" + std::to_string(i));
        CsvWriter csv(config.out_dir / "fit_report.csv", cols);
        for (std::size_t s = 0; s < report.settings.size(); ++s) {
            const SettingReport& sr = report.settings[s];
            std::vector<double> row{sr.setting_mw(0), sr.setting_mw(1), sr.setting_mw(2),
                                    sr.chi_square, static_cast<double>(sr.dof)};
            for (int i = 0; i < 10; ++i)
                row.push_back(report.residuals(static_cast<Eigen::Index>(s), i));
            csv.row(row);
        }
    }

    json summary;
    summary["objective"] = fit.objective;
    summary["converged"] = fit.converged;
    summary["reduced_chi_square"] = report.reduced_chi_square;
    summary["weak_parameters"] = fit.weak_parameters;
    write_file(config.out_dir / "fit_summary.json", summary.dump(2) + "\n");

    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
    write_manifest(config, "calibrate", truth,
                   {"dataset.csv", "fitted_device.json", "fit_report.csv", "fit_summary.json",
                    "manifest.json"},
                   warnings);
    return 0;
}

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Four-arm interferometer three-phase estimation toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> out_override;
    std::optional<int> threads_override;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run configuration");
        sub->add_option("--seed", seed_override, "master seed override");
        sub->add_option("--out", out_override, "output directory override");
        sub->add_option("--threads", threads_override, "worker thread count override");
    };
    CLI::App* bounds = app.add_subcommand("bounds", "Fisher-information bounds, scans, densities");
    CLI::App* estimate = app.add_subcommand("estimate", "adaptive estimation campaign");
    CLI::App* calibrate = app.add_subcommand("calibrate", "synthetic characterization and fit");
    add_common(bounds);
    add_common(estimate);
    add_common(calibrate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        RunConfig config = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (seed_override) config.seed = *seed_override;
        if (out_override) config.out_dir = *out_override;
        if (threads_override) {
            config.threads = *threads_override;
        } else if (config.threads == 0) {
            if (const char* env = std::getenv("QMETRO_THREADS")) config.threads = std::atoi(env);
        }

        if (bounds->parsed()) return cmd_bounds(config);
        if (estimate->parsed()) return cmd_estimate(config);
        if (calibrate->parsed()) return cmd_calibrate(config);
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace qmetro
