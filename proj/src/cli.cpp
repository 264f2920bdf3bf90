#include "qreset/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qreset/calibration.hpp"
#include "qreset/effective.hpp"
#include "qreset/errors.hpp"
#include "qreset/io.hpp"
#include "qreset/limits.hpp"
#include "qreset/lindblad.hpp"
#include "qreset/params.hpp"
#include "qreset/readout.hpp"
#include "qreset/stats.hpp"
#include "qreset/virtual_lab.hpp"

namespace qreset::cli {

namespace {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::string format = "csv";
    std::uint64_t seed = 0;
    bool seed_given = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "scenario config file (JSON)")
        ->envname("QRESET_CONFIG");
    cmd->add_option("--out", opts.out_dir, "output directory")->envname("QRESET_OUT");
    cmd->add_option("--format", opts.format, "trajectory/grid output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->envname("QRESET_FORMAT");
    cmd->add_option("--seed", opts.seed, "random seed override")
        ->envname("QRESET_SEED")
        ->each([&opts](const std::string&) { opts.seed_given = true; });
}

void check_keys(const ordered_json& j, const std::set<std::string>& allowed,
                const std::string& context) {
    if (!j.is_object()) throw ConfigError(context + " must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key)) throw ConfigError(context + ": unknown key '" + key + "'");
}

ordered_json load_config(const CommonOpts& opts) {
    if (opts.config_path.empty()) return ordered_json::object();
    std::ifstream in(opts.config_path);
    if (!in) throw ConfigError("cannot open config file: " + opts.config_path);
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return ordered_json::parse(ss.str());
    } catch (const std::exception& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
}

struct Scenario {
    ordered_json root;
    SystemParams params;
    std::uint64_t seed = 0;
    fs::path out;
    std::string format;
};

Scenario make_scenario(const CommonOpts& opts,
                       const std::set<std::string>& extra_sections) {
    Scenario s;
    s.root = load_config(opts);
    std::set<std::string> allowed = {"seed", "params"};
    allowed.insert(extra_sections.begin(), extra_sections.end());
    check_keys(s.root, allowed, "config");

    s.params = default_params();
    if (s.root.contains("params"))
        s.params = apply_param_overrides(s.params, s.root["params"].dump());
    s.seed = s.root.value("seed", std::uint64_t(0));
    if (opts.seed_given) s.seed = opts.seed;
    s.format = opts.format;
    s.out = opts.out_dir;
    fs::create_directories(s.out);
    return s;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file: " + path.string());
    f << text;
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) v[size_t(i)] = n > 1 ? lo + (hi - lo) * double(i) / (n - 1) : lo;
    return v;
}

struct NamedDrive {
    std::string name;
    DriveConfig drives;
};

std::vector<NamedDrive> parse_configs(const ordered_json& arr) {
    if (!arr.is_array() || arr.empty())
        throw ConfigError("'configs' must be a non-empty array");
    std::vector<NamedDrive> out;
    for (const auto& c : arr) {
        check_keys(c, {"name", "omega_ef_mhz", "g_tilde_mhz", "delta_f0g1_mhz", "delta_ef_mhz"},
                   "configs entry");
        NamedDrive nd;
        nd.name = c.value("name", std::string("cfg") + std::to_string(out.size()));
        nd.drives = drive_config_mhz(c.at("omega_ef_mhz").get<double>(),
                                     c.at("g_tilde_mhz").get<double>(),
                                     c.value("delta_f0g1_mhz", 0.0), c.value("delta_ef_mhz", 0.0));
        out.push_back(nd);
    }
    return out;
}

// ---------------------------------------------------------------- landscape

int cmd_landscape(const CommonOpts& opts) {
    Scenario s = make_scenario(opts, {"landscape"});
    ordered_json cfg = s.root.value("landscape", ordered_json::object());
    check_keys(cfg, {"g_min_mhz", "g_max_mhz", "g_step_mhz", "ef_min_mhz", "ef_max_mhz",
                     "ef_step_mhz", "kappa_mhz"},
               "landscape");
    const double g_min = cfg.value("g_min_mhz", 0.1), g_max = cfg.value("g_max_mhz", 6.0);
    const double g_step = cfg.value("g_step_mhz", 0.1);
    const double e_min = cfg.value("ef_min_mhz", 0.125), e_max = cfg.value("ef_max_mhz", 4.0);
    const double e_step = cfg.value("ef_step_mhz", 0.125);
    const Frequency kappa =
        cfg.contains("kappa_mhz") ? Frequency::from_mhz(cfg["kappa_mhz"].get<double>())
                                  : s.params.kappa;
    if (g_step <= 0 || e_step <= 0 || g_max < g_min || e_max < e_min || g_min <= 0 || e_min <= 0)
        throw ConfigError("landscape: empty or non-positive grid");

    std::vector<Frequency> g_axis, ef_axis;
    for (double g = g_min; g <= g_max + 1e-9 * g_step; g += g_step)
        g_axis.push_back(Frequency::from_mhz(g));
    for (double e = e_min; e <= e_max + 1e-9 * e_step; e += e_step)
        ef_axis.push_back(Frequency::from_mhz(e));

    const ResetRateLandscape ls = landscape(g_axis, ef_axis, kappa);
    if (s.format == "json") {
        write_text(s.out / "landscape.json", landscape_to_json(ls));
    } else {
        write_csv(landscape_table(ls), (s.out / "landscape.csv").string());
        write_csv(ridge_table(ls), (s.out / "ridge.csv").string());
    }
    std::cout << "landscape: " << g_axis.size() << " x " << ef_axis.size()
              << " grid written to " << s.out.string() << "\n";
    return 0;
}

// ----------------------------------------------------------- reset-dynamics

int cmd_reset_dynamics(const CommonOpts& opts) {
    Scenario s = make_scenario(opts, {"reset_dynamics"});
    if (!s.root.contains("reset_dynamics"))
        throw ConfigError("reset-dynamics: config section 'reset_dynamics' required");
    ordered_json cfg = s.root["reset_dynamics"];
    check_keys(cfg, {"engine", "initial", "t_max_us", "n_times", "sat_horizon_us", "n_fock",
                     "configs", "tol"},
               "reset_dynamics");
    const std::string engine = cfg.value("engine", std::string("both"));
    if (engine != "effective" && engine != "lindblad" && engine != "both")
        throw ConfigError("reset_dynamics: engine must be effective|lindblad|both");
    const std::string initial = cfg.value("initial", std::string("e0"));
    if (initial != "e0" && initial != "f0")
        throw ConfigError("reset_dynamics: initial must be e0|f0");
    const double t_max = cfg.value("t_max_us", 1.0) * 1e-6;
    const int n_times = cfg.value("n_times", 401);
    const double sat_horizon = cfg.value("sat_horizon_us", 4.0) * 1e-6;
    const int n_fock = cfg.value("n_fock", 3);
    const double tol = cfg.value("tol", 1e-8);
    const auto configs = parse_configs(cfg.value("configs", ordered_json::array()));

    const std::vector<double> times = linspace(0.0, t_max, n_times);
    ordered_json summary;
    for (const auto& nd : configs) {
        ordered_json entry;
        entry["omega_ef_mhz"] = nd.drives.omega_ef.mhz();
        entry["g_tilde_mhz"] = nd.drives.g_tilde.mhz();
        entry["gamma_mhz"] = reset_rate(nd.drives, s.params.kappa).mhz();

        if (engine != "lindblad") {
            const EffectiveHamiltonian h = build_h3(nd.drives, s.params.kappa);
            const auto traj = propagate_h3(
                h, initial == "e0" ? ThreeLevelState::e0 : ThreeLevelState::f0, times);
            const std::string base = "dyn_" + nd.name + "_effective";
            if (s.format == "json")
                write_text(s.out / (base + ".json"), trajectory_to_json(traj));
            else
                write_csv(trajectory_table(traj), (s.out / (base + ".csv")).string());
            entry["p_exc_280ns_effective"] = excited_population(h, 280e-9);
        }
        if (engine != "effective") {
            DrivenModel m{s.params, nd.drives, n_fock};
            const Eigen::MatrixXcd rho0 =
                density_from_ket(product_ket(initial == "e0" ? 1 : 2, 0, 3, n_fock));
            const auto traj = evolve(m, rho0, times, tol);
            const std::string base = "dyn_" + nd.name + "_lindblad";
            if (s.format == "json")
                write_text(s.out / (base + ".json"), trajectory_to_json(traj));
            else
                write_csv(trajectory_table(traj), (s.out / (base + ".csv")).string());
            const SteadyStateResult ss = steady_state_excitation(m, sat_horizon, tol);
            entry["p_exc_sat"] = ss.p_exc;
            entry["sat_converged"] = ss.converged;
        }
        summary[nd.name] = entry;
    }
    write_text(s.out / "summary.json", summary.dump(2) + "\n");
    std::cout << "reset-dynamics: " << configs.size() << " configuration(s) written to "
              << s.out.string() << "\n";
    return 0;
}

// ----------------------------------------------------------------- calibrate

int cmd_calibrate(const CommonOpts& opts) {
    Scenario s = make_scenario(opts, {"calibrate"});
    ordered_json cfg = s.root.value("calibrate", ordered_json::object());
    check_keys(cfg, {"shots_per_point", "noiseless", "n_freq", "n_time", "disable_ef_drive"},
               "calibrate");

    LabTruth truth = default_lab_truth(s.seed);
    truth.params = s.params;
    if (cfg.value("disable_ef_drive", false)) truth.slope_ef_mhz_per_v = 0.0;

    CalibPlan plan;
    plan.shots_per_point = cfg.value("noiseless", false) ? 0 : cfg.value("shots_per_point", 2000);
    plan.n_freq = cfg.value("n_freq", plan.n_freq);
    plan.n_time = cfg.value("n_time", plan.n_time);

    const CalibrationResult result = run_pipeline(truth, plan);

    ordered_json j = ordered_json::parse(calibration_result_to_json(result));
    j["truth"] = {{"stark_f0g1_mhz_per_v2", truth.stark_f0g1_mhz_per_v2},
                  {"stark_ef_mhz_per_v2", truth.stark_ef_mhz_per_v2},
                  {"rate_slope_f0g1_mhz_per_v", truth.slope_f0g1_mhz_per_v},
                  {"rate_slope_ef_mhz_per_v", truth.slope_ef_mhz_per_v},
                  {"kappa_mhz", truth.params.kappa.mhz()}};
    write_text(s.out / "calibration.json", j.dump(2) + "\n");
    std::cout << "calibrate: kappa_fit = " << format_double(result.kappa_fit.mhz())
              << " MHz, slopes = (" << format_double(result.rate_slope_f0g1_mhz_per_v) << ", "
              << format_double(result.rate_slope_ef_mhz_per_v) << ") MHz/V -> "
              << (s.out / "calibration.json").string() << "\n";
    return 0;
}

// ------------------------------------------------------------------- readout

int cmd_readout(const CommonOpts& opts) {
    Scenario s = make_scenario(opts, {"readout"});
    ordered_json cfg = s.root.value("readout", ordered_json::object());
    check_keys(cfg, {"n_shots", "simplex_grid", "p_tail", "herald_n"}, "readout");
    const int n_shots = cfg.value("n_shots", 40000);
    const int grid = cfg.value("simplex_grid", 5);
    const double p_tail = cfg.value("p_tail", 1e-5);
    const int herald_n = cfg.value("herald_n", 40000);

    LabTruth truth = default_lab_truth(s.seed);
    truth.params = s.params;

    const auto reference = reference_shot_sets(truth, n_shots);
    const GmmModel model = fit_gmm(reference);
    const Eigen::Matrix3d r = assignment_matrix(model, reference);
    const Eigen::JacobiSVD<Eigen::Matrix3d> svd(r);
    const double cond = svd.singularValues()(0) / svd.singularValues()(2);

    write_text(s.out / "gmm.json", gmm_to_json(model));
    write_text(s.out / "assignment.json", assignment_to_json(r, cond));

    // Closed loop over a simplex grid of true populations.
    CsvTable table;
    table.comments = {"corrected populations (raw, unclipped) against the injected truth"};
    table.columns = {"p_true_g", "p_true_e", "p_true_f", "p_hat_g", "p_hat_e", "p_hat_f"};
    table.data.assign(6, {});
    std::uint64_t point = 0;
    for (int i = 0; i <= grid; ++i)
        for (int j = 0; i + j <= grid; ++j) {
            const Eigen::Vector3d p_true(double(grid - i - j) / grid, double(i) / grid,
                                         double(j) / grid);
            const ShotSet shots =
                sample_shots(p_true, truth.gmm, n_shots, truth.seed, 60, point++);
            const std::vector<int> labels = classify_batch(model, shots.points);
            Eigen::Vector3d m = Eigen::Vector3d::Zero();
            for (const int l : labels) m(l) += 1.0;
            m /= double(labels.size());
            const Eigen::Vector3d p_hat = correct_populations(m, r);
            for (int c = 0; c < 3; ++c) {
                table.data[size_t(c)].push_back(p_true(c));
                table.data[size_t(3 + c)].push_back(p_hat(c));
            }
        }
    write_csv(table, (s.out / "corrected.csv").string());

    // Herald threshold from the bimodal fit of the synthetic traces.
    const std::vector<double> traces = generate_herald_traces(truth, herald_n, truth.seed);
    const BimodalModel bim = fit_bimodal_herald(traces);
    const double thr = herald_threshold(bim.mu0, bim.sigma0, p_tail);
    ordered_json hj;
    hj["mu_excited"] = bim.mu0;
    hj["sigma_excited"] = bim.sigma0;
    hj["mu_ground"] = bim.mu1;
    hj["sigma_ground"] = bim.sigma1;
    hj["w_excited"] = bim.w0;
    hj["p_tail"] = p_tail;
    hj["threshold"] = thr;
    write_text(s.out / "herald.json", hj.dump(2) + "\n");

    std::cout << "readout: R diagonal = (" << format_double(100 * r(0, 0)) << ", "
              << format_double(100 * r(1, 1)) << ", " << format_double(100 * r(2, 2))
              << ") % -> " << s.out.string() << "\n";
    return 0;
}

// -------------------------------------------------------------------- limits

int cmd_limits(const CommonOpts& opts) {
    Scenario s = make_scenario(opts, {"limits"});
    if (!s.root.contains("limits")) throw ConfigError("limits: config section 'limits' required");
    ordered_json cfg = s.root["limits"];
    check_keys(cfg, {"t_rr_mk", "configs"}, "limits");
    const double t_rr = cfg.value("t_rr_mk", 60.0) * 1e-3;
    const auto configs = parse_configs(cfg.value("configs", ordered_json::array()));

    ordered_json out;
    for (const auto& nd : configs) {
        const LimitReport rep = limit_report(nd.drives, s.params, t_rr);
        ordered_json entry = ordered_json::parse(limit_report_to_json(rep));
        entry["gamma_mhz"] = reset_rate(nd.drives, s.params.kappa).mhz();
        out[nd.name] = entry;
    }
    write_text(s.out / "limits.json", out.dump(2) + "\n");
    std::cout << "limits: " << configs.size() << " configuration(s) -> "
              << (s.out / "limits.json").string() << "\n";
    return 0;
}

// ----------------------------------------------------------------------- lab

int cmd_lab(const CommonOpts& opts) {
    Scenario s = make_scenario(opts, {"lab"});
    ordered_json cfg = s.root.value("lab", ordered_json::object());
    check_keys(cfg, {"n_shots", "herald_n", "calib", "shots_per_point"}, "lab");
    const int n_shots = cfg.value("n_shots", 2000);
    const int herald_n = cfg.value("herald_n", 20000);

    LabTruth truth = default_lab_truth(s.seed);
    truth.params = s.params;

    const auto reference = reference_shot_sets(truth, n_shots);
    const char* names[3] = {"g", "e", "f"};
    for (int p = 0; p < 3; ++p)
        write_csv(shots_table(reference[size_t(p)]),
                  (s.out / ("reference_" + std::string(names[size_t(p)]) + ".csv")).string());

    const std::vector<double> traces = generate_herald_traces(truth, herald_n, truth.seed);
    CsvTable ht;
    ht.comments = {"first principal component of the pre-selection traces"};
    ht.columns = {"c1"};
    ht.data = {traces};
    write_csv(ht, (s.out / "herald.csv").string());

    if (cfg.value("calib", false)) {
        CalibPlan plan;
        plan.shots_per_point = cfg.value("shots_per_point", 2000);
        const CalibData data = generate_calibration_data(truth, plan);
        auto dump = [&](const std::vector<CalibDataset>& sets, const std::string& stem) {
            for (size_t i = 0; i < sets.size(); ++i) {
                CsvTable t;
                t.comments = {"amplitude_v = " + format_double(sets[i].amplitude_v)};
                t.columns = {"x", "y"};
                t.data = {sets[i].x, sets[i].y};
                if (!sets[i].y_err.empty()) {
                    t.columns.push_back("y_err");
                    t.data.push_back(sets[i].y_err);
                }
                write_csv(t, (s.out / (stem + "_" + std::to_string(i) + ".csv")).string());
            }
        };
        dump(data.step1, "step1");
        dump(data.step2, "step2");
        dump(data.step3, "step3");
        dump(data.step4, "step4");
    }
    std::cout << "lab: synthetic data written to " << s.out.string() << "\n";
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"unconditional transmon-qutrit reset: simulation and analysis toolkit"};
    app.require_subcommand(1);

    CommonOpts opts[6];
    CLI::App* sub[6];
    int which = -1;
    const char* names[6] = {"landscape", "reset-dynamics", "calibrate",
                            "readout",   "limits",         "lab"};
    const char* descs[6] = {"reset-rate grid and ridge over the drive rates",
                            "population trajectories from both dynamics engines",
                            "four-step drive calibration against the virtual lab",
                            "assignment matrix, corrected populations and heralding",
                            "steady-state limit analysis",
                            "synthetic shot/herald/calibration data dumps"};
    for (int i = 0; i < 6; ++i) {
        sub[i] = app.add_subcommand(names[i], descs[i]);
        add_common(sub[i], opts[i]);
        sub[i]->callback([&which, i]() { which = i; });
    }

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        switch (which) {
            case 0: return cmd_landscape(opts[0]);
            case 1: return cmd_reset_dynamics(opts[1]);
            case 2: return cmd_calibrate(opts[2]);
            case 3: return cmd_readout(opts[3]);
            case 4: return cmd_limits(opts[4]);
            case 5: return cmd_lab(opts[5]);
            default: return 2;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const InvalidParameter& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const FitFailure& e) {
        std::cerr << "fit failure: " << e.what() << "\n";
        return 3;
    } catch (const IntegrationFailure& e) {
        std::cerr << "integration failure: " << e.what() << "\n";
        return 3;
    } catch (const DivergentIntegralError& e) {
        std::cerr << "computation failure: " << e.what() << "\n";
        return 3;
    } catch (const DegenerateDataError& e) {
        std::cerr << "computation failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

}  // namespace qreset::cli
