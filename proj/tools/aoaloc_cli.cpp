// Command-line front end: synthesis, full pipeline runs, heat-map sweeps,
// epsilon-model calibration, detector comparison, and the worst-case bound.
#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "aoaloc/experiments.hpp"
#include "aoaloc/io.hpp"
#include "aoaloc/pipeline.hpp"

using namespace aoaloc;

namespace {

RunConfig load_or_default(const std::string& config_path) {
    if (config_path.empty()) return RunConfig{};
    return config_from_json_file(config_path);
}

int cmd_synth(const std::string& config_path, int window, const std::string& out_path,
              bool as_csv) {
    RunConfig cfg = load_or_default(config_path);
    BuiltScene scene = build_scene(cfg);
    SynthConfig sc;
    sc.sample_rate = cfg.sample_rate;
    sc.master_seed = derive_seed(cfg.seed, 0x2EA1ull, 0);
    NoiseModel noise{scene.noise_var, derive_seed(cfg.seed, 0x015Eull, 0)};
    WindowSynthesizer synth(scene.geometry, scene.trajectory, scene.sources, noise, sc);
    WindowCapture cap = synth.synthesize(window);
    if (as_csv)
        write_window_csv(cap, out_path);
    else
        write_window_binary(cap, out_path);
    std::cout << "window " << window << ": " << cap.samples.rows() << " x " << cap.samples.cols()
              << " samples, midpoint " << fmt_double(cap.midpoint_time) << " s -> " << out_path
              << "\n";
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
    RunConfig cfg = load_or_default(config_path);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    MetricsReport rep = run_pipeline(cfg);
    std::cout << rep.to_csv();
    std::cout << "# runtime_seconds=" << fmt_double(rep.runtime_seconds) << "\n";
    int t = 0;
    for (int n : rep.reliable_tracks_per_trial)
        std::cout << "# trial " << t++ << ": reliable_tracks=" << n << "\n";
    return 0;
}

int cmd_heatmap(const std::string& config_path, const HeatmapConfig& hm,
                const std::string& out_dir) {
    RunConfig cfg = load_or_default(config_path);
    HeatmapResult res = heatmap_sweep(cfg, hm);

    std::filesystem::create_directories(out_dir);
    std::ostringstream csv;
    csv << "x,y,rmse\n";
    for (std::size_t iy = 0; iy < res.ys.size(); ++iy)
        for (std::size_t ix = 0; ix < res.xs.size(); ++ix)
            csv << fmt_double(res.xs[ix]) << "," << fmt_double(res.ys[iy]) << ","
                << fmt_double(res.rmse(static_cast<Eigen::Index>(iy), static_cast<Eigen::Index>(ix)))
                << "\n";
    write_text_file(out_dir + "/heatmap.csv", csv.str());

    MatrixXd plot = res.rmse;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < plot.size(); ++i)
        if (!std::isnan(plot.data()[i])) worst = std::max(worst, plot.data()[i]);
    for (Eigen::Index i = 0; i < plot.size(); ++i)
        if (std::isnan(plot.data()[i])) plot.data()[i] = worst;
    write_text_file(out_dir + "/heatmap.svg",
                    svg_heatmap(plot, res.xs.front(), res.ys.front(), hm.step,
                                "Localization RMSE heat-map (m)"));
    std::cout << "heat-map: " << res.xs.size() << " x " << res.ys.size() << " cells -> " << out_dir
              << "\n";
    return 0;
}

int cmd_calibrate(const std::string& config_path, CalibrationConfig cal,
                  const std::string& out_path) {
    RunConfig cfg = load_or_default(config_path);
    ArrayGeometry geom =
        uniform_circular_array(cfg.array_elements, cfg.array_radius, cfg.carrier_freq);
    CalibrationReport rep = calibrate_f(geom, cal);
    rep.model.save_csv(out_path);

    std::cout << "calibrated f over N in {" << cal.n_range.front() << ".." << cal.n_range.back()
              << "}, gamma_dB in [" << cal.gamma_grid_db.front() << ", " << cal.gamma_grid_db.back()
              << "] -> " << out_path << "\n";
    for (const auto& [n, fit] : rep.model.fits())
        std::cout << "  N=" << n << " fit residual rms (log10 f): " << fmt_double(fit.residual_rms)
                  << "\n";

    bool mono_gamma = true, mono_n = true;
    for (std::size_t ni = 0; ni < cal.n_range.size(); ++ni)
        for (std::size_t gi = 0; gi + 1 < cal.gamma_grid_db.size(); ++gi) {
            double a = rep.model.f(cal.n_range[ni], std::pow(10.0, cal.gamma_grid_db[gi] / 10.0));
            double b =
                rep.model.f(cal.n_range[ni], std::pow(10.0, cal.gamma_grid_db[gi + 1] / 10.0));
            if (b > a * (1.0 + 1e-9)) mono_gamma = false;
        }
    for (std::size_t ni = 0; ni + 1 < cal.n_range.size(); ++ni)
        for (double gdb : cal.gamma_grid_db) {
            double a = rep.model.f(cal.n_range[ni], std::pow(10.0, gdb / 10.0));
            double b = rep.model.f(cal.n_range[ni + 1], std::pow(10.0, gdb / 10.0));
            if (b < a * (1.0 - 1e-9)) mono_n = false;
        }
    std::cout << "  monotone non-increasing in gamma: " << (mono_gamma ? "pass" : "FAIL") << "\n";
    std::cout << "  monotone non-decreasing in N:     " << (mono_n ? "pass" : "FAIL") << "\n";
    return 0;
}

int cmd_compare(const std::string& config_path, const DetectorComparisonConfig& cmp,
                const std::string& out_path) {
    RunConfig cfg = load_or_default(config_path);
    auto rows = compare_detectors(cfg, cmp);
    std::string csv = detector_comparison_csv(rows);
    write_text_file(out_path, csv);
    std::cout << csv;
    return 0;
}

int cmd_bound(double theta_min_deg, double theta_max_deg, double theta_step_deg, double dz_max,
              const std::string& out_path) {
    std::vector<double> thetas;
    for (double t = theta_min_deg; t <= theta_max_deg + 1e-9; t += theta_step_deg)
        thetas.push_back(deg2rad(t));
    auto rows = analyze_bound(thetas, dz_max);
    std::string csv = bound_csv(rows);
    if (!out_path.empty()) write_text_file(out_path, csv);
    std::cout << csv;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"3D multi-source AOA localization simulator"};
    app.require_subcommand(1);

    std::string config_path, out_path, out_dir;
    int window = 1;
    bool as_csv = false;

    auto* synth = app.add_subcommand("synth", "synthesize one window and export it");
    synth->add_option("-c,--config", config_path, "run configuration (JSON)");
    synth->add_option("-w,--window", window, "window index (1-based)");
    synth->add_option("-o,--output", out_path, "output file")->required();
    synth->add_flag("--csv", as_csv, "CSV instead of binary");

    auto* run = app.add_subcommand("run", "run the full pipeline and print metrics");
    run->add_option("-c,--config", config_path, "run configuration (JSON)");
    run->add_option("-o,--output-dir", out_dir, "artifact directory");

    HeatmapConfig hm;
    auto* heatmap = app.add_subcommand("heatmap", "single-source localization RMSE sweep");
    heatmap->add_option("-c,--config", config_path, "run configuration (JSON)");
    heatmap->add_option("--x-min", hm.x_min);
    heatmap->add_option("--x-max", hm.x_max);
    heatmap->add_option("--y-min", hm.y_min);
    heatmap->add_option("--y-max", hm.y_max);
    heatmap->add_option("--step", hm.step, "grid step (m)");
    heatmap->add_option("-o,--output-dir", out_dir, "artifact directory")->required();

    CalibrationConfig cal;
    int n_lo = 2, n_hi = 11;
    double g_lo = 2.0, g_hi = 21.0, g_step = 1.0;
    auto* calib = app.add_subcommand("calibrate-f", "calibrate the sparse-recovery budget model");
    calib->add_option("-c,--config", config_path, "run configuration (JSON)");
    calib->add_option("--n-min", n_lo);
    calib->add_option("--n-max", n_hi);
    calib->add_option("--gamma-min-db", g_lo);
    calib->add_option("--gamma-max-db", g_hi);
    calib->add_option("--gamma-step-db", g_step);
    calib->add_option("--trials", cal.trials);
    calib->add_option("--columns", cal.columns);
    calib->add_option("--noise-realizations", cal.noise_realizations);
    calib->add_option("--seed", cal.seed);
    calib->add_option("-o,--output", out_path, "coefficient CSV")->required();

    DetectorComparisonConfig cmp;
    auto* compare = app.add_subcommand("compare-detectors", "false-detection comparison");
    compare->add_option("-c,--config", config_path, "run configuration (JSON)");
    compare->add_option("--configurations", cmp.configurations);
    compare->add_option("--noise-realizations", cmp.noise_realizations);
    compare->add_option("--windows", cmp.windows);
    compare->add_option("--sources", cmp.num_sources);
    compare->add_option("--snr-grid-db", cmp.snr_grid_db, "SNR* grid (dB)");
    compare->add_option("-o,--output", out_path, "comparison CSV")->required();

    double theta_min_deg = 10.0, theta_max_deg = 80.0, theta_step_deg = 10.0, dz_max = 16.5;
    auto* bound = app.add_subcommand("analyze-bound", "worst-case localization bound");
    bound->add_option("--theta-min-deg", theta_min_deg);
    bound->add_option("--theta-max-deg", theta_max_deg);
    bound->add_option("--theta-step-deg", theta_step_deg);
    bound->add_option("--dz-max", dz_max, "height budget (m)");
    bound->add_option("-o,--output", out_path, "bound CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return cmd_synth(config_path, window, out_path, as_csv);
        if (run->parsed()) return cmd_run(config_path, out_dir);
        if (heatmap->parsed()) return cmd_heatmap(config_path, hm, out_dir);
        if (calib->parsed()) {
            cal.n_range.clear();
            for (int n = n_lo; n <= n_hi; ++n) cal.n_range.push_back(n);
            cal.gamma_grid_db.clear();
            for (double g = g_lo; g <= g_hi + 1e-9; g += g_step) cal.gamma_grid_db.push_back(g);
            return cmd_calibrate(config_path, cal, out_path);
        }
        if (compare->parsed()) return cmd_compare(config_path, cmp, out_path);
        if (bound->parsed())
            return cmd_bound(theta_min_deg, theta_max_deg, theta_step_deg, dz_max, out_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
