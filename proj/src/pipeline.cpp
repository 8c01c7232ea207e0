#include "aoaloc/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "aoaloc/io.hpp"

namespace aoaloc {

using nlohmann::json;

AngleGrid RunConfig::make_grid() const {
    return AngleGrid::regular(theta_min, theta_max, theta_step, 0.0, 2.0 * kPi, phi_step);
}

void RunConfig::validate() const {
    if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
    if (windows < 1) throw std::invalid_argument("config: windows must be >= 1");
    if (sample_rate <= 0.0 || window_duration <= 0.0)
        throw std::invalid_argument("config: sampling setup invalid");
    detector.validate();
    if (!(tracker.xi > 0.0 && tracker.xi < 1.0))
        throw std::invalid_argument("config: tracker xi must be in (0,1)");
}

namespace {

Vector3d vec3_from(const json& j) {
    if (!j.is_array() || j.size() != 3) throw std::invalid_argument("config: expected [x,y,z]");
    return Vector3d(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json vec3_to(const Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig config_from_json_text(const std::string& text) {
    json j = json::parse(text);
    RunConfig c;
    maybe(j, "seed", c.seed);
    maybe(j, "trials", c.trials);
    maybe(j, "windows", c.windows);
    maybe(j, "snr_star_db", c.snr_star_db);

    if (j.contains("scene")) {
        const json& s = j.at("scene");
        std::string kind = s.value("kind", "city");
        if (kind == "city") c.scene.kind = SceneConfig::Kind::City;
        else if (kind == "flat") c.scene.kind = SceneConfig::Kind::Flat;
        else throw std::invalid_argument("config: scene.kind must be city|flat");
        maybe(s, "extent", c.scene.extent);
        maybe(s, "cell_size", c.scene.cell_size);
        maybe(s, "building_w", c.scene.building_w);
        maybe(s, "building_d", c.scene.building_d);
        maybe(s, "height_min", c.scene.height_min);
        maybe(s, "height_max", c.scene.height_max);
        maybe(s, "flat_height", c.scene.flat_height);
        maybe(s, "map_seed", c.scene.map_seed);
        maybe(s, "stamp_sources", c.scene.stamp_sources);
        maybe(s, "pulse_duration", c.scene.pulse_duration);
        maybe(s, "pulse_power", c.scene.pulse_power);
        maybe(s, "t_avg", c.scene.t_avg);
        maybe(s, "num_sources", c.scene.num_sources);
        if (s.contains("sources")) {
            const json& src = s.at("sources");
            if (src.is_string()) {
                std::string mode = src.get<std::string>();
                if (mode == "table") c.scene.source_mode = SceneConfig::Sources::Table;
                else if (mode == "rooftops") c.scene.source_mode = SceneConfig::Sources::Rooftops;
                else throw std::invalid_argument("config: sources must be table|rooftops|array");
            } else {
                c.scene.source_mode = SceneConfig::Sources::Explicit;
                for (const auto& p : src) c.scene.explicit_sources.push_back(vec3_from(p));
            }
        }
    }

    if (j.contains("array")) {
        const json& a = j.at("array");
        maybe(a, "elements", c.array_elements);
        maybe(a, "radius", c.array_radius);
        maybe(a, "carrier_freq", c.carrier_freq);
    }
    maybe(j, "sample_rate", c.sample_rate);

    if (j.contains("trajectory")) {
        const json& t = j.at("trajectory");
        if (t.contains("initial_position")) c.initial_position = vec3_from(t.at("initial_position"));
        if (t.contains("velocity")) c.velocity = vec3_from(t.at("velocity"));
        maybe(t, "t0", c.t0);
        maybe(t, "window_duration", c.window_duration);
    }

    if (j.contains("detector")) {
        const json& d = j.at("detector");
        maybe(d, "p0", c.detector.p0);
        maybe(d, "diff_max", c.detector.diff_max);
        maybe(d, "l_adj", c.detector.l_adj);
        maybe(d, "max_iters", c.detector.max_iters);
    }

    if (j.contains("grid")) {
        const json& g = j.at("grid");
        double tmin = rad2deg(c.theta_min), tmax = rad2deg(c.theta_max);
        double tstep = rad2deg(c.theta_step), pstep = rad2deg(c.phi_step);
        maybe(g, "theta_min_deg", tmin);
        maybe(g, "theta_max_deg", tmax);
        maybe(g, "theta_step_deg", tstep);
        maybe(g, "phi_step_deg", pstep);
        c.theta_min = deg2rad(tmin);
        c.theta_max = deg2rad(tmax);
        c.theta_step = deg2rad(tstep);
        c.phi_step = deg2rad(pstep);
    }

    if (j.contains("refiner")) {
        const json& r = j.at("refiner");
        maybe(r, "eps_aoa", c.refiner.eps_aoa);
        maybe(r, "max_iters", c.refiner.max_iters);
        maybe(r, "l_max", c.refiner.l_max);
        double eps_phi_deg = rad2deg(c.refiner.smoother.eps_phi);
        maybe(r, "eps_phi_deg", eps_phi_deg);
        c.refiner.smoother.eps_phi = deg2rad(eps_phi_deg);
        maybe(r, "zoom_levels", c.zoom_levels);
        maybe(r, "zoom_factor", c.zoom_factor);
    }
    c.refiner.smoother.diff_max = c.detector.diff_max;
    c.refiner.smoother.l_adj = c.detector.l_adj;
    if (j.contains("refiner")) {
        const json& r = j.at("refiner");
        maybe(r, "smoother_diff_max", c.refiner.smoother.diff_max);
        maybe(r, "smoother_l_adj", c.refiner.smoother.l_adj);
    }

    if (j.contains("tracker")) {
        const json& t = j.at("tracker");
        double xi_deg = rad2deg(std::acos(c.tracker.xi));
        maybe(t, "xi_deg", xi_deg);
        c.tracker.xi = std::cos(deg2rad(xi_deg));
        maybe(t, "t_death", c.tracker.t_death);
        maybe(t, "eps_loc", c.tracker.gp.eps_loc);
        maybe(t, "max_iters", c.tracker.gp.max_iters);
    }

    if (j.contains("imperfections")) {
        const json& im = j.at("imperfections");
        maybe(im, "loc", c.imperfect_location);
        maybe(im, "dir", c.imperfect_direction);
        maybe(im, "map", c.imperfect_map);
        maybe(im, "loc_sd", c.location_error_sd);
        double dir_sd_deg = rad2deg(c.direction_error_sd);
        maybe(im, "dir_sd_deg", dir_sd_deg);
        c.direction_error_sd = deg2rad(dir_sd_deg);
    }

    if (j.contains("metrics")) {
        const json& m = j.at("metrics");
        double angle_deg = rad2deg(c.angle_match_tol);
        maybe(m, "angle_match_deg", angle_deg);
        c.angle_match_tol = deg2rad(angle_deg);
        maybe(m, "position_match_m", c.position_match_tol);
        maybe(m, "min_detection_frac", c.min_detection_frac);
    }

    maybe(j, "music_only", c.music_only);
    maybe(j, "detector_only", c.detector_only);
    maybe(j, "epsilon_model", c.epsilon_model_path);
    maybe(j, "output_dir", c.output_dir);
    c.validate();
    return c;
}

RunConfig config_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_json_text(ss.str());
}

std::string config_to_json_text(const RunConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["trials"] = c.trials;
    j["windows"] = c.windows;
    j["snr_star_db"] = c.snr_star_db;
    json s;
    s["kind"] = c.scene.kind == SceneConfig::Kind::City ? "city" : "flat";
    s["extent"] = c.scene.extent;
    s["cell_size"] = c.scene.cell_size;
    s["building_w"] = c.scene.building_w;
    s["building_d"] = c.scene.building_d;
    s["height_min"] = c.scene.height_min;
    s["height_max"] = c.scene.height_max;
    s["flat_height"] = c.scene.flat_height;
    s["map_seed"] = c.scene.map_seed;
    s["stamp_sources"] = c.scene.stamp_sources;
    s["pulse_duration"] = c.scene.pulse_duration;
    s["pulse_power"] = c.scene.pulse_power;
    s["t_avg"] = c.scene.t_avg;
    s["num_sources"] = c.scene.num_sources;
    switch (c.scene.source_mode) {
        case SceneConfig::Sources::Table: s["sources"] = "table"; break;
        case SceneConfig::Sources::Rooftops: s["sources"] = "rooftops"; break;
        case SceneConfig::Sources::Explicit: {
            json arr = json::array();
            for (const auto& p : c.scene.explicit_sources) arr.push_back(vec3_to(p));
            s["sources"] = arr;
            break;
        }
    }
    j["scene"] = s;
    j["array"] = {{"elements", c.array_elements}, {"radius", c.array_radius},
                  {"carrier_freq", c.carrier_freq}};
    j["sample_rate"] = c.sample_rate;
    j["trajectory"] = {{"initial_position", vec3_to(c.initial_position)},
                       {"velocity", vec3_to(c.velocity)},
                       {"t0", c.t0},
                       {"window_duration", c.window_duration}};
    j["detector"] = {{"p0", c.detector.p0},
                     {"diff_max", c.detector.diff_max},
                     {"l_adj", c.detector.l_adj},
                     {"max_iters", c.detector.max_iters}};
    j["grid"] = {{"theta_min_deg", rad2deg(c.theta_min)},
                 {"theta_max_deg", rad2deg(c.theta_max)},
                 {"theta_step_deg", rad2deg(c.theta_step)},
                 {"phi_step_deg", rad2deg(c.phi_step)}};
    j["refiner"] = {{"eps_aoa", c.refiner.eps_aoa},
                    {"max_iters", c.refiner.max_iters},
                    {"l_max", c.refiner.l_max},
                    {"eps_phi_deg", rad2deg(c.refiner.smoother.eps_phi)},
                    {"smoother_diff_max", c.refiner.smoother.diff_max},
                    {"smoother_l_adj", c.refiner.smoother.l_adj},
                    {"zoom_levels", c.zoom_levels},
                    {"zoom_factor", c.zoom_factor}};
    j["tracker"] = {{"xi_deg", rad2deg(std::acos(c.tracker.xi))},
                    {"t_death", c.tracker.t_death},
                    {"eps_loc", c.tracker.gp.eps_loc},
                    {"max_iters", c.tracker.gp.max_iters}};
    j["imperfections"] = {{"loc", c.imperfect_location},
                          {"dir", c.imperfect_direction},
                          {"map", c.imperfect_map},
                          {"loc_sd", c.location_error_sd},
                          {"dir_sd_deg", rad2deg(c.direction_error_sd)}};
    j["metrics"] = {{"angle_match_deg", rad2deg(c.angle_match_tol)},
                    {"position_match_m", c.position_match_tol},
                    {"min_detection_frac", c.min_detection_frac}};
    j["music_only"] = c.music_only;
    j["detector_only"] = c.detector_only;
    j["epsilon_model"] = c.epsilon_model_path;
    j["output_dir"] = c.output_dir;
    return j.dump(2);
}

BuiltScene build_scene(const RunConfig& cfg) {
    CityMap map = [&] {
        if (cfg.scene.kind == SceneConfig::Kind::Flat)
            return flat_map(cfg.scene.extent, cfg.scene.flat_height,
                            std::max(cfg.scene.cell_size, 1.0));
        CityMapParams p;
        p.extent = cfg.scene.extent;
        p.building_w = cfg.scene.building_w;
        p.building_d = cfg.scene.building_d;
        p.height_min = cfg.scene.height_min;
        p.height_max = cfg.scene.height_max;
        p.cell_size = cfg.scene.cell_size;
        return build_city_map(cfg.scene.map_seed, p);
    }();

    SourceSet sources = [&] {
        switch (cfg.scene.source_mode) {
            case SceneConfig::Sources::Table:
                return make_source_set(default_source_positions(), cfg.scene.pulse_duration,
                                       cfg.scene.pulse_power, cfg.scene.t_avg);
            case SceneConfig::Sources::Explicit:
                return make_source_set(cfg.scene.explicit_sources, cfg.scene.pulse_duration,
                                       cfg.scene.pulse_power, cfg.scene.t_avg);
            case SceneConfig::Sources::Rooftops:
            default:
                return sample_rooftop_sources(map, cfg.scene.num_sources,
                                              derive_seed(cfg.seed, 0x50F7ull), cfg.scene.pulse_duration,
                                              cfg.scene.pulse_power, cfg.scene.t_avg);
        }
    }();

    if (cfg.scene.stamp_sources && cfg.scene.source_mode != SceneConfig::Sources::Rooftops)
        map = stamp_sources(map, sources, cfg.scene.building_w / 2.0, cfg.scene.building_d / 2.0);

    BuiltScene out{
        map,
        cfg.imperfect_map ? flat_map(cfg.scene.extent, 0.0, std::max(cfg.scene.cell_size, 10.0))
                          : map,
        sources,
        uniform_circular_array(cfg.array_elements, cfg.array_radius, cfg.carrier_freq),
        Trajectory(cfg.initial_position, cfg.velocity, cfg.t0, cfg.window_duration, cfg.windows),
        0.0};
    out.noise_var = noise_variance_for_snr_star(
        sources, array_position_at(out.trajectory, cfg.t0), cfg.snr_star_db);
    return out;
}

AoaMatch match_aoas(const std::vector<std::pair<double, double>>& estimates,
                    const std::vector<std::pair<double, double>>& truth, double tol) {
    auto dir = [](const std::pair<double, double>& a) {
        return unit_direction(a.first, a.second);
    };
    std::vector<char> e_used(estimates.size(), 0), t_used(truth.size(), 0);
    AoaMatch out;
    while (true) {
        double best = tol;
        int be = -1, bt = -1;
        for (std::size_t e = 0; e < estimates.size(); ++e) {
            if (e_used[e]) continue;
            for (std::size_t t = 0; t < truth.size(); ++t) {
                if (t_used[t]) continue;
                double d = std::acos(std::clamp(dir(estimates[e]).dot(dir(truth[t])), -1.0, 1.0));
                if (d < best) {
                    best = d;
                    be = static_cast<int>(e);
                    bt = static_cast<int>(t);
                }
            }
        }
        if (be < 0) break;
        e_used[be] = 1;
        t_used[bt] = 1;
        out.pairs.emplace_back(be, bt);
        out.elev_err.push_back(estimates[be].first - truth[bt].first);
        out.azim_err.push_back(wrap_pi(estimates[be].second - truth[bt].second));
    }
    return out;
}

PositionMatch match_positions(const std::vector<Vector3d>& estimates,
                              const std::vector<Vector3d>& truth, double radius) {
    std::vector<char> e_used(estimates.size(), 0), t_used(truth.size(), 0);
    PositionMatch out;
    while (true) {
        double best = radius;
        int be = -1, bt = -1;
        for (std::size_t e = 0; e < estimates.size(); ++e) {
            if (e_used[e]) continue;
            for (std::size_t t = 0; t < truth.size(); ++t) {
                if (t_used[t]) continue;
                double d = (estimates[e] - truth[t]).norm();
                if (d < best) {
                    best = d;
                    be = static_cast<int>(e);
                    bt = static_cast<int>(t);
                }
            }
        }
        if (be < 0) break;
        e_used[be] = 1;
        t_used[bt] = 1;
        out.pairs.emplace_back(be, bt);
        out.err.push_back((estimates[be] - truth[bt]).norm());
    }
    out.spurious = static_cast<int>(std::count(e_used.begin(), e_used.end(), 0));
    out.missed = static_cast<int>(std::count(t_used.begin(), t_used.end(), 0));
    return out;
}

namespace {

#ifndef AOALOC_DATA_DIR
#define AOALOC_DATA_DIR "."
#endif

EpsilonModel load_epsilon_model(const RunConfig& cfg) {
    std::string path = cfg.epsilon_model_path.empty()
                           ? std::string(AOALOC_DATA_DIR) + "/epsilon_model.csv"
                           : cfg.epsilon_model_path;
    return EpsilonModel::load_csv(path);
}

struct TrialRecord {
    // [window][pair] matched errors, keyed by true source for the
    // sufficient-detections rule.
    std::vector<std::vector<std::pair<int, double>>> elev;  // (source, err)
    std::vector<std::vector<std::pair<int, double>>> azim;
    std::vector<std::vector<double>> loc_err;
    std::vector<int> matched, missed, spurious;
    std::vector<int> rough_count, refined_count;
    std::vector<int> detect_per_source;      // windows where source matched
    std::vector<double> final_reliability;   // per true source (matched track)
    int reliable_tracks = 0;
};

}  // namespace

std::string MetricsReport::to_csv() const {
    std::ostringstream out;
    out << "window,rough_aoas,refined_aoas,elev_rmse_deg,azim_rmse_deg,loc_rmse_m,matched,missed,"
           "spurious\n";
    for (int w = 0; w < windows; ++w) {
        out << (w + 1) << "," << fmt_double(rough_aoa_count[w]) << ","
            << fmt_double(refined_aoa_count[w]) << ","
            << fmt_double(std::isnan(elev_rmse[w]) ? -1.0 : rad2deg(elev_rmse[w])) << ","
            << fmt_double(std::isnan(azim_rmse[w]) ? -1.0 : rad2deg(azim_rmse[w])) << ","
            << fmt_double(std::isnan(loc_rmse[w]) ? -1.0 : loc_rmse[w]) << "," << matched[w] << ","
            << missed[w] << "," << spurious[w] << "\n";
    }
    return out.str();
}

MetricsReport run_pipeline(const RunConfig& cfg) {
    cfg.validate();
    auto t_begin = std::chrono::steady_clock::now();

    BuiltScene scene = build_scene(cfg);
    AngleGrid grid = cfg.make_grid();
    EpsilonModel model;
    if (!cfg.detector_only) model = load_epsilon_model(cfg);

    const int n_src = scene.sources.count();
    const int n_win = cfg.windows;
    std::vector<TrialRecord> records(cfg.trials);

    const bool artifacts = !cfg.output_dir.empty();
    if (artifacts) std::filesystem::create_directories(cfg.output_dir);
    std::ostringstream aoa_csv, track_csv, det_csv, kept_csv;
    aoa_csv << "trial,window,kind,tag,theta_deg,phi_deg\n";
    track_csv << "trial,window,id,x,y,z,reliability,hist\n";
    det_csv << "trial,window,kept,iterations,sigma_est,sigma_true,gamma_est_db,gamma_true_db\n";
    kept_csv << "window,column,energy\n";

    MetricsReport report;
    report.windows = n_win;
    report.trials = cfg.trials;

    for (int trial = 0; trial < cfg.trials; ++trial) {
        TrialRecord& rec = records[trial];
        rec.elev.resize(n_win);
        rec.azim.resize(n_win);
        rec.loc_err.resize(n_win);
        rec.matched.assign(n_win, 0);
        rec.missed.assign(n_win, 0);
        rec.spurious.assign(n_win, 0);
        rec.rough_count.assign(n_win, 0);
        rec.refined_count.assign(n_win, 0);
        rec.detect_per_source.assign(n_src, 0);
        rec.final_reliability.assign(n_src, 0.0);

        SynthConfig synth_cfg;
        synth_cfg.sample_rate = cfg.sample_rate;
        synth_cfg.position_error = cfg.imperfect_location;
        synth_cfg.position_error_sd = cfg.location_error_sd;
        synth_cfg.yaw_error = cfg.imperfect_direction;
        synth_cfg.yaw_error_sd = cfg.direction_error_sd;
        synth_cfg.master_seed = derive_seed(cfg.seed, 0x2EA1ull, trial);

        NoiseModel noise{scene.noise_var, derive_seed(cfg.seed, 0x015Eull, trial)};
        WindowSynthesizer synth(scene.geometry, scene.trajectory, scene.sources, noise, synth_cfg);
        TrackerState tracker(cfg.tracker);

        for (int w = 1; w <= n_win; ++w) {
            WindowTruth truth;
            WindowCapture cap = synth.synthesize(w, &truth);
            const double t_mid = cap.midpoint_time;
            const Vector3d r_reported = cap.pose.position;

            DetectionResult det = detect(cap.samples, cfg.detector);
            {
                DetectorWindowStats st;
                st.trial = trial;
                st.window = w;
                st.kept = static_cast<int>(det.kept_indices.size());
                st.iterations = det.iterations;
                st.sigma_est = det.noise_var;
                st.sigma_true = scene.noise_var;
                double sig = 0.0, noi = 0.0;
                for (int c : det.kept_indices) {
                    sig += truth.noise_free.col(c).squaredNorm();
                    noi += truth.noise.col(c).squaredNorm();
                }
                double g_true = noi > 0.0 ? sig / noi : std::numeric_limits<double>::infinity();
                st.gamma_true_db = 10.0 * std::log10(std::max(g_true, 1e-12));
                st.gamma_est_db = 10.0 * std::log10(std::max(det.inst_snr_raw, 1e-12));
                report.detector_stats.push_back(st);
                if (artifacts) {
                    det_csv << trial << "," << w << "," << st.kept << "," << st.iterations << ","
                            << fmt_double(st.sigma_est) << "," << fmt_double(st.sigma_true) << ","
                            << fmt_double(st.gamma_est_db) << "," << fmt_double(st.gamma_true_db)
                            << "\n";
                    if (trial == 0)
                        kept_csv << detection_csv_rows(w, det.kept_indices, det.filtered);
                }
            }
            if (cfg.detector_only) continue;

            std::vector<std::pair<double, double>> refined;
            std::vector<ColumnTag> refined_tags;
            int rough_n = 0;
            if (!det.kept_indices.empty()) {
                MatrixXcd scm = sample_covariance(det.filtered);
                int order = mdl_order(scm_eigenvalues_desc(scm),
                                      static_cast<Eigen::Index>(det.kept_indices.size()));
                PeakList peaks;
                if (order > 0) peaks = pick_peaks(music_spectrum(scm, order, scene.geometry, grid), order);
                rough_n = static_cast<int>(peaks.angles.size());

                if (cfg.music_only) {
                    refined = peaks.angles;
                    refined_tags.assign(refined.size(), ColumnTag{ColumnTag::NewCandidate, 0});
                } else {
                    DirectionBank bank = tracker.direction_bank(r_reported);
                    std::vector<Vector3d> new_dirs;
                    for (const auto& [th, ph] : peaks.angles) new_dirs.push_back(unit_direction(th, ph));
                    std::vector<Vector3d> kept = gate_new_directions(new_dirs, bank, cfg.tracker.xi);
                    if (bank.count() + static_cast<int>(kept.size()) > 0) {
                        ManifoldEstimate a0 = initial_manifold(bank, kept, scene.geometry);
                        RefineResult rr = refine_manifold(det.filtered, det.kept_indices, a0,
                                                          det.noise_var, det.inst_snr, model,
                                                          cfg.refiner);
                        if (!rr.empty) {
                            refined = read_aoas_zoomed(rr.manifold, grid, scene.geometry,
                                                       cfg.zoom_levels, cfg.zoom_factor);
                            refined_tags = rr.manifold.tags;
                        }
                    }
                }
            }
            rec.rough_count[w - 1] = rough_n;
            rec.refined_count[w - 1] = static_cast<int>(refined.size());
            report.max_rough_per_window = std::max(report.max_rough_per_window, rough_n);

            std::vector<Vector3d> dirs;
            for (const auto& [th, ph] : refined) dirs.push_back(unit_direction(th, ph));
            tracker.assign_and_update(dirs, r_reported, t_mid, scene.loc_map);

            // AOA metrics against truth at the true pose.
            AoaMatch am = match_aoas(refined, truth.aoas, cfg.angle_match_tol);
            for (std::size_t k = 0; k < am.pairs.size(); ++k) {
                int src = am.pairs[k].second;
                rec.elev[w - 1].emplace_back(src, am.elev_err[k]);
                rec.azim[w - 1].emplace_back(src, am.azim_err[k]);
                rec.detect_per_source[src] += 1;
            }

            // Localization metrics over tracks that have positions.
            std::vector<Vector3d> track_pos;
            std::vector<int> track_ids;
            for (const auto& [id, trk] : tracker.tracks()) {
                if (trk.position) {
                    track_pos.push_back(*trk.position);
                    track_ids.push_back(id);
                }
            }
            PositionMatch pm = match_positions(track_pos, scene.sources.positions,
                                               cfg.position_match_tol);
            rec.loc_err[w - 1] = pm.err;
            rec.matched[w - 1] = static_cast<int>(pm.pairs.size());
            rec.missed[w - 1] = pm.missed;
            rec.spurious[w - 1] = pm.spurious;

            if (w == n_win) {
                for (const auto& pr : pm.pairs) {
                    const SourceTrack& trk = tracker.tracks().at(track_ids[pr.first]);
                    rec.final_reliability[pr.second] = trk.reliability;
                }
                for (const auto& [id, trk] : tracker.tracks())
                    if (trk.reliability > 0.5) rec.reliable_tracks += 1;
            }

            if (artifacts) {
                for (std::size_t k = 0; k < refined.size(); ++k) {
                    const char* kind = cfg.music_only ? "rough"
                                       : refined_tags[k].kind == ColumnTag::Tracked ? "tracked"
                                                                                    : "new";
                    aoa_csv << trial << "," << w << "," << kind << "," << refined_tags[k].id << ","
                            << fmt_double(rad2deg(refined[k].first)) << ","
                            << fmt_double(rad2deg(refined[k].second)) << "\n";
                }
                for (const auto& [id, trk] : tracker.tracks()) {
                    Vector3d p = trk.position.value_or(Vector3d(0, 0, 0));
                    track_csv << trial << "," << w << "," << id << "," << fmt_double(p.x()) << ","
                              << fmt_double(p.y()) << "," << fmt_double(p.z()) << ","
                              << fmt_double(trk.reliability) << "," << trk.hist << "\n";
                }
            }
        }
    }

    // Sufficient-detections rule per trial: keep sources detected at least
    // min_detection_frac of the most-detected source's count.
    report.rough_aoa_count.assign(n_win, 0.0);
    report.refined_aoa_count.assign(n_win, 0.0);
    report.elev_rmse.assign(n_win, std::numeric_limits<double>::quiet_NaN());
    report.azim_rmse.assign(n_win, std::numeric_limits<double>::quiet_NaN());
    report.loc_rmse.assign(n_win, std::numeric_limits<double>::quiet_NaN());
    report.matched.assign(n_win, 0);
    report.missed.assign(n_win, 0);
    report.spurious.assign(n_win, 0);
    report.mean_reliability.assign(n_src, 0.0);

    std::vector<double> elev_sq(n_win, 0.0), azim_sq(n_win, 0.0), loc_sq(n_win, 0.0);
    std::vector<int> elev_n(n_win, 0), loc_n(n_win, 0);
    for (const TrialRecord& rec : records) {
        int max_det = *std::max_element(rec.detect_per_source.begin(), rec.detect_per_source.end());
        std::vector<char> include(n_src, 1);
        if (max_det > 0 && !cfg.music_only) {
            for (int s = 0; s < n_src; ++s)
                include[s] = rec.detect_per_source[s] >=
                             cfg.min_detection_frac * static_cast<double>(max_det);
        }
        for (int w = 0; w < n_win; ++w) {
            report.rough_aoa_count[w] += rec.rough_count[w];
            report.refined_aoa_count[w] += rec.refined_count[w];
            for (const auto& [src, err] : rec.elev[w]) {
                if (!include[src]) continue;
                elev_sq[w] += err * err;
                elev_n[w] += 1;
            }
            for (const auto& [src, err] : rec.azim[w])
                if (include[src]) azim_sq[w] += err * err;
            for (double e : rec.loc_err[w]) {
                loc_sq[w] += e * e;
                loc_n[w] += 1;
            }
            report.matched[w] += rec.matched[w];
            report.missed[w] += rec.missed[w];
            report.spurious[w] += rec.spurious[w];
        }
        for (int s = 0; s < n_src; ++s) report.mean_reliability[s] += rec.final_reliability[s];
        report.reliable_tracks_per_trial.push_back(rec.reliable_tracks);
    }
    for (int w = 0; w < n_win; ++w) {
        report.rough_aoa_count[w] /= cfg.trials;
        report.refined_aoa_count[w] /= cfg.trials;
        if (elev_n[w] > 0) {
            report.elev_rmse[w] = std::sqrt(elev_sq[w] / elev_n[w]);
            report.azim_rmse[w] = std::sqrt(azim_sq[w] / elev_n[w]);
        }
        if (loc_n[w] > 0) report.loc_rmse[w] = std::sqrt(loc_sq[w] / loc_n[w]);
    }
    for (int s = 0; s < n_src; ++s) report.mean_reliability[s] /= cfg.trials;

    report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();

    if (artifacts) {
        write_text_file(cfg.output_dir + "/aoas.csv", aoa_csv.str());
        write_text_file(cfg.output_dir + "/tracks.csv", track_csv.str());
        write_text_file(cfg.output_dir + "/detector.csv", det_csv.str());
        write_text_file(cfg.output_dir + "/detections.csv", kept_csv.str());
        write_text_file(cfg.output_dir + "/metrics.csv", report.to_csv());
        write_map_csv(scene.map, cfg.output_dir + "/map.csv");

        std::vector<SvgSeries> rmse_series(2);
        rmse_series[0].label = "elevation RMSE (deg)";
        rmse_series[1].label = "azimuth RMSE (deg)";
        SvgSeries loc_series;
        loc_series.label = "localization RMSE (m)";
        for (int w = 0; w < n_win; ++w) {
            if (!std::isnan(report.elev_rmse[w])) {
                rmse_series[0].x.push_back(w + 1);
                rmse_series[0].y.push_back(rad2deg(report.elev_rmse[w]));
                rmse_series[1].x.push_back(w + 1);
                rmse_series[1].y.push_back(rad2deg(report.azim_rmse[w]));
            }
            if (!std::isnan(report.loc_rmse[w])) {
                loc_series.x.push_back(w + 1);
                loc_series.y.push_back(report.loc_rmse[w]);
            }
        }
        write_text_file(cfg.output_dir + "/aoa_rmse.svg",
                        svg_line_chart(rmse_series, "AOA estimation RMSE", "window", "RMSE"));
        write_text_file(cfg.output_dir + "/loc_rmse.svg",
                        svg_line_chart({loc_series}, "Localization RMSE", "window", "RMSE (m)"));
    }
    return report;
}

}  // namespace aoaloc
