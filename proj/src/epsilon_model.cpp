#include "aoaloc/epsilon_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "aoaloc/signal.hpp"
#include "aoaloc/sparse.hpp"

namespace aoaloc {

EpsilonModel::EpsilonModel(std::map<int, Fit> fits, double gamma_db_min, double gamma_db_max,
                           std::string metadata)
    : fits_(std::move(fits)), gamma_db_min_(gamma_db_min), gamma_db_max_(gamma_db_max),
      metadata_(std::move(metadata)) {
    if (fits_.empty()) throw std::invalid_argument("EpsilonModel: no fits");
}

double EpsilonModel::f_tabulated(int n, double gamma_db) const {
    auto eval = [&](const Fit& fit) {
        double acc = 0.0, p = 1.0;
        for (int j = 0; j < 5; ++j) {
            acc += fit.coeffs[j] * p;
            p *= gamma_db;
        }
        return std::pow(10.0, acc);
    };
    auto it = fits_.find(n);
    if (it != fits_.end()) return eval(it->second);
    // Non-contiguous table: interpolate linearly between bracketing entries.
    auto hi = fits_.lower_bound(n);
    auto lo = std::prev(hi);
    double f_lo = eval(lo->second), f_hi = eval(hi->second);
    double t = static_cast<double>(n - lo->first) / (hi->first - lo->first);
    return (1.0 - t) * f_lo + t * f_hi;
}

double EpsilonModel::f(int n, double gamma) const {
    if (n < 1) throw std::invalid_argument("EpsilonModel::f: n must be >= 1");
    if (!(gamma > 0.0)) throw std::invalid_argument("EpsilonModel::f: gamma must be > 0");
    double gdb = 10.0 * std::log10(gamma);
    gdb = std::clamp(gdb, gamma_db_min_, gamma_db_max_);

    const int lo = n_min(), hi = n_max();
    double val;
    if (n >= lo && n <= hi) {
        val = f_tabulated(n, gdb);
    } else if (fits_.size() == 1) {
        val = f_tabulated(lo, gdb);
    } else if (n > hi) {
        double f_hi = f_tabulated(hi, gdb), f_prev = f_tabulated(hi - 1, gdb);
        val = (n - (hi - 1)) * f_hi - (n - hi) * f_prev;
    } else {  // n < lo, e.g. the single-source rule 2 f(2) - f(3)
        double f_lo = f_tabulated(lo, gdb), f_next = f_tabulated(lo + 1, gdb);
        val = (1 + (lo - n)) * f_lo - (lo - n) * f_next;
    }
    return std::max(0.0, val);
}

double EpsilonModel::epsilon_opt(int n, double gamma, int m, double e_avg,
                                 double noise_var) const {
    double fv = f(n, gamma);
    return std::sqrt(std::max(0.0, fv * m * e_avg + m * noise_var));
}

void EpsilonModel::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("EpsilonModel::save_csv: cannot open " + path);
    out.precision(17);
    out << "# gamma_db_min=" << gamma_db_min_ << " gamma_db_max=" << gamma_db_max_ << " "
        << metadata_ << "\n";
    out << "N,P0,P1,P2,P3,P4,fit_residual_rms\n";
    for (const auto& [n, fit] : fits_) {
        out << n;
        for (double c : fit.coeffs) out << "," << c;
        out << "," << fit.residual_rms << "\n";
    }
}

EpsilonModel EpsilonModel::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("EpsilonModel::load_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("EpsilonModel::load_csv: empty file");

    double gmin = 2.0, gmax = 21.0;
    std::string meta;
    if (!line.empty() && line[0] == '#') {
        std::istringstream hs(line.substr(1));
        std::string tok;
        while (hs >> tok) {
            if (tok.rfind("gamma_db_min=", 0) == 0) gmin = std::stod(tok.substr(13));
            else if (tok.rfind("gamma_db_max=", 0) == 0) gmax = std::stod(tok.substr(13));
            else meta += (meta.empty() ? "" : " ") + tok;
        }
        std::getline(in, line);  // column header
    }

    std::map<int, Fit> fits;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
        if (vals.size() < 6) throw std::runtime_error("EpsilonModel::load_csv: malformed row");
        Fit fit;
        for (int j = 0; j < 5; ++j) fit.coeffs[j] = vals[1 + j];
        if (vals.size() > 6) fit.residual_rms = vals[6];
        fits[static_cast<int>(vals[0])] = fit;
    }
    return EpsilonModel(std::move(fits), gmin, gmax, meta);
}

namespace {

// Degree-4 least-squares fit of y against x.
EpsilonModel::Fit fit_quartic(const std::vector<double>& x, const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    MatrixXd v(n, 5);
    VectorXd rhs(n);
    for (int i = 0; i < n; ++i) {
        double p = 1.0;
        for (int j = 0; j < 5; ++j) {
            v(i, j) = p;
            p *= x[i];
        }
        rhs(i) = y[i];
    }
    VectorXd c = v.colPivHouseholderQr().solve(rhs);
    EpsilonModel::Fit fit;
    for (int j = 0; j < 5; ++j) fit.coeffs[j] = c(j);
    fit.residual_rms = std::sqrt((v * c - rhs).squaredNorm() / n);
    return fit;
}

MatrixXcd random_sparse_signals(int n, int t, std::mt19937_64& rng) {
    // Column sparsity levels 0..3 with probabilities .1, .65, .2, .05.
    static const double probs[4] = {0.1, 0.65, 0.2, 0.05};
    std::discrete_distribution<int> level(probs, probs + 4);
    MatrixXcd s = MatrixXcd::Zero(n, t);
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int c = 0; c < t; ++c) {
        int l = std::min(level(rng), n);
        std::vector<int> rows;
        while (static_cast<int>(rows.size()) < l) {
            int r = pick(rng);
            if (std::find(rows.begin(), rows.end(), r) == rows.end()) rows.push_back(r);
        }
        for (int r : rows) s(r, c) = complex_normal(rng, 1.0);
    }
    return s;
}

}  // namespace

CalibrationReport calibrate_f(const ArrayGeometry& geom, const CalibrationConfig& cfg) {
    if (cfg.trials < 1) throw std::invalid_argument("calibrate_f: trials must be >= 1");
    if (cfg.n_range.empty() || cfg.gamma_grid_db.empty())
        throw std::invalid_argument("calibrate_f: empty calibration grid");

    const int m = geom.num_elements();
    const int n_count = static_cast<int>(cfg.n_range.size());
    const int g_count = static_cast<int>(cfg.gamma_grid_db.size());

    // Epsilon sweep parametrized through f so the back-out is exact:
    // eps^2 = f_k M E_avg + M sigma^2.
    std::vector<double> f_sweep{0.0};
    for (int k = 0; k < cfg.sweep_points; ++k) {
        double t = cfg.sweep_points == 1 ? 0.0 : static_cast<double>(k) / (cfg.sweep_points - 1);
        f_sweep.push_back(cfg.sweep_f_min * std::pow(cfg.sweep_f_max / cfg.sweep_f_min, t));
    }

    // samples[ni][gi] -> per-trial optimal f.
    std::vector<std::vector<std::vector<double>>> samples(
        n_count, std::vector<std::vector<double>>(g_count, std::vector<double>(cfg.trials, 0.0)));

    for (int ni = 0; ni < n_count; ++ni) {
        const int n = cfg.n_range[ni];
        parallel_chunks(cfg.trials, [&](std::size_t t_lo, std::size_t t_hi) {
            for (std::size_t trial = t_lo; trial < t_hi; ++trial) {
                auto rng = make_rng(cfg.seed, 0xCA11ull, n, trial);

                // Random manifold with per-source attenuation folded in, so
                // the recovered coefficients are directly comparable to S.
                MatrixXcd dict(m, n);
                std::uniform_real_distribution<double> u01(0.0, 1.0);
                for (int c = 0; c < n; ++c) {
                    double cz = 2.0 * u01(rng) - 1.0;
                    double theta = std::acos(cz);
                    double phi = 2.0 * kPi * u01(rng);
                    double att_mag = 0.5 + 0.5 * u01(rng);
                    double att_ph = 2.0 * kPi * u01(rng);
                    dict.col(c) = steering_vector(geom, theta, phi) * std::polar(att_mag, att_ph);
                }
                MatrixXcd s = random_sparse_signals(n, cfg.columns, rng);
                MatrixXcd x = dict * s;
                double e_avg = x.squaredNorm() / static_cast<double>(m * cfg.columns);
                if (e_avg <= 0.0) e_avg = 1e-12;

                CombinationSolver solver(dict, cfg.l_max);
                const int l_cap = solver.max_level();

                for (int gi = 0; gi < g_count; ++gi) {
                    double gamma = std::pow(10.0, cfg.gamma_grid_db[gi] / 10.0);
                    double noise_var = e_avg / gamma;
                    std::vector<double> sweep_err(f_sweep.size(), 0.0);

                    for (int real = 0; real < cfg.noise_realizations; ++real) {
                        for (int c = 0; c < cfg.columns; ++c) {
                            VectorXcd y = x.col(c);
                            for (int k = 0; k < m; ++k) y(k) += complex_normal(rng, noise_var);

                            auto levels = solver.best_per_level(y);
                            double y_norm = y.norm();
                            // Outcome errors: zero column, then level 1..l_cap.
                            std::vector<double> err(l_cap + 1);
                            err[0] = s.col(c).squaredNorm();
                            for (int j = 0; j < l_cap; ++j) {
                                VectorXcd diff = -s.col(c);
                                for (std::size_t q = 0; q < levels[j].support.size(); ++q)
                                    diff(levels[j].support[q]) += levels[j].coeffs(q);
                                err[j + 1] = diff.squaredNorm();
                            }
                            for (std::size_t k = 0; k < f_sweep.size(); ++k) {
                                double eps = std::sqrt(f_sweep[k] * m * e_avg + m * noise_var);
                                int outcome = 0;
                                if (y_norm > eps) {
                                    outcome = l_cap;  // best l_max combination
                                    for (int j = 0; j < l_cap; ++j) {
                                        if (levels[j].residual <= eps) {
                                            outcome = j + 1;
                                            break;
                                        }
                                    }
                                }
                                sweep_err[k] += err[outcome];
                            }
                        }
                    }
                    std::size_t best = std::min_element(sweep_err.begin(), sweep_err.end()) -
                                       sweep_err.begin();
                    samples[ni][gi][trial] = f_sweep[best];
                }
            }
        });
    }

    // Outlier trim (1.5 IQR on log10 f) then average per cell.
    const double f_floor = cfg.sweep_f_min / 10.0;
    MatrixXd f_grid(n_count, g_count);
    for (int ni = 0; ni < n_count; ++ni) {
        for (int gi = 0; gi < g_count; ++gi) {
            std::vector<double> logs;
            for (double f : samples[ni][gi]) logs.push_back(std::log10(std::max(f, f_floor)));
            std::vector<double> sorted = logs;
            std::sort(sorted.begin(), sorted.end());
            double q1 = sorted[sorted.size() / 4];
            double q3 = sorted[(sorted.size() * 3) / 4];
            double lo = q1 - 1.5 * (q3 - q1), hi = q3 + 1.5 * (q3 - q1);
            double sum = 0.0;
            int kept = 0;
            for (std::size_t t = 0; t < logs.size(); ++t) {
                if (logs[t] < lo || logs[t] > hi) continue;
                sum += samples[ni][gi][t];
                ++kept;
            }
            if (kept == 0) throw std::runtime_error("calibrate_f: no trials survived outlier removal");
            f_grid(ni, gi) = sum / kept;
        }
    }

    std::map<int, EpsilonModel::Fit> fits;
    for (int ni = 0; ni < n_count; ++ni) {
        std::vector<double> ys;
        for (int gi = 0; gi < g_count; ++gi)
            ys.push_back(std::log10(std::max(f_grid(ni, gi), f_floor)));
        fits[cfg.n_range[ni]] = fit_quartic(cfg.gamma_grid_db, ys);
    }

    std::ostringstream meta;
    meta << "trials=" << cfg.trials << " columns=" << cfg.columns
         << " noise_realizations=" << cfg.noise_realizations << " sweep_points=" << cfg.sweep_points
         << " l_max=" << cfg.l_max << " seed=" << cfg.seed
         << " attenuation=diag_mag[0.5,1]_phase[0,2pi) outliers=1.5IQR_log10f";

    CalibrationReport report;
    report.model = EpsilonModel(std::move(fits), cfg.gamma_grid_db.front(),
                                cfg.gamma_grid_db.back(), meta.str());
    report.f_grid = std::move(f_grid);
    report.n_range = cfg.n_range;
    report.gamma_grid_db = cfg.gamma_grid_db;
    return report;
}

}  // namespace aoaloc
