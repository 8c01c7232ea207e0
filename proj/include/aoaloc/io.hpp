#ifndef AOALOC_IO_HPP
#define AOALOC_IO_HPP

#include <string>
#include <vector>

#include "aoaloc/common.hpp"
#include "aoaloc/rough_aoa.hpp"
#include "aoaloc/scene.hpp"
#include "aoaloc/signal.hpp"

namespace aoaloc {

// Shortest round-trip decimal rendering; identical across runs.
std::string fmt_double(double v);

void write_text_file(const std::string& path, const std::string& content);

// Height grid as CSV rows (y-major), preceded by a '#' metadata line with
// origin and cell size.
void write_map_csv(const CityMap& map, const std::string& path);

// theta,phi,value rows.
void write_spectrum_csv(const MusicSpectrum& spec, const std::string& path);

// One row per kept column: window, column index, column energy.
std::string detection_csv_rows(int window, const std::vector<int>& kept_indices,
                               const MatrixXcd& filtered);

// Little-endian binary block: u32 M, u64 G, u32 window index, f64 midpoint,
// then row-major (re, im) f64 pairs.
void write_window_binary(const WindowCapture& cap, const std::string& path);
WindowCapture read_window_binary(const std::string& path);

// Small blocks only: header row then one CSV row per element row, cells
// formatted as re+imj.
void write_window_csv(const WindowCapture& cap, const std::string& path);

// Minimal standalone SVG helpers for batch plot artifacts.
struct SvgSeries {
    std::string label;
    std::vector<double> x, y;
};
std::string svg_line_chart(const std::vector<SvgSeries>& series, const std::string& title,
                           const std::string& x_label, const std::string& y_label);
std::string svg_heatmap(const MatrixXd& values, double x0, double y0, double cell,
                        const std::string& title);

}  // namespace aoaloc

#endif
