#include "aoaloc/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace aoaloc {

std::string fmt_double(double v) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) return "nan";
    return std::string(buf, ptr);
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
}

void write_map_csv(const CityMap& map, const std::string& path) {
    std::ostringstream out;
    out << "# origin_x=" << fmt_double(map.origin().x()) << " origin_y="
        << fmt_double(map.origin().y()) << " cell_size=" << fmt_double(map.cell_size())
        << " nx=" << map.nx() << " ny=" << map.ny() << "\n";
    for (int iy = 0; iy < map.ny(); ++iy) {
        for (int ix = 0; ix < map.nx(); ++ix) {
            if (ix) out << ",";
            out << fmt_double(map.cell(ix, iy));
        }
        out << "\n";
    }
    write_text_file(path, out.str());
}

void write_spectrum_csv(const MusicSpectrum& spec, const std::string& path) {
    std::ostringstream out;
    out << "theta,phi,value\n";
    for (Eigen::Index u = 0; u < spec.values.rows(); ++u)
        for (Eigen::Index v = 0; v < spec.values.cols(); ++v)
            out << fmt_double(spec.grid.elevations[u]) << "," << fmt_double(spec.grid.azimuths[v])
                << "," << fmt_double(spec.values(u, v)) << "\n";
    write_text_file(path, out.str());
}

std::string detection_csv_rows(int window, const std::vector<int>& kept_indices,
                               const MatrixXcd& filtered) {
    std::ostringstream out;
    for (std::size_t k = 0; k < kept_indices.size(); ++k)
        out << window << "," << kept_indices[k] << ","
            << fmt_double(filtered.col(static_cast<Eigen::Index>(k)).squaredNorm()) << "\n";
    return out.str();
}

namespace {
template <typename T>
void put_le(std::ostream& out, T v) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));  // little-endian hosts only
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}
template <typename T>
T get_le(std::istream& in) {
    unsigned char bytes[sizeof(T)];
    in.read(reinterpret_cast<char*>(bytes), sizeof(T));
    T v;
    std::memcpy(&v, bytes, sizeof(T));
    return v;
}
}  // namespace

void write_window_binary(const WindowCapture& cap, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(cap.samples.rows()));
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(cap.samples.cols()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(cap.window_index));
    put_le<double>(out, cap.midpoint_time);
    for (Eigen::Index r = 0; r < cap.samples.rows(); ++r) {
        for (Eigen::Index c = 0; c < cap.samples.cols(); ++c) {
            put_le<double>(out, cap.samples(r, c).real());
            put_le<double>(out, cap.samples(r, c).imag());
        }
    }
}

WindowCapture read_window_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    auto m = get_le<std::uint32_t>(in);
    auto g = get_le<std::uint64_t>(in);
    WindowCapture cap;
    cap.window_index = static_cast<int>(get_le<std::uint32_t>(in));
    cap.midpoint_time = get_le<double>(in);
    cap.samples.resize(m, static_cast<Eigen::Index>(g));
    for (Eigen::Index r = 0; r < cap.samples.rows(); ++r) {
        for (Eigen::Index c = 0; c < cap.samples.cols(); ++c) {
            double re = get_le<double>(in);
            double im = get_le<double>(in);
            cap.samples(r, c) = cplx(re, im);
        }
    }
    if (!in) throw std::runtime_error("truncated window file: " + path);
    return cap;
}

void write_window_csv(const WindowCapture& cap, const std::string& path) {
    std::ostringstream out;
    out << "# window=" << cap.window_index << " midpoint=" << fmt_double(cap.midpoint_time) << "\n";
    for (Eigen::Index r = 0; r < cap.samples.rows(); ++r) {
        for (Eigen::Index c = 0; c < cap.samples.cols(); ++c) {
            if (c) out << ",";
            out << fmt_double(cap.samples(r, c).real()) << "+" << fmt_double(cap.samples(r, c).imag())
                << "j";
        }
        out << "\n";
    }
    write_text_file(path, out.str());
}

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

struct AxisRange {
    double lo = 0.0, hi = 1.0;
    void include(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
};

}  // namespace

std::string svg_line_chart(const std::vector<SvgSeries>& series, const std::string& title,
                           const std::string& x_label, const std::string& y_label) {
    const int w = 860, h = 520, ml = 70, mr = 30, mt = 40, mb = 55;
    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
    double y_lo = x_lo, y_hi = -x_lo;
    for (const auto& s : series) {
        for (double x : s.x) {
            x_lo = std::min(x_lo, x);
            x_hi = std::max(x_hi, x);
        }
        for (double y : s.y) {
            y_lo = std::min(y_lo, y);
            y_hi = std::max(y_hi, y);
        }
    }
    if (!(x_lo < x_hi)) {
        x_lo -= 1;
        x_hi += 1;
    }
    if (!(y_lo < y_hi)) {
        y_lo -= 1;
        y_hi += 1;
    }
    auto px = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * (w - ml - mr); };
    auto py = [&](double y) { return h - mb - (y - y_lo) / (y_hi - y_lo) * (h - mt - mb); };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" viewBox=\"0 0 " << w << " " << h << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"16\">" << title
      << "</text>\n";
    for (int i = 0; i <= 5; ++i) {
        double xv = x_lo + (x_hi - x_lo) * i / 5.0;
        double yv = y_lo + (y_hi - y_lo) * i / 5.0;
        s << "<line x1=\"" << px(xv) << "\" y1=\"" << mt << "\" x2=\"" << px(xv) << "\" y2=\""
          << h - mb << "\" stroke=\"#eee\"/>\n"
          << "<line x1=\"" << ml << "\" y1=\"" << py(yv) << "\" x2=\"" << w - mr << "\" y2=\""
          << py(yv) << "\" stroke=\"#eee\"/>\n"
          << "<text x=\"" << px(xv) << "\" y=\"" << h - mb + 18
          << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt_double(xv).substr(0, 8)
          << "</text>\n"
          << "<text x=\"" << ml - 6 << "\" y=\"" << py(yv) + 4
          << "\" text-anchor=\"end\" font-size=\"11\">" << fmt_double(yv).substr(0, 8)
          << "</text>\n";
    }
    s << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << w - ml - mr << "\" height=\""
      << h - mt - mb << "\" fill=\"none\" stroke=\"#333\"/>\n"
      << "<text x=\"" << w / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\" font-size=\"13\">"
      << x_label << "</text>\n"
      << "<text x=\"16\" y=\"" << h / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 " << h / 2 << ")\">"
      << y_label << "</text>\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& sr = series[i];
        const char* color = kPalette[i % 6];
        s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\" points=\"";
        for (std::size_t k = 0; k < sr.x.size(); ++k)
            s << px(sr.x[k]) << "," << py(sr.y[k]) << " ";
        s << "\"/>\n<text x=\"" << w - mr - 8 << "\" y=\"" << mt + 16 + 16 * i
          << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << color << "\">" << sr.label
          << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

std::string svg_heatmap(const MatrixXd& values, double x0, double y0, double cell,
                        const std::string& title) {
    const int nx = static_cast<int>(values.cols()), ny = static_cast<int>(values.rows());
    const int cw = std::max(2, 760 / std::max(nx, 1));
    const int w = nx * cw + 110, h = ny * cw + 70;
    double lo = values.minCoeff(), hi = values.maxCoeff();
    if (!(lo < hi)) hi = lo + 1.0;

    auto color = [&](double v) {
        double t = std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
        int r = static_cast<int>(255 * t);
        int b = static_cast<int>(255 * (1.0 - t));
        int g = static_cast<int>(90 * (1.0 - std::fabs(2 * t - 1)));
        std::ostringstream c;
        c << "rgb(" << r << "," << g << "," << b << ")";
        return c.str();
    };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">" << title
      << "</text>\n";
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix)
            s << "<rect x=\"" << 50 + ix * cw << "\" y=\"" << 40 + (ny - 1 - iy) * cw
              << "\" width=\"" << cw << "\" height=\"" << cw << "\" fill=\""
              << color(values(iy, ix)) << "\"/>\n";
    s << "<text x=\"50\" y=\"" << h - 10 << "\" font-size=\"11\">origin (" << fmt_double(x0) << ", "
      << fmt_double(y0) << "), cell " << fmt_double(cell) << " m, range [" << fmt_double(lo)
      << ", " << fmt_double(hi) << "]</text>\n</svg>\n";
    return s.str();
}

}  // namespace aoaloc
