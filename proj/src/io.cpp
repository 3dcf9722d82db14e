#include "otfsradar/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace otfsradar::io {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read file: " + path);
    return in;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_frame_csv(const std::string& path, const DDFrame& frame) {
    auto out = open_out(path);
    out << "# rows: doppler bin k; per delay bin l two cells (re, im)\n";
    for (int k = 0; k < frame.num_doppler; ++k) {
        for (int l = 0; l < frame.num_delay; ++l) {
            if (l) out << ',';
            const Complex& v = frame.at(k, l);
            out << format_double(v.real()) << ',' << format_double(v.imag());
        }
        out << '\n';
    }
}

void write_estimate_csv(const std::string& path, const DDEstimate& est) {
    DDFrame view(est.num_doppler, est.num_delay);
    view.data = est.grid;
    write_frame_csv(path, view);
}

DDFrame read_frame_csv(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    std::vector<std::vector<Complex>> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto cells = split_csv_line(line);
        if (cells.size() % 2 != 0) throw std::runtime_error(path + ": odd cell count");
        std::vector<Complex> row;
        for (size_t i = 0; i < cells.size(); i += 2)
            row.emplace_back(std::stod(cells[i]), std::stod(cells[i + 1]));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error(path + ": empty frame");
    DDFrame frame(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (int k = 0; k < frame.num_doppler; ++k) {
        if (rows[k].size() != static_cast<size_t>(frame.num_delay))
            throw std::runtime_error(path + ": ragged rows");
        for (int l = 0; l < frame.num_delay; ++l) frame.at(k, l) = rows[k][l];
    }
    return frame;
}

void write_map_csv(const std::string& path, const RangeDopplerMap& map) {
    auto out = open_out(path);
    out << "range_m";
    for (int k = 0; k < map.num_doppler; ++k) out << ',' << format_double(map.velocity_m_s(k));
    out << '\n';
    for (int l = 0; l < map.num_range; ++l) {
        out << format_double(map.range_m(l));
        for (int k = 0; k < map.num_doppler; ++k) out << ',' << format_double(map.at(l, k));
        out << '\n';
    }
}

void write_profile_csv(const std::string& path, const ProfileCut& cut) {
    auto out = open_out(path);
    out << "axis,magnitude_db\n";
    for (size_t i = 0; i < cut.axis.size(); ++i)
        out << format_double(cut.axis[i]) << ',' << format_double(cut.magnitude_db[i]) << '\n';
}

ProfileCut read_profile_csv(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    std::getline(in, line);  // header
    ProfileCut cut;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 2) throw std::runtime_error(path + ": expected two columns");
        cut.axis.push_back(std::stod(cells[0]));
        cut.magnitude_db.push_back(std::stod(cells[1]));
    }
    return cut;
}

void write_series_csv(const std::string& path, const std::string& x_name,
                      const std::vector<Series>& series) {
    if (series.empty()) throw std::invalid_argument("write_series_csv: no series");
    auto out = open_out(path);
    out << x_name;
    for (const Series& s : series) out << ',' << s.name;
    out << '\n';
    const size_t rows = series[0].x.size();
    for (const Series& s : series)
        if (s.x.size() != rows || s.y.size() != rows)
            throw std::invalid_argument("write_series_csv: ragged series");
    for (size_t i = 0; i < rows; ++i) {
        out << format_double(series[0].x[i]);
        for (const Series& s : series) out << ',' << format_double(s.y[i]);
        out << '\n';
    }
}

std::vector<Series> read_series_csv(const std::string& path, std::string* x_name) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    const auto header = split_csv_line(line);
    if (header.size() < 2) throw std::runtime_error(path + ": expected header with series");
    if (x_name) *x_name = header[0];
    std::vector<Series> series(header.size() - 1);
    for (size_t i = 1; i < header.size(); ++i) series[i - 1].name = header[i];
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size()) throw std::runtime_error(path + ": ragged row");
        const double x = std::stod(cells[0]);
        for (size_t i = 1; i < cells.size(); ++i) {
            series[i - 1].x.push_back(x);
            series[i - 1].y.push_back(std::stod(cells[i]));
        }
    }
    return series;
}

void write_detections_json(const std::string& path, const std::vector<Detection>& detections,
                           const SystemConfig& cfg) {
    const GridResolutions res = derive_resolutions(cfg);
    nlohmann::json arr = nlohmann::json::array();
    for (const Detection& d : detections) {
        arr.push_back({{"k", d.doppler_bin},
                       {"l", d.delay_bin},
                       {"range_m", d.delay_bin * res.range_res_m},
                       {"velocity_m_s", signed_doppler_index(d.doppler_bin, cfg.num_doppler_bins) *
                                            res.velocity_res_m_s},
                       {"magnitude", d.magnitude}});
    }
    auto out = open_out(path);
    out << arr.dump(2) << '\n';
}

namespace {

constexpr int kWidth = 720, kHeight = 480;
constexpr int kMarginL = 70, kMarginR = 20, kMarginT = 40, kMarginB = 50;
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

struct AxisScale {
    double lo, hi;
    double map(double v, double px_lo, double px_hi) const {
        const double t = (hi > lo) ? (v - lo) / (hi - lo) : 0.5;
        return px_lo + t * (px_hi - px_lo);
    }
};

AxisScale fit_axis(const std::vector<Series>& series, bool use_x) {
    double lo = 0.0, hi = 1.0;
    bool first = true;
    for (const Series& s : series) {
        const auto& vals = use_x ? s.x : s.y;
        for (double v : vals) {
            if (!std::isfinite(v)) continue;
            if (first) {
                lo = hi = v;
                first = false;
            } else {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
    }
    if (hi - lo < 1e-12) {
        lo -= 1.0;
        hi += 1.0;
    }
    const double pad = 0.04 * (hi - lo);
    return {lo - pad, hi + pad};
}

}  // namespace

void write_svg_plot(const std::string& path, const std::string& title, const std::string& x_label,
                    const std::string& y_label, const std::vector<Series>& series) {
    auto out = open_out(path);
    const AxisScale xs = fit_axis(series, true);
    const AxisScale ys = fit_axis(series, false);
    const double x0 = kMarginL, x1 = kWidth - kMarginR;
    const double y0 = kHeight - kMarginB, y1 = kMarginT;  // y grows downward in SVG

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">"
        << title << "</text>\n";

    // frame and ticks
    out << "<rect x=\"" << x0 << "\" y=\"" << y1 << "\" width=\"" << x1 - x0 << "\" height=\""
        << y0 - y1 << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double fx = xs.lo + (xs.hi - xs.lo) * i / 5.0;
        const double fy = ys.lo + (ys.hi - ys.lo) * i / 5.0;
        const double px = xs.map(fx, x0, x1);
        const double py = ys.map(fy, y0, y1);
        char xbuf[32], ybuf[32];
        std::snprintf(xbuf, sizeof(xbuf), "%.4g", fx);
        std::snprintf(ybuf, sizeof(ybuf), "%.4g", fy);
        out << "<line x1=\"" << px << "\" y1=\"" << y0 << "\" x2=\"" << px << "\" y2=\"" << y0 + 4
            << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << px << "\" y=\"" << y0 + 18
            << "\" text-anchor=\"middle\" font-size=\"11\">" << xbuf << "</text>\n"
            << "<line x1=\"" << x0 - 4 << "\" y1=\"" << py << "\" x2=\"" << x0 << "\" y2=\"" << py
            << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << x0 - 8 << "\" y=\"" << py + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << ybuf << "</text>\n";
    }
    out << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 12
        << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label << "</text>\n"
        << "<text x=\"16\" y=\"" << (y0 + y1) / 2 << "\" text-anchor=\"middle\" font-size=\"13\" "
        << "transform=\"rotate(-90 16 " << (y0 + y1) / 2 << ")\">" << y_label << "</text>\n";

    for (size_t si = 0; si < series.size(); ++si) {
        const Series& s = series[si];
        const char* color = kColors[si % (sizeof(kColors) / sizeof(kColors[0]))];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.y[i])) continue;
            out << xs.map(s.x[i], x0, x1) << ',' << ys.map(s.y[i], y0, y1) << ' ';
        }
        out << "\"/>\n";
        out << "<text x=\"" << x1 - 8 << "\" y=\"" << y1 + 16 + 16 * si
            << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << color << "\">" << s.name
            << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace otfsradar::io
