#pragma once

#include "otfsradar/estimator.hpp"
#include "otfsradar/metrics.hpp"
#include "otfsradar/ofdm.hpp"
#include "otfsradar/types.hpp"

#include <string>
#include <vector>

namespace otfsradar::io {

/// One named curve for CSV/SVG output.
struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

// CSV. All numbers are written with %.17g so reruns are byte-identical.

/// Complex grid, one row per Doppler bin k, two columns (re, im) per delay bin l.
void write_frame_csv(const std::string& path, const DDFrame& frame);
void write_estimate_csv(const std::string& path, const DDEstimate& est);
DDFrame read_frame_csv(const std::string& path);

/// Magnitude map with range rows and a velocity-axis header row.
void write_map_csv(const std::string& path, const RangeDopplerMap& map);

/// Two columns: axis, magnitude_db.
void write_profile_csv(const std::string& path, const ProfileCut& cut);
ProfileCut read_profile_csv(const std::string& path);

/// One row per x value; columns: parameter then one per series.
void write_series_csv(const std::string& path, const std::string& x_name,
                      const std::vector<Series>& series);
std::vector<Series> read_series_csv(const std::string& path, std::string* x_name = nullptr);

/// Detections as JSON records {k, l, range_m, velocity_m_s, magnitude}.
void write_detections_json(const std::string& path, const std::vector<Detection>& detections,
                           const SystemConfig& cfg);

// Plots are a convenience view over the CSVs, never the source of truth.
void write_svg_plot(const std::string& path, const std::string& title, const std::string& x_label,
                    const std::string& y_label, const std::vector<Series>& series);

std::string format_double(double v);

}  // namespace otfsradar::io
