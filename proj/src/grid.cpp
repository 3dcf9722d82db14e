#include "otfsradar/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace otfsradar {

namespace {
constexpr double kExactTapTolBins = 1e-6;
}

double SystemConfig::snr_db() const {
    return 10.0 * std::log10(symbol_power / noise_variance);
}

void SystemConfig::validate() const {
    std::ostringstream bad;
    if (num_delay_bins < 1) bad << "num_delay_bins must be >= 1; ";
    if (num_doppler_bins < 1) bad << "num_doppler_bins must be >= 1; ";
    if (!(bandwidth_hz > 0)) bad << "bandwidth_hz must be > 0; ";
    if (!(carrier_freq_hz > 0)) bad << "carrier_freq_hz must be > 0; ";
    if (!(symbol_power > 0)) bad << "symbol_power must be > 0; ";
    if (!(noise_variance >= 0)) bad << "noise_variance must be >= 0; ";
    if (cp_length_samples < 0 || cp_length_samples >= num_delay_bins)
        bad << "cp_length_samples must be in [0, num_delay_bins); ";
    if (!(speed_of_light_m_s > 0)) bad << "speed_of_light_m_s must be > 0; ";
    std::string msg = bad.str();
    if (!msg.empty()) throw ConfigError("invalid system config: " + msg);
}

GridResolutions derive_resolutions(const SystemConfig& cfg) {
    cfg.validate();
    const double df = cfg.subcarrier_spacing_hz();
    const double c = cfg.speed_of_light_m_s;
    GridResolutions r;
    r.delay_res_s = 1.0 / cfg.bandwidth_hz;
    r.doppler_res_hz = df / cfg.num_doppler_bins;
    r.range_res_m = c / (2.0 * cfg.bandwidth_hz);
    r.velocity_res_m_s = c * r.doppler_res_hz / (2.0 * cfg.carrier_freq_hz);
    r.max_unambiguous_range_m = c / (2.0 * df);
    r.max_unambiguous_velocity_m_s = c * df / (4.0 * cfg.carrier_freq_hz);
    return r;
}

void TapChannel::validate(const SystemConfig& cfg) const {
    std::set<std::pair<int, int>> seen;
    for (const Tap& t : taps) {
        if (t.doppler_bin < 0 || t.doppler_bin >= cfg.num_doppler_bins ||
            t.delay_bin < 0 || t.delay_bin >= cfg.num_delay_bins)
            throw std::invalid_argument("tap index out of grid range");
        if (!seen.insert({t.doppler_bin, t.delay_bin}).second)
            throw std::invalid_argument("duplicate (doppler, delay) tap");
    }
}

TapChannel scene_to_taps(std::span<const Target> scene, const SystemConfig& cfg, QuantizeMode mode) {
    cfg.validate();
    const GridResolutions res = derive_resolutions(cfg);
    const double c = cfg.speed_of_light_m_s;
    const int m_bins = cfg.num_delay_bins;
    const int n_bins = cfg.num_doppler_bins;

    TapChannel out;
    out.taps.reserve(scene.size());
    for (const Target& t : scene) {
        if (!(t.range_m > 0.0) || t.range_m > res.max_unambiguous_range_m)
            throw OutOfAmbiguityRangeError("target range outside (0, R_max]");
        // Detectable Doppler interval is half-open: -V_max itself aliases to +V_max.
        if (t.velocity_m_s <= -res.max_unambiguous_velocity_m_s ||
            t.velocity_m_s > res.max_unambiguous_velocity_m_s)
            throw OutOfAmbiguityRangeError("target velocity outside (-V_max, V_max]");

        const double delay_bins = (2.0 * t.range_m / c) * cfg.bandwidth_hz;
        const double doppler_bins =
            (2.0 * cfg.carrier_freq_hz * t.velocity_m_s / c) * cfg.frame_duration_s();

        const double l_round = std::round(delay_bins);
        const double k_round = std::round(doppler_bins);
        if (mode == QuantizeMode::Exact) {
            if (std::abs(delay_bins - l_round) > kExactTapTolBins)
                throw NonIntegerTapError("target delay is not an integer tap");
            if (std::abs(doppler_bins - k_round) > kExactTapTolBins)
                throw NonIntegerTapError("target Doppler is not an integer tap");
        }

        Tap tap;
        tap.delay_bin = static_cast<int>(l_round);
        tap.doppler_bin = mod_floor(static_cast<int>(k_round), n_bins);
        tap.gain = t.gain;
        tap.delay_residual_bins = delay_bins - l_round;
        tap.doppler_residual_bins = doppler_bins - k_round;
        if (tap.delay_bin < 0 || tap.delay_bin >= m_bins)
            throw OutOfAmbiguityRangeError("target delay bin outside [0, M-1]");
        out.taps.push_back(tap);
    }
    out.validate(cfg);
    return out;
}

std::vector<Target> taps_to_scene(const TapChannel& taps, const SystemConfig& cfg) {
    cfg.validate();
    taps.validate(cfg);
    const double c = cfg.speed_of_light_m_s;
    std::vector<Target> scene;
    scene.reserve(taps.taps.size());
    for (const Tap& t : taps.taps) {
        Target tgt;
        tgt.range_m = c * t.delay_bin / (2.0 * cfg.bandwidth_hz);
        const int k_signed = signed_doppler_index(t.doppler_bin, cfg.num_doppler_bins);
        tgt.velocity_m_s = c * k_signed / (2.0 * cfg.carrier_freq_hz * cfg.frame_duration_s());
        tgt.gain = t.gain;
        scene.push_back(tgt);
    }
    return scene;
}

// --- config file ---

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

namespace detail {

// Shared line-oriented "key = value" parser; '#' starts a comment.
std::map<std::string, std::string> parse_key_values(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": empty key or value");
        if (!kv.emplace(key, value).second)
            throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    return kv;
}

double parse_double(const std::string& key, const std::string& value) {
    size_t pos = 0;
    double v;
    try {
        v = std::stod(value, &pos);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': cannot parse number '" + value + "'");
    }
    if (pos != value.size())
        throw ConfigError("key '" + key + "': trailing characters in '" + value + "'");
    return v;
}

int parse_int(const std::string& key, const std::string& value) {
    double v = parse_double(key, value);
    if (v != std::floor(v) || std::abs(v) > 1e9)
        throw ConfigError("key '" + key + "': expected integer, got '" + value + "'");
    return static_cast<int>(v);
}

}  // namespace detail

namespace detail {

void apply_system_keys(SystemConfig& cfg, std::map<std::string, std::string>& kv) {
    auto take = [&kv](const char* key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        std::string v = it->second;
        kv.erase(it);
        return v;
    };
    if (auto v = take("carrier_freq_hz")) cfg.carrier_freq_hz = parse_double("carrier_freq_hz", *v);
    bool have_bandwidth = false;
    if (auto v = take("bandwidth_hz")) {
        cfg.bandwidth_hz = parse_double("bandwidth_hz", *v);
        have_bandwidth = true;
    }
    if (auto v = take("num_delay_bins")) cfg.num_delay_bins = parse_int("num_delay_bins", *v);
    if (auto v = take("num_doppler_bins")) cfg.num_doppler_bins = parse_int("num_doppler_bins", *v);
    if (auto v = take("symbol_power")) cfg.symbol_power = parse_double("symbol_power", *v);
    if (auto v = take("noise_variance")) cfg.noise_variance = parse_double("noise_variance", *v);
    if (auto v = take("cp_length_samples")) cfg.cp_length_samples = parse_int("cp_length_samples", *v);
    if (auto v = take("speed_of_light_m_s"))
        cfg.speed_of_light_m_s = parse_double("speed_of_light_m_s", *v);
    if (auto v = take("subcarrier_spacing_hz")) {
        const double spacing = parse_double("subcarrier_spacing_hz", *v);
        if (!have_bandwidth) cfg.bandwidth_hz = spacing * cfg.num_delay_bins;
        else if (std::abs(spacing * cfg.num_delay_bins - cfg.bandwidth_hz) > 1e-6 * cfg.bandwidth_hz)
            throw ConfigError("subcarrier_spacing_hz inconsistent with bandwidth_hz / num_delay_bins");
    }
}

}  // namespace detail

SystemConfig parse_system_config(std::istream& in) {
    auto kv = detail::parse_key_values(in);
    SystemConfig cfg;
    detail::apply_system_keys(cfg, kv);
    if (!kv.empty()) throw ConfigError("unknown system config key '" + kv.begin()->first + "'");
    cfg.validate();
    return cfg;
}

SystemConfig load_system_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    try {
        return parse_system_config(in);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

void save_system_config(const SystemConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write config file: " + path);
    out.precision(17);
    out << "# delay-Doppler radar system configuration\n"
        << "carrier_freq_hz = " << cfg.carrier_freq_hz << "\n"
        << "bandwidth_hz = " << cfg.bandwidth_hz << "\n"
        << "num_delay_bins = " << cfg.num_delay_bins << "\n"
        << "num_doppler_bins = " << cfg.num_doppler_bins << "\n"
        << "symbol_power = " << cfg.symbol_power << "\n"
        << "noise_variance = " << cfg.noise_variance << "\n"
        << "cp_length_samples = " << cfg.cp_length_samples << "\n"
        << "speed_of_light_m_s = " << cfg.speed_of_light_m_s << "\n";
}

}  // namespace otfsradar
