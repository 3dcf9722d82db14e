#pragma once

#include "otfsradar/types.hpp"

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace otfsradar {

/// A requested target does not lie on the integer delay-Doppler grid (exact mode).
struct NonIntegerTapError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A target falls outside the unambiguous range/velocity region.
struct OutOfAmbiguityRangeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Configuration file cannot be parsed or violates an invariant.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/**
 * @brief System and grid parameters for one radar frame.
 *
 * The delay axis has M = num_delay_bins cells of width 1/(M*df) and the
 * Doppler axis has N = num_doppler_bins cells of width 1/(N*T), where the
 * subcarrier spacing df = bandwidth/M and the symbol duration T = 1/df.
 * The defaults reproduce the standard 24 GHz / 10 MHz / 256 x 64 setup.
 *
 * speed_of_light_m_s defaults to 3e8 so that the canonical grid figures
 * (range resolution 15 m, unambiguous range 3840 m) come out exact; set it
 * to 299792458 for physical-constant accuracy.
 */
struct SystemConfig {
    double carrier_freq_hz = 24e9;    // f_c
    double bandwidth_hz = 10e6;       // B = M * df
    int num_delay_bins = 256;         // M, also the subcarrier count
    int num_doppler_bins = 64;        // N, also the symbol count
    double symbol_power = 1.0;        // P_s
    double noise_variance = 0.1;      // sigma^2 (default: 10 dB SNR)
    int cp_length_samples = 64;       // L, one reduced CP for the whole frame
    double speed_of_light_m_s = 3e8;  // c

    double subcarrier_spacing_hz() const { return bandwidth_hz / num_delay_bins; }
    double symbol_duration_s() const { return 1.0 / subcarrier_spacing_hz(); }
    double frame_duration_s() const { return num_doppler_bins * symbol_duration_s(); }
    double sample_period_s() const { return 1.0 / bandwidth_hz; }
    double snr_db() const;

    size_t grid_size() const { return static_cast<size_t>(num_delay_bins) * num_doppler_bins; }

    /// Throws ConfigError if any invariant is violated.
    void validate() const;
};

/// Resolution and ambiguity quantities derived from a SystemConfig.
struct GridResolutions {
    double delay_res_s;                   // 1/(M*df)
    double doppler_res_hz;                // 1/(N*T)
    double range_res_m;                   // c/(2B)
    double velocity_res_m_s;              // c/(2*f_c*N*T)
    double max_unambiguous_range_m;       // c/(2*df)
    double max_unambiguous_velocity_m_s;  // c*df/(4*f_c)
};

GridResolutions derive_resolutions(const SystemConfig& cfg);

/**
 * @brief One physical reflector: range, signed radial velocity, complex gain.
 *
 * Physical scenes require 0 < range <= R_max and -V_max < velocity <= V_max
 * (the detectable Doppler interval is half-open).
 */
struct Target {
    double range_m = 0.0;
    double velocity_m_s = 0.0;
    Complex gain{1.0, 0.0};
};

/// One quantized channel tap h[k, l] with the quantization residual in bins.
struct Tap {
    int doppler_bin = 0;  // k in [0, N-1]; signed frequency is (k)_N / (N*T)
    int delay_bin = 0;    // l in [0, M-1]; delay is l / (M*df)
    Complex gain{1.0, 0.0};
    double doppler_residual_bins = 0.0;
    double delay_residual_bins = 0.0;
};

/// Sparse integer-tap representation of the delay-Doppler channel.
struct TapChannel {
    std::vector<Tap> taps;

    /// Throws if a tap index is out of range or a (k, l) pair repeats.
    void validate(const SystemConfig& cfg) const;
};

enum class QuantizeMode { Exact, Nearest };

/**
 * @brief Map physical targets to integer channel taps.
 *
 * l = round(tau * M * df), k = round(nu * N * T) wrapped into [0, N-1], with
 * tau = 2R/c and nu = 2 f_c V / c. Exact mode rejects targets more than 1e-6
 * bins off the grid; nearest mode quantizes and records the residual on the
 * tap. Targets outside (0, R_max] x (-V_max, V_max], or whose delay bin
 * falls outside [0, M-1], raise OutOfAmbiguityRangeError. Two targets
 * quantizing to the same (k, l) are rejected.
 */
TapChannel scene_to_taps(std::span<const Target> scene, const SystemConfig& cfg, QuantizeMode mode);

/**
 * @brief Inverse of scene_to_taps on tap indices.
 *
 * R = c*l/(2*M*df), V = c*(k)_N/(2*f_c*N*T). By convention delay bin 0 maps
 * to range 0, which lies outside the physical scene domain; callers that
 * need a physical scene should not feed zero-delay taps.
 */
std::vector<Target> taps_to_scene(const TapChannel& taps, const SystemConfig& cfg);

// --- configuration file (key = value, '#' comments) ---

/// Parse a SystemConfig from a config stream/file. Unknown keys, malformed
/// numbers and invariant violations raise ConfigError with a line number.
SystemConfig parse_system_config(std::istream& in);
SystemConfig load_system_config(const std::string& path);
void save_system_config(const SystemConfig& cfg, const std::string& path);

namespace detail {

/// Line-oriented "key = value" parser shared by the config formats;
/// '#' starts a comment. Throws ConfigError with a line number.
std::map<std::string, std::string> parse_key_values(std::istream& in);
double parse_double(const std::string& key, const std::string& value);
int parse_int(const std::string& key, const std::string& value);

/// Applies and consumes system-config keys from the map, including the
/// subcarrier_spacing_hz consistency check; other entries are left untouched.
void apply_system_keys(SystemConfig& cfg, std::map<std::string, std::string>& kv);

}  // namespace detail

}  // namespace otfsradar
