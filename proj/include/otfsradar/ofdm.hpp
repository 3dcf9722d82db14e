#pragma once

#include "otfsradar/grid.hpp"
#include "otfsradar/otfs.hpp"
#include "otfsradar/types.hpp"

#include <optional>

namespace otfsradar {

/**
 * @brief Conventional OFDM radar configuration.
 *
 * Shares the grid with SystemConfig: N_c subcarriers = num_delay_bins,
 * N_s symbols = num_doppler_bins, one CP of cp_length_samples per symbol.
 * Windowing and zero padding of the periodogram are off by default (raw
 * profiles); enable them explicitly when comparing against windowed
 * references.
 */
struct OfdmConfig {
    SystemConfig sys;
    bool hamming_window = false;
    int range_pad_factor = 1;    // zero-pad factor for the range IDFT
    int doppler_pad_factor = 1;  // zero-pad factor for the Doppler DFT

    int num_subcarriers() const { return sys.num_delay_bins; }
    int num_symbols() const { return sys.num_doppler_bins; }

    void validate() const;
};

/**
 * @brief Range-Doppler periodogram magnitudes with axis metadata.
 *
 * Entry (range_bin, doppler_bin) is a nonnegative magnitude. Axis
 * conversions use the shared grid formulas: range = range_bin * c/(2B) and
 * velocity = (doppler_bin)_Ns * c/(2 f_c N_s T) with T = 1/df (the symbol
 * duration without the cyclic prefix). Bins beyond the native grid appear
 * only when zero padding is enabled.
 */
struct RangeDopplerMap {
    int num_range = 0;
    int num_doppler = 0;
    std::vector<double> magnitudes;  // magnitudes[range_bin * num_doppler + doppler_bin]
    double range_step_m = 0.0;
    double velocity_step_m_s = 0.0;

    double at(int range_bin, int doppler_bin) const {
        return magnitudes[static_cast<size_t>(range_bin) * num_doppler + doppler_bin];
    }
    double range_m(int range_bin) const { return range_bin * range_step_m; }
    double velocity_m_s(int doppler_bin) const {
        return signed_doppler_index(doppler_bin, num_doppler) * velocity_step_m_s;
    }
};

/// Draws an i.i.d. QPSK symbol grid X[n, m] for the OFDM transmitter; the
/// same seed yields the same symbol stream as gen_qpsk_frame.
TFFrame gen_ofdm_symbols(const OfdmConfig& cfg, uint64_t seed);

/**
 * @brief OFDM transmitter: per symbol, a unitary length-N_c inverse DFT plus
 * a cyclic prefix of L samples; symbols concatenated. Total length
 * N_s * (N_c + L); exceeds the reduced-CP frame by (N_s - 1) * L samples.
 */
TimeSignal ofdm_modulate(const TFFrame& symbols, const OfdmConfig& cfg);

/**
 * @brief Full OFDM radar chain: time-domain channel, CP-discarding receiver,
 * element-wise division by the transmitted symbols, inverse transform across
 * subcarriers (range axis) and forward transform across symbols (Doppler
 * axis).
 *
 * The channel applies the same per-sample Doppler phase progression as the
 * OTFS time-domain oracle, so Doppler-induced inter-carrier interference
 * arises physically. Requires every tap delay <= L.
 */
RangeDopplerMap ofdm_radar_pipeline(const TFFrame& symbols, const TapChannel& taps,
                                    const OfdmConfig& cfg,
                                    std::optional<uint64_t> noise_seed = std::nullopt);

struct OfdmTargetEstimate {
    int range_bin = 0;
    int doppler_bin = 0;
    double range_m = 0.0;
    double velocity_m_s = 0.0;
    double magnitude = 0.0;
};

/// Global peak of the periodogram in physical coordinates. Ties break to the
/// lowest (range_bin, doppler_bin) pair.
OfdmTargetEstimate estimate_target_ofdm(const RangeDopplerMap& map);

}  // namespace otfsradar
