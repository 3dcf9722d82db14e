#pragma once

#include "otfsradar/estimator.hpp"
#include "otfsradar/ofdm.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace otfsradar {

/// Raised by metrics that need at least two bins.
struct DegenerateGridError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// dB floor substituted for zero magnitudes in profile cuts.
constexpr double kDbFloor = -300.0;

/// 1D slice through a peak, normalized so the maximum is 0 dB.
struct ProfileCut {
    std::vector<double> axis;          // range in m, or velocity in m/s
    std::vector<double> magnitude_db;  // peak-normalized, floored at kDbFloor
};

/// Range and velocity cuts through the given peak of a matched-filter estimate.
std::pair<ProfileCut, ProfileCut> profile_cuts(const DDEstimate& est, const SystemConfig& cfg,
                                               int peak_doppler, int peak_delay);

/// Range and velocity cuts through the given peak of an OFDM periodogram.
std::pair<ProfileCut, ProfileCut> profile_cuts(const RangeDopplerMap& map, int peak_range,
                                               int peak_doppler);

/// Peak-to-maximum-sidelobe ratio: 10*log10(peak^2 / max other bin^2), the
/// peak bin excluded. Requires at least two bins.
double pslr_db(std::span<const double> magnitudes);
double pslr_db(const DDEstimate& est);
double pslr_db(const RangeDopplerMap& map);

/// Peak power at the true bin over the mean power of all other bins, in dB.
double image_snr_db(const DDEstimate& est, int true_doppler, int true_delay);

/// Per-trial figures of merit for one scenario run.
struct TrialMetrics {
    double range_error_m = 0.0;
    double velocity_error_m_s = 0.0;
    double pslr_db = 0.0;
    double image_snr_db = 0.0;
    uint64_t seed = 0;
};

enum class RadarSystem { Otfs, Ofdm };

struct RmseSweepPoint {
    int velocity_tap = 0;       // signed multiple of the velocity resolution
    double velocity_m_s = 0.0;  // tap * velocity resolution
    double rmse_m_s = 0.0;
    int trials = 0;
};

/**
 * @brief Velocity-estimation RMSE per velocity tap for one radar system.
 *
 * Each sweep point places a single unit-gain target at delay_tap and
 * velocity tap*dV, runs `trials` noisy estimates (trial seeds
 * base_seed + trial index, shared across systems and sweep points as common
 * random numbers) and reports sqrt(mean((V_hat - V_true)^2)).
 */
std::vector<RmseSweepPoint> rmse_sweep(RadarSystem system, std::span<const int> velocity_taps,
                                       int trials, const SystemConfig& cfg, int delay_tap,
                                       uint64_t base_seed, int num_threads = 1);

/// Sample counts for a reduced-CP frame vs an OFDM burst with matched
/// parameters (N_c = M, N_s = N, same L): otfs = NM + L, ofdm = N(M + L),
/// saved = (N - 1) L.
struct FrameDurationReport {
    long long otfs_samples = 0;
    long long ofdm_samples = 0;
    long long saved_samples = 0;
};

FrameDurationReport frame_duration_report(const SystemConfig& cfg);

}  // namespace otfsradar
