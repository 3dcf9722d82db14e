#pragma once

#include "otfsradar/grid.hpp"
#include "otfsradar/types.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace otfsradar {

/// Materializing an MN x MN matrix was requested above the configured bound.
struct GridTooLargeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Default cap on grids for which MN x MN matrices may be materialized.
constexpr size_t kDefaultMaxMaterializedGrid = 4096;

/**
 * @brief Dictionary matrix of phase-adjusted cyclic shifts of a frame.
 *
 * Column j = k'' + N*l'' holds the vectorized output of a unit channel tap at
 * (k'', l'') applied to x; column 0 equals vec(x). Entry (i, j) with
 * i = k' + N*l' is
 *
 *   x[[k'-k'']_N, [l'-l'']_M] * exp(j2pi*(k'')_N*[l'-l'']_M/(MN))
 *                            * (exp(-j2pi*k'/N) if l' < l'', else 1).
 *
 * Storage is column-major; memory is O((MN)^2), so construction is capped.
 */
struct Dictionary {
    int num_doppler = 0;
    int num_delay = 0;
    double symbol_power = 0.0;
    std::vector<Complex> entries;  // entries[i + MN*j]

    size_t dim() const { return static_cast<size_t>(num_doppler) * num_delay; }
    const Complex& entry(size_t i, size_t j) const { return entries[i + dim() * j]; }
    const Complex* col(size_t j) const { return entries.data() + dim() * j; }
};

Dictionary build_dictionary(const DDFrame& x, const SystemConfig& cfg,
                            size_t max_grid = kDefaultMaxMaterializedGrid);

/// Detection threshold over the estimated noise floor.
struct DetectionPolicy {
    double threshold_db = 13.0;
};

struct Peak {
    int doppler_bin = 0;
    int delay_bin = 0;
    double magnitude = 0.0;
};

/**
 * @brief Normalized matched-filter output over the delay-Doppler grid.
 *
 * grid holds h_hat[k, l] / (MN * P_s) in the same k + N*l layout as DDFrame.
 * noise_floor_power is a median-based estimate of the per-bin power floor
 * (median of |grid|^2 divided by ln 2, the Rayleigh-power median factor).
 * peaks lists the bins exceeding the default detection policy, sorted by
 * descending magnitude.
 */
struct DDEstimate {
    int num_doppler = 0;
    int num_delay = 0;
    std::vector<Complex> grid;
    double noise_floor_power = 0.0;
    std::vector<Peak> peaks;

    const Complex& at(int k, int l) const {
        return grid[static_cast<size_t>(k) + static_cast<size_t>(num_doppler) * l];
    }
    /// Location of the largest-magnitude bin.
    Peak argmax() const;
};

/// Matched filter h_hat = X~^H vec(y), normalized by MN*P_s. O((MN)^2).
DDEstimate matched_filter_naive(const DDFrame& y, const Dictionary& dict);

/**
 * @brief Matched filter without materializing the dictionary.
 *
 * Algebraically identical to matched_filter_naive: per delay shift, the
 * estimate column is assembled from length-N frequency-domain circular
 * correlations between delay columns of x and y plus the dictionary phase
 * rotations. O(M^2 N log N) instead of O((MN)^2).
 */
DDEstimate matched_filter_fast(const DDFrame& y, const DDFrame& x, const SystemConfig& cfg);

/// Direct O((MN)^2) evaluation of the matched filter with dictionary entries
/// generated on the fly (no O((MN)^2) memory). Reference path for timing and
/// cross-checks at grid sizes where the dictionary cannot be materialized.
DDEstimate matched_filter_reference(const DDFrame& y, const DDFrame& x, const SystemConfig& cfg);

/// Gain matrix G = X~^H X~ (Hermitian, diagonal MN*P_s). Row-major.
struct GainMatrix {
    size_t dim = 0;
    std::vector<Complex> data;
    const Complex& at(size_t i, size_t j) const { return data[i * dim + j]; }
};

GainMatrix gain_matrix(const DDFrame& x, const SystemConfig& cfg,
                       size_t max_grid = kDefaultMaxMaterializedGrid);

/// Single gain-matrix entry G[i, j] computed entry-wise in O(MN) without
/// materializing the dictionary; i = k' + N*l', j = k'' + N*l''.
Complex gain_entry(const DDFrame& x, size_t i, size_t j);

struct GainEntryStats {
    Complex empirical_mean;
    double empirical_variance = 0.0;
    int trials = 0;
};

/// Samples G[i, j] over independent QPSK frames and returns empirical mean
/// and variance. Requires i != j and trials >= 1000.
GainEntryStats gain_offdiag_stats(const SystemConfig& cfg, int num_trials,
                                  std::pair<size_t, size_t> ij, uint64_t seed);

struct Detection {
    int doppler_bin = 0;
    int delay_bin = 0;
    Complex gain_estimate;
    double magnitude = 0.0;
};

/**
 * @brief Greedy threshold detection on a matched-filter estimate.
 *
 * Returns every bin whose power exceeds policy.threshold_db over the
 * median-based noise floor, largest magnitude first. No sidelobe
 * cancellation is applied.
 */
std::vector<Detection> detect_targets(const DDEstimate& est, const DetectionPolicy& policy = {});

}  // namespace otfsradar
