#pragma once

#include "otfsradar/estimator.hpp"
#include "otfsradar/metrics.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace otfsradar {

inline constexpr const char* kToolVersion = "0.1.0";

enum class SystemChoice { Otfs, Ofdm, Both };
enum class SweepAxis { None, Velocity, Snr };

/**
 * @brief Fully resolved description of one experiment run.
 *
 * A scene is either a list of physical targets (quantized onto the tap grid
 * per `quantize`) or a list of raw taps, never both. Trial t uses seed
 * base_seed + t; reruns with an identical spec reproduce all metrics
 * bit-for-bit, independently of the worker count.
 */
struct ExperimentSpec {
    SystemChoice system = SystemChoice::Both;
    SystemConfig cfg;
    std::vector<Target> targets;
    std::vector<Tap> raw_taps;
    QuantizeMode quantize = QuantizeMode::Nearest;
    SweepAxis sweep = SweepAxis::None;
    std::vector<int> sweep_taps;       // velocity sweep: integer multiples of dV
    std::vector<double> sweep_snr_db;  // SNR sweep points
    int trials = 100;
    uint64_t base_seed = 1;
    int threads = 1;
    std::string out_dir = "out";

    /// Scene as integer taps; validates the spec and quantizes targets.
    TapChannel resolve_channel() const;
    /// FNV-1a hash of the canonical spec serialization (excludes out_dir/threads).
    uint64_t hash() const;
    std::string canonical_string() const;
};

/// Shipped defaults: Table-style grid with L = M/2 (the canonical scenario's
/// delay tap 65 needs L >= 65) and a single target at 975 m, 80 m/s.
ExperimentSpec default_experiment_spec();

/// Parse an experiment spec file: system config keys plus experiment keys
/// (system, trials, base_seed, quantize, sweep, sweep_taps, sweep_snr_db,
/// target.<i>.*, tap.<i>.*). Raises ConfigError on any problem.
ExperimentSpec parse_experiment_spec(std::istream& in);
ExperimentSpec load_experiment_spec(const std::string& path);

struct ScenarioResult {
    std::vector<TrialMetrics> otfs_trials;
    std::vector<TrialMetrics> ofdm_trials;
    int otfs_peak_hits = 0;  // trials whose global MF peak is the true bin
    int ofdm_peak_hits = 0;
    std::vector<std::string> files_written;
};

/// Single-scene campaign: per-trial simulate + estimate + metrics, profile
/// cuts and detection lists for trial 0, CSV/JSON/SVG outputs under out_dir.
ScenarioResult run_scenario(const ExperimentSpec& spec);

struct SweepPointSummary {
    double parameter = 0.0;  // velocity in m/s, or SNR in dB
    double otfs_rmse_m_s = 0.0, ofdm_rmse_m_s = 0.0;
    double otfs_pslr_db = 0.0, ofdm_pslr_db = 0.0;
    double otfs_image_snr_db = 0.0;
};

struct SweepResult {
    SweepAxis axis = SweepAxis::None;
    std::vector<SweepPointSummary> points;
    std::vector<std::string> files_written;
};

/// Velocity or SNR sweep with per-point aggregation and CSV/SVG outputs.
SweepResult run_sweep(const ExperimentSpec& spec);

/// Pass/fail report for the gain-matrix statistics checks.
struct GainStatsReport {
    struct DiagonalCheck {
        double max_rel_error = 0.0;
        bool pass = false;
    };
    struct OffDiagonalCheck {
        size_t i = 0, j = 0;
        Complex empirical_mean;
        double mean_bound = 0.0;  // 5-sigma CLT bound on |mean|
        double empirical_variance = 0.0;
        double expected_variance = 0.0;
        bool pass = false;
    };
    DiagonalCheck diagonal;
    std::vector<OffDiagonalCheck> off_diagonals;
    int trials = 0;
    bool all_pass() const;
};

/// Diagonal identity G[i,i] = MN*P_s plus empirical mean/variance of
/// randomly chosen off-diagonal entries against the expected statistics.
GainStatsReport gain_stats_check(const SystemConfig& cfg, int trials, uint64_t seed,
                                 int num_entries = 10);

/// Run all trials of a campaign on a small worker pool; results are keyed by
/// trial index so aggregation does not depend on scheduling.
void parallel_for_indices(size_t count, int num_threads, const std::function<void(size_t)>& body);

}  // namespace otfsradar
