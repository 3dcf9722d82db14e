#include "otfsradar/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace otfsradar {

namespace {

double to_db_floored(double power_ratio) {
    if (power_ratio <= 0.0) return kDbFloor;
    return std::max(10.0 * std::log10(power_ratio), kDbFloor);
}

ProfileCut make_cut(std::span<const double> magnitudes, std::span<const double> axis) {
    double peak = 0.0;
    for (double m : magnitudes) peak = std::max(peak, m);
    ProfileCut cut;
    cut.axis.assign(axis.begin(), axis.end());
    cut.magnitude_db.resize(magnitudes.size());
    for (size_t i = 0; i < magnitudes.size(); ++i) {
        const double rel = (peak > 0.0) ? magnitudes[i] / peak : 0.0;
        cut.magnitude_db[i] = to_db_floored(rel * rel);
    }
    return cut;
}

}  // namespace

std::pair<ProfileCut, ProfileCut> profile_cuts(const DDEstimate& est, const SystemConfig& cfg,
                                               int peak_doppler, int peak_delay) {
    const GridResolutions res = derive_resolutions(cfg);
    std::vector<double> range_mag(est.num_delay), range_axis(est.num_delay);
    for (int l = 0; l < est.num_delay; ++l) {
        range_mag[l] = std::abs(est.at(peak_doppler, l));
        range_axis[l] = l * res.range_res_m;
    }
    std::vector<double> vel_mag(est.num_doppler), vel_axis(est.num_doppler);
    for (int k = 0; k < est.num_doppler; ++k) {
        vel_mag[k] = std::abs(est.at(k, peak_delay));
        vel_axis[k] = signed_doppler_index(k, est.num_doppler) * res.velocity_res_m_s;
    }
    return {make_cut(range_mag, range_axis), make_cut(vel_mag, vel_axis)};
}

std::pair<ProfileCut, ProfileCut> profile_cuts(const RangeDopplerMap& map, int peak_range,
                                               int peak_doppler) {
    std::vector<double> range_mag(map.num_range), range_axis(map.num_range);
    for (int l = 0; l < map.num_range; ++l) {
        range_mag[l] = map.at(l, peak_doppler);
        range_axis[l] = map.range_m(l);
    }
    std::vector<double> vel_mag(map.num_doppler), vel_axis(map.num_doppler);
    for (int k = 0; k < map.num_doppler; ++k) {
        vel_mag[k] = map.at(peak_range, k);
        vel_axis[k] = map.velocity_m_s(k);
    }
    return {make_cut(range_mag, range_axis), make_cut(vel_mag, vel_axis)};
}

double pslr_db(std::span<const double> magnitudes) {
    if (magnitudes.size() < 2) throw DegenerateGridError("pslr needs at least two bins");
    double peak = -1.0, second = -1.0;
    for (double m : magnitudes) {
        if (m > peak) {
            second = peak;
            peak = m;
        } else if (m > second) {
            second = m;
        }
    }
    if (peak <= 0.0) return 0.0;
    if (second <= 0.0) return -kDbFloor;
    return 20.0 * std::log10(peak / second);
}

double pslr_db(const DDEstimate& est) {
    std::vector<double> mags(est.grid.size());
    for (size_t i = 0; i < est.grid.size(); ++i) mags[i] = std::abs(est.grid[i]);
    return pslr_db(std::span<const double>(mags));
}

double pslr_db(const RangeDopplerMap& map) {
    return pslr_db(std::span<const double>(map.magnitudes));
}

double image_snr_db(const DDEstimate& est, int true_doppler, int true_delay) {
    const double peak_power = std::norm(est.at(true_doppler, true_delay));
    double rest = 0.0;
    for (const Complex& v : est.grid) rest += std::norm(v);
    rest -= peak_power;
    const size_t others = est.grid.size() - 1;
    if (others == 0 || rest <= 0.0) return -kDbFloor;
    return 10.0 * std::log10(peak_power / (rest / static_cast<double>(others)));
}

namespace {

// Velocity estimate of the strongest return, OTFS matched-filter path.
double estimate_velocity_otfs(const SystemConfig& cfg, const TapChannel& channel, uint64_t seed,
                              double velocity_res) {
    const DDFrame x = gen_qpsk_frame(cfg, seed);
    const DDFrame y = apply_channel_dd(x, channel, cfg, seed ^ 0x9e3779b97f4a7c15ull);
    const DDEstimate est = matched_filter_fast(y, x, cfg);
    const Peak peak = est.argmax();
    return signed_doppler_index(peak.doppler_bin, cfg.num_doppler_bins) * velocity_res;
}

// Velocity estimate of the strongest return, OFDM periodogram path.
double estimate_velocity_ofdm(const SystemConfig& cfg, const TapChannel& channel, uint64_t seed) {
    OfdmConfig ocfg{cfg};
    const TFFrame symbols = gen_ofdm_symbols(ocfg, seed);
    const RangeDopplerMap map =
        ofdm_radar_pipeline(symbols, channel, ocfg, seed ^ 0x9e3779b97f4a7c15ull);
    return estimate_target_ofdm(map).velocity_m_s;
}

}  // namespace

std::vector<RmseSweepPoint> rmse_sweep(RadarSystem system, std::span<const int> velocity_taps,
                                       int trials, const SystemConfig& cfg, int delay_tap,
                                       uint64_t base_seed, int num_threads) {
    cfg.validate();
    if (velocity_taps.empty()) throw std::invalid_argument("rmse_sweep: empty velocity tap list");
    if (trials < 1) throw std::invalid_argument("rmse_sweep: trials must be >= 1");
    const GridResolutions res = derive_resolutions(cfg);
    const int n = cfg.num_doppler_bins;

    struct Job {
        int point;
        int trial;
    };
    std::vector<Job> jobs;
    jobs.reserve(velocity_taps.size() * static_cast<size_t>(trials));
    for (size_t p = 0; p < velocity_taps.size(); ++p)
        for (int t = 0; t < trials; ++t) jobs.push_back({static_cast<int>(p), t});

    std::vector<double> sq_err(jobs.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t idx = next.fetch_add(1); idx < jobs.size(); idx = next.fetch_add(1)) {
            const Job job = jobs[idx];
            const int tap = velocity_taps[job.point];
            TapChannel channel;
            channel.taps.push_back({mod_floor(tap, n), delay_tap, Complex(1.0, 0.0)});
            const double v_true = tap * res.velocity_res_m_s;
            const uint64_t seed = base_seed + static_cast<uint64_t>(job.trial);
            const double v_hat = (system == RadarSystem::Otfs)
                                     ? estimate_velocity_otfs(cfg, channel, seed, res.velocity_res_m_s)
                                     : estimate_velocity_ofdm(cfg, channel, seed);
            const double err = v_hat - v_true;
            sq_err[idx] = err * err;
        }
    };
    const int threads = std::max(1, num_threads);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // Deterministic reduction in (point, trial) order regardless of the pool.
    std::vector<RmseSweepPoint> out(velocity_taps.size());
    for (size_t p = 0; p < velocity_taps.size(); ++p) {
        double acc = 0.0;
        for (int t = 0; t < trials; ++t) acc += sq_err[p * static_cast<size_t>(trials) + t];
        out[p] = {velocity_taps[p], velocity_taps[p] * res.velocity_res_m_s,
                  std::sqrt(acc / trials), trials};
    }
    return out;
}

FrameDurationReport frame_duration_report(const SystemConfig& cfg) {
    cfg.validate();
    const long long m = cfg.num_delay_bins, n = cfg.num_doppler_bins, l = cfg.cp_length_samples;
    FrameDurationReport r;
    r.otfs_samples = n * m + l;
    r.ofdm_samples = n * (m + l);
    r.saved_samples = (n - 1) * l;
    return r;
}

}  // namespace otfsradar
