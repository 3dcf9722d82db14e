#include "otfsradar/experiment.hpp"

#include "otfsradar/io.hpp"
#include "otfsradar/otfs.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace otfsradar {

namespace {

constexpr uint64_t kNoiseSeedSalt = 0x9e3779b97f4a7c15ull;  // trial seed -> noise stream

uint64_t fnv1a64(const std::string& s) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

const char* system_name(SystemChoice s) {
    switch (s) {
        case SystemChoice::Otfs: return "otfs";
        case SystemChoice::Ofdm: return "ofdm";
        default: return "both";
    }
}

const char* sweep_name(SweepAxis a) {
    switch (a) {
        case SweepAxis::Velocity: return "velocity";
        case SweepAxis::Snr: return "snr";
        default: return "none";
    }
}

/// Peak-to-mean-other power ratio on a periodogram, analogous to the
/// matched-filter image SNR.
double map_image_snr_db(const RangeDopplerMap& map, int true_range, int true_doppler) {
    const double peak = map.at(true_range, true_doppler);
    double rest = 0.0;
    for (double m : map.magnitudes) rest += m * m;
    rest -= peak * peak;
    const size_t others = map.magnitudes.size() - 1;
    if (others == 0 || rest <= 0.0) return -kDbFloor;
    return 10.0 * std::log10(peak * peak / (rest / static_cast<double>(others)));
}

}  // namespace

void parallel_for_indices(size_t count, int num_threads, const std::function<void(size_t)>& body) {
    const int threads = std::max(1, num_threads);
    if (threads == 1 || count <= 1) {
        for (size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
    };
    std::vector<std::thread> pool;
    const int n = static_cast<int>(std::min(static_cast<size_t>(threads), count));
    pool.reserve(n);
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

TapChannel ExperimentSpec::resolve_channel() const {
    cfg.validate();
    if (!targets.empty() && !raw_taps.empty())
        throw ConfigError("experiment spec: give either targets or raw taps, not both");
    if (targets.empty() && raw_taps.empty())
        throw ConfigError("experiment spec: scene is empty");
    if (trials < 1) throw ConfigError("experiment spec: trials must be >= 1");

    TapChannel channel;
    if (!raw_taps.empty()) {
        channel.taps = raw_taps;
        channel.validate(cfg);
    } else {
        channel = scene_to_taps(targets, cfg, quantize);
    }
    for (const Tap& tap : channel.taps)
        if (tap.delay_bin > cfg.cp_length_samples)
            throw ConfigError("scene delay tap " + std::to_string(tap.delay_bin) +
                              " exceeds cp_length_samples; increase the cyclic prefix");
    return channel;
}

std::string ExperimentSpec::canonical_string() const {
    std::ostringstream os;
    os.precision(17);
    os << "system=" << system_name(system) << ";sweep=" << sweep_name(sweep)
       << ";quantize=" << (quantize == QuantizeMode::Exact ? "exact" : "nearest")
       << ";trials=" << trials << ";base_seed=" << base_seed << ";fc=" << cfg.carrier_freq_hz
       << ";B=" << cfg.bandwidth_hz << ";M=" << cfg.num_delay_bins << ";N=" << cfg.num_doppler_bins
       << ";Ps=" << cfg.symbol_power << ";sigma2=" << cfg.noise_variance
       << ";L=" << cfg.cp_length_samples << ";c=" << cfg.speed_of_light_m_s;
    for (const Target& t : targets)
        os << ";target=" << t.range_m << ',' << t.velocity_m_s << ',' << t.gain.real() << ','
           << t.gain.imag();
    for (const Tap& t : raw_taps)
        os << ";tap=" << t.doppler_bin << ',' << t.delay_bin << ',' << t.gain.real() << ','
           << t.gain.imag();
    for (int tap : sweep_taps) os << ";vtap=" << tap;
    for (double s : sweep_snr_db) os << ";snr=" << s;
    return os.str();
}

uint64_t ExperimentSpec::hash() const { return fnv1a64(canonical_string()); }

ExperimentSpec default_experiment_spec() {
    ExperimentSpec spec;
    spec.cfg.cp_length_samples = spec.cfg.num_delay_bins / 2;
    spec.targets.push_back({975.0, 80.0, Complex(1.0, 0.0)});
    spec.quantize = QuantizeMode::Nearest;
    return spec;
}

namespace {

std::vector<int> parse_tap_list(const std::string& value) {
    // Either "a..b" (inclusive) or a comma list.
    std::vector<int> taps;
    const auto range_pos = value.find("..");
    if (range_pos != std::string::npos) {
        const int lo = detail::parse_int("sweep_taps", value.substr(0, range_pos));
        const int hi = detail::parse_int("sweep_taps", value.substr(range_pos + 2));
        if (hi < lo) throw ConfigError("sweep_taps: range upper bound below lower bound");
        for (int t = lo; t <= hi; ++t) taps.push_back(t);
        return taps;
    }
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) taps.push_back(detail::parse_int("sweep_taps", item));
    return taps;
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(detail::parse_double(key, item));
    return out;
}

}  // namespace

ExperimentSpec parse_experiment_spec(std::istream& in) {
    auto kv = detail::parse_key_values(in);
    ExperimentSpec spec;
    spec.targets.clear();

    detail::apply_system_keys(spec.cfg, kv);

    auto take = [&kv](const char* key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        std::string v = it->second;
        kv.erase(it);
        return v;
    };

    if (auto v = take("system")) {
        if (*v == "otfs") spec.system = SystemChoice::Otfs;
        else if (*v == "ofdm") spec.system = SystemChoice::Ofdm;
        else if (*v == "both") spec.system = SystemChoice::Both;
        else throw ConfigError("system must be otfs|ofdm|both");
    }
    if (auto v = take("quantize")) {
        if (*v == "exact") spec.quantize = QuantizeMode::Exact;
        else if (*v == "nearest") spec.quantize = QuantizeMode::Nearest;
        else throw ConfigError("quantize must be exact|nearest");
    }
    if (auto v = take("sweep")) {
        if (*v == "none") spec.sweep = SweepAxis::None;
        else if (*v == "velocity") spec.sweep = SweepAxis::Velocity;
        else if (*v == "snr") spec.sweep = SweepAxis::Snr;
        else throw ConfigError("sweep must be none|velocity|snr");
    }
    if (auto v = take("sweep_taps")) spec.sweep_taps = parse_tap_list(*v);
    if (auto v = take("sweep_snr_db")) spec.sweep_snr_db = parse_double_list("sweep_snr_db", *v);
    if (auto v = take("trials")) spec.trials = detail::parse_int("trials", *v);
    if (auto v = take("base_seed")) {
        try {
            spec.base_seed = std::stoull(*v);
        } catch (const std::exception&) {
            throw ConfigError("base_seed: cannot parse '" + *v + "'");
        }
    }
    if (auto v = take("threads")) spec.threads = detail::parse_int("threads", *v);
    if (auto v = take("out_dir")) spec.out_dir = *v;

    // target.<i>.field and tap.<i>.field groups, indices contiguous from 0.
    std::map<int, Target> targets;
    std::map<int, Tap> taps;
    for (auto it = kv.begin(); it != kv.end();) {
        const std::string& key = it->first;
        auto consume = [&](auto& group, const std::string& prefix, auto setter) -> bool {
            if (key.rfind(prefix, 0) != 0) return false;
            const size_t dot = key.find('.', prefix.size());
            if (dot == std::string::npos)
                throw ConfigError("malformed key '" + key + "' (expected " + prefix + "<i>.field)");
            const int idx = detail::parse_int(key, key.substr(prefix.size(), dot - prefix.size()));
            setter(group[idx], key.substr(dot + 1), it->second, key);
            return true;
        };
        const bool used =
            consume(targets, "target.",
                    [](Target& t, const std::string& field, const std::string& value,
                       const std::string& key) {
                        if (field == "range_m") t.range_m = detail::parse_double(key, value);
                        else if (field == "velocity_m_s") t.velocity_m_s = detail::parse_double(key, value);
                        else if (field == "gain_re") t.gain.real(detail::parse_double(key, value));
                        else if (field == "gain_im") t.gain.imag(detail::parse_double(key, value));
                        else throw ConfigError("unknown target field '" + key + "'");
                    }) ||
            consume(taps, "tap.",
                    [](Tap& t, const std::string& field, const std::string& value,
                       const std::string& key) {
                        if (field == "doppler_bin") t.doppler_bin = detail::parse_int(key, value);
                        else if (field == "delay_bin") t.delay_bin = detail::parse_int(key, value);
                        else if (field == "gain_re") t.gain.real(detail::parse_double(key, value));
                        else if (field == "gain_im") t.gain.imag(detail::parse_double(key, value));
                        else throw ConfigError("unknown tap field '" + key + "'");
                    });
        if (used) it = kv.erase(it);
        else ++it;
    }
    for (const auto& [idx, t] : targets) spec.targets.push_back(t);
    for (const auto& [idx, t] : taps) spec.raw_taps.push_back(t);

    if (!kv.empty()) throw ConfigError("unknown experiment key '" + kv.begin()->first + "'");
    if (spec.sweep == SweepAxis::Velocity && spec.sweep_taps.empty())
        throw ConfigError("velocity sweep requested but sweep_taps is empty");
    if (spec.sweep == SweepAxis::Snr && spec.sweep_snr_db.empty())
        throw ConfigError("snr sweep requested but sweep_snr_db is empty");
    spec.cfg.validate();
    return spec;
}

ExperimentSpec load_experiment_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open experiment spec: " + path);
    try {
        return parse_experiment_spec(in);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

namespace {

struct TrialOutputs {
    TrialMetrics otfs, ofdm;
    bool otfs_hit = false, ofdm_hit = false;
};

nlohmann::json metrics_json(const std::vector<TrialMetrics>& trials) {
    nlohmann::json arr = nlohmann::json::array();
    for (const TrialMetrics& t : trials)
        arr.push_back({{"seed", t.seed},
                       {"range_error_m", t.range_error_m},
                       {"velocity_error_m_s", t.velocity_error_m_s},
                       {"pslr_db", t.pslr_db},
                       {"image_snr_db", t.image_snr_db}});
    return arr;
}

nlohmann::json aggregate_json(const std::vector<TrialMetrics>& trials, int peak_hits) {
    double range_rmse = 0, vel_rmse = 0, pslr = 0, image = 0;
    for (const TrialMetrics& t : trials) {
        range_rmse += t.range_error_m * t.range_error_m;
        vel_rmse += t.velocity_error_m_s * t.velocity_error_m_s;
        pslr += t.pslr_db;
        image += t.image_snr_db;
    }
    const double n = static_cast<double>(trials.size());
    return {{"trials", trials.size()},
            {"range_rmse_m", std::sqrt(range_rmse / n)},
            {"velocity_rmse_m_s", std::sqrt(vel_rmse / n)},
            {"mean_pslr_db", pslr / n},
            {"mean_image_snr_db", image / n},
            {"peak_hit_rate", peak_hits / n}};
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

void write_result_json(const std::string& path, const ExperimentSpec& spec,
                       const nlohmann::json& body) {
    nlohmann::json j = body;
    j["spec_hash"] = spec.hash();
    j["tool_version"] = kToolVersion;
    j["timestamp"] = iso_timestamp();
    j["system"] = system_name(spec.system);
    j["base_seed"] = spec.base_seed;
    j["trials"] = spec.trials;
    j["config"] = {{"carrier_freq_hz", spec.cfg.carrier_freq_hz},
                   {"bandwidth_hz", spec.cfg.bandwidth_hz},
                   {"num_delay_bins", spec.cfg.num_delay_bins},
                   {"num_doppler_bins", spec.cfg.num_doppler_bins},
                   {"symbol_power", spec.cfg.symbol_power},
                   {"noise_variance", spec.cfg.noise_variance},
                   {"cp_length_samples", spec.cfg.cp_length_samples},
                   {"speed_of_light_m_s", spec.cfg.speed_of_light_m_s}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

}  // namespace

ScenarioResult run_scenario(const ExperimentSpec& spec) {
    const TapChannel channel = spec.resolve_channel();
    const SystemConfig& cfg = spec.cfg;
    const GridResolutions res = derive_resolutions(cfg);
    const Tap truth = channel.taps.front();  // metrics are relative to the first tap
    const double true_range = truth.delay_bin * res.range_res_m;
    const double true_velocity =
        signed_doppler_index(truth.doppler_bin, cfg.num_doppler_bins) * res.velocity_res_m_s;

    const bool want_otfs = spec.system != SystemChoice::Ofdm;
    const bool want_ofdm = spec.system != SystemChoice::Otfs;

    std::filesystem::create_directories(spec.out_dir);
    ScenarioResult result;

    std::vector<TrialOutputs> slots(static_cast<size_t>(spec.trials));
    parallel_for_indices(slots.size(), spec.threads, [&](size_t i) {
        const uint64_t seed = spec.base_seed + i;
        TrialOutputs& slot = slots[i];
        if (want_otfs) {
            const DDFrame x = gen_qpsk_frame(cfg, seed);
            const DDFrame y = apply_channel_dd(x, channel, cfg, seed ^ kNoiseSeedSalt);
            const DDEstimate est = matched_filter_fast(y, x, cfg);
            const Peak peak = est.argmax();
            slot.otfs.seed = seed;
            slot.otfs.range_error_m = peak.delay_bin * res.range_res_m - true_range;
            slot.otfs.velocity_error_m_s =
                signed_doppler_index(peak.doppler_bin, cfg.num_doppler_bins) * res.velocity_res_m_s -
                true_velocity;
            slot.otfs.pslr_db = pslr_db(est);
            slot.otfs.image_snr_db = image_snr_db(est, truth.doppler_bin, truth.delay_bin);
            slot.otfs_hit = (peak.doppler_bin == truth.doppler_bin && peak.delay_bin == truth.delay_bin);
        }
        if (want_ofdm) {
            OfdmConfig ocfg{cfg};
            const TFFrame symbols = gen_ofdm_symbols(ocfg, seed);
            const RangeDopplerMap map = ofdm_radar_pipeline(symbols, channel, ocfg, seed ^ kNoiseSeedSalt);
            const OfdmTargetEstimate est = estimate_target_ofdm(map);
            slot.ofdm.seed = seed;
            slot.ofdm.range_error_m = est.range_m - true_range;
            slot.ofdm.velocity_error_m_s = est.velocity_m_s - true_velocity;
            slot.ofdm.pslr_db = pslr_db(map);
            slot.ofdm.image_snr_db = map_image_snr_db(map, truth.delay_bin, truth.doppler_bin);
            slot.ofdm_hit = (est.range_bin == truth.delay_bin && est.doppler_bin == truth.doppler_bin);
        }
    });

    for (const TrialOutputs& slot : slots) {
        if (want_otfs) {
            result.otfs_trials.push_back(slot.otfs);
            result.otfs_peak_hits += slot.otfs_hit ? 1 : 0;
        }
        if (want_ofdm) {
            result.ofdm_trials.push_back(slot.ofdm);
            result.ofdm_peak_hits += slot.ofdm_hit ? 1 : 0;
        }
    }

    auto add_file = [&](const std::string& name) {
        result.files_written.push_back(join_path(spec.out_dir, name));
        return result.files_written.back();
    };

    // Trial-0 artifacts: profile cuts through the true bin, estimate grid,
    // detections, periodogram.
    std::vector<io::Series> range_series, velocity_series;
    if (want_otfs) {
        const DDFrame x = gen_qpsk_frame(cfg, spec.base_seed);
        const DDFrame y = apply_channel_dd(x, channel, cfg, spec.base_seed ^ kNoiseSeedSalt);
        const DDEstimate est = matched_filter_fast(y, x, cfg);
        const Peak peak = est.argmax();
        const auto [range_cut, vel_cut] = profile_cuts(est, cfg, peak.doppler_bin, peak.delay_bin);
        io::write_profile_csv(add_file("otfs_range_profile.csv"), range_cut);
        io::write_profile_csv(add_file("otfs_velocity_profile.csv"), vel_cut);
        io::write_estimate_csv(add_file("otfs_estimate.csv"), est);
        io::write_detections_json(add_file("otfs_detections.json"), detect_targets(est), cfg);
        range_series.push_back({"OTFS", range_cut.axis, range_cut.magnitude_db});
        velocity_series.push_back({"OTFS", vel_cut.axis, vel_cut.magnitude_db});
    }
    if (want_ofdm) {
        OfdmConfig ocfg{cfg};
        const TFFrame symbols = gen_ofdm_symbols(ocfg, spec.base_seed);
        const RangeDopplerMap map =
            ofdm_radar_pipeline(symbols, channel, ocfg, spec.base_seed ^ kNoiseSeedSalt);
        const OfdmTargetEstimate est = estimate_target_ofdm(map);
        const auto [range_cut, vel_cut] = profile_cuts(map, est.range_bin, est.doppler_bin);
        io::write_profile_csv(add_file("ofdm_range_profile.csv"), range_cut);
        io::write_profile_csv(add_file("ofdm_velocity_profile.csv"), vel_cut);
        io::write_map_csv(add_file("ofdm_map.csv"), map);
        range_series.push_back({"OFDM", range_cut.axis, range_cut.magnitude_db});
        velocity_series.push_back({"OFDM", vel_cut.axis, vel_cut.magnitude_db});
    }
    io::write_svg_plot(add_file("range_profile.svg"), "Range profile", "range [m]",
                       "normalized magnitude [dB]", range_series);
    io::write_svg_plot(add_file("velocity_profile.svg"), "Velocity profile", "velocity [m/s]",
                       "normalized magnitude [dB]", velocity_series);

    // Per-trial metrics table.
    {
        std::ofstream out(add_file("trials.csv"));
        out << "seed";
        if (want_otfs)
            out << ",otfs_range_error_m,otfs_velocity_error_m_s,otfs_pslr_db,otfs_image_snr_db";
        if (want_ofdm)
            out << ",ofdm_range_error_m,ofdm_velocity_error_m_s,ofdm_pslr_db,ofdm_image_snr_db";
        out << '\n';
        for (size_t i = 0; i < slots.size(); ++i) {
            out << (spec.base_seed + i);
            if (want_otfs) {
                const TrialMetrics& t = slots[i].otfs;
                out << ',' << io::format_double(t.range_error_m) << ','
                    << io::format_double(t.velocity_error_m_s) << ',' << io::format_double(t.pslr_db)
                    << ',' << io::format_double(t.image_snr_db);
            }
            if (want_ofdm) {
                const TrialMetrics& t = slots[i].ofdm;
                out << ',' << io::format_double(t.range_error_m) << ','
                    << io::format_double(t.velocity_error_m_s) << ',' << io::format_double(t.pslr_db)
                    << ',' << io::format_double(t.image_snr_db);
            }
            out << '\n';
        }
    }
    save_system_config(cfg, add_file("resolved_config.txt"));

    nlohmann::json body;
    body["scene"] = nlohmann::json::array();
    for (const Tap& t : channel.taps)
        body["scene"].push_back({{"doppler_bin", t.doppler_bin},
                                 {"delay_bin", t.delay_bin},
                                 {"gain_re", t.gain.real()},
                                 {"gain_im", t.gain.imag()},
                                 {"doppler_residual_bins", t.doppler_residual_bins},
                                 {"delay_residual_bins", t.delay_residual_bins}});
    if (want_otfs) {
        body["otfs"] = {{"per_trial", metrics_json(result.otfs_trials)},
                        {"aggregate", aggregate_json(result.otfs_trials, result.otfs_peak_hits)}};
    }
    if (want_ofdm) {
        body["ofdm"] = {{"per_trial", metrics_json(result.ofdm_trials)},
                        {"aggregate", aggregate_json(result.ofdm_trials, result.ofdm_peak_hits)}};
    }
    write_result_json(add_file("result.json"), spec, body);
    return result;
}

SweepResult run_sweep(const ExperimentSpec& spec) {
    const TapChannel channel = spec.resolve_channel();
    const SystemConfig& cfg = spec.cfg;
    if (spec.sweep == SweepAxis::None) throw ConfigError("run_sweep: spec has no sweep axis");

    const bool want_otfs = spec.system != SystemChoice::Ofdm;
    const bool want_ofdm = spec.system != SystemChoice::Otfs;
    std::filesystem::create_directories(spec.out_dir);

    SweepResult result;
    result.axis = spec.sweep;
    auto add_file = [&](const std::string& name) {
        result.files_written.push_back(join_path(spec.out_dir, name));
        return result.files_written.back();
    };

    std::vector<io::Series> series;
    nlohmann::json points = nlohmann::json::array();

    if (spec.sweep == SweepAxis::Velocity) {
        const int delay_tap = channel.taps.front().delay_bin;
        std::vector<RmseSweepPoint> otfs_points, ofdm_points;
        if (want_otfs)
            otfs_points = rmse_sweep(RadarSystem::Otfs, spec.sweep_taps, spec.trials, cfg,
                                     delay_tap, spec.base_seed, spec.threads);
        if (want_ofdm)
            ofdm_points = rmse_sweep(RadarSystem::Ofdm, spec.sweep_taps, spec.trials, cfg,
                                     delay_tap, spec.base_seed, spec.threads);
        for (size_t p = 0; p < spec.sweep_taps.size(); ++p) {
            SweepPointSummary s;
            s.parameter = (want_otfs ? otfs_points[p] : ofdm_points[p]).velocity_m_s;
            if (want_otfs) s.otfs_rmse_m_s = otfs_points[p].rmse_m_s;
            if (want_ofdm) s.ofdm_rmse_m_s = ofdm_points[p].rmse_m_s;
            result.points.push_back(s);
            nlohmann::json pj = {{"velocity_m_s", s.parameter}, {"velocity_tap", spec.sweep_taps[p]}};
            if (want_otfs) pj["otfs_rmse_m_s"] = s.otfs_rmse_m_s;
            if (want_ofdm) pj["ofdm_rmse_m_s"] = s.ofdm_rmse_m_s;
            points.push_back(pj);
        }
        std::vector<double> xs;
        for (const SweepPointSummary& s : result.points) xs.push_back(s.parameter);
        if (want_otfs) {
            std::vector<double> ys;
            for (const SweepPointSummary& s : result.points) ys.push_back(s.otfs_rmse_m_s);
            series.push_back({"otfs_rmse_m_s", xs, ys});
        }
        if (want_ofdm) {
            std::vector<double> ys;
            for (const SweepPointSummary& s : result.points) ys.push_back(s.ofdm_rmse_m_s);
            series.push_back({"ofdm_rmse_m_s", xs, ys});
        }
        io::write_series_csv(add_file("sweep.csv"), "velocity_m_s", series);
        io::write_svg_plot(add_file("sweep.svg"), "Velocity RMSE vs relative velocity",
                           "relative velocity [m/s]", "RMSE [m/s]", series);
    } else {
        // SNR sweep at the fixed scene: mean PSLR and image SNR per point.
        const Tap truth = channel.taps.front();
        std::vector<SweepPointSummary> summaries(spec.sweep_snr_db.size());
        for (size_t p = 0; p < spec.sweep_snr_db.size(); ++p) {
            SystemConfig point_cfg = cfg;
            point_cfg.noise_variance =
                cfg.symbol_power / std::pow(10.0, spec.sweep_snr_db[p] / 10.0);
            std::vector<TrialMetrics> otfs(spec.trials), ofdm(spec.trials);
            parallel_for_indices(static_cast<size_t>(spec.trials), spec.threads, [&](size_t i) {
                const uint64_t seed = spec.base_seed + i;
                if (want_otfs) {
                    const DDFrame x = gen_qpsk_frame(point_cfg, seed);
                    const DDFrame y = apply_channel_dd(x, channel, point_cfg, seed ^ kNoiseSeedSalt);
                    const DDEstimate est = matched_filter_fast(y, x, point_cfg);
                    otfs[i].pslr_db = pslr_db(est);
                    otfs[i].image_snr_db = image_snr_db(est, truth.doppler_bin, truth.delay_bin);
                }
                if (want_ofdm) {
                    OfdmConfig ocfg{point_cfg};
                    const TFFrame symbols = gen_ofdm_symbols(ocfg, seed);
                    const RangeDopplerMap map =
                        ofdm_radar_pipeline(symbols, channel, ocfg, seed ^ kNoiseSeedSalt);
                    ofdm[i].pslr_db = pslr_db(map);
                    ofdm[i].image_snr_db = map_image_snr_db(map, truth.delay_bin, truth.doppler_bin);
                }
            });
            SweepPointSummary& s = summaries[p];
            s.parameter = spec.sweep_snr_db[p];
            for (int i = 0; i < spec.trials; ++i) {
                s.otfs_pslr_db += otfs[i].pslr_db / spec.trials;
                s.otfs_image_snr_db += otfs[i].image_snr_db / spec.trials;
                s.ofdm_pslr_db += ofdm[i].pslr_db / spec.trials;
            }
            nlohmann::json pj = {{"snr_db", s.parameter}};
            if (want_otfs) {
                pj["otfs_mean_pslr_db"] = s.otfs_pslr_db;
                pj["otfs_mean_image_snr_db"] = s.otfs_image_snr_db;
            }
            if (want_ofdm) pj["ofdm_mean_pslr_db"] = s.ofdm_pslr_db;
            points.push_back(pj);
        }
        result.points = summaries;

        std::vector<double> xs;
        for (const SweepPointSummary& s : result.points) xs.push_back(s.parameter);
        if (want_otfs) {
            std::vector<double> pslr, image;
            for (const SweepPointSummary& s : result.points) {
                pslr.push_back(s.otfs_pslr_db);
                image.push_back(s.otfs_image_snr_db);
            }
            series.push_back({"otfs_mean_pslr_db", xs, pslr});
            series.push_back({"otfs_mean_image_snr_db", xs, image});
        }
        if (want_ofdm) {
            std::vector<double> pslr;
            for (const SweepPointSummary& s : result.points) pslr.push_back(s.ofdm_pslr_db);
            series.push_back({"ofdm_mean_pslr_db", xs, pslr});
        }
        io::write_series_csv(add_file("sweep.csv"), "snr_db", series);
        io::write_svg_plot(add_file("sweep.svg"), "PSLR and image SNR vs SNR", "SNR [dB]", "[dB]",
                           series);
    }

    save_system_config(cfg, add_file("resolved_config.txt"));
    write_result_json(add_file("result.json"), spec, {{"points", points}});
    return result;
}

bool GainStatsReport::all_pass() const {
    if (!diagonal.pass) return false;
    for (const OffDiagonalCheck& e : off_diagonals)
        if (!e.pass) return false;
    return true;
}

GainStatsReport gain_stats_check(const SystemConfig& cfg, int trials, uint64_t seed, int num_entries) {
    cfg.validate();
    const size_t mn = cfg.grid_size();
    if (mn < 2) throw ConfigError("gain_stats_check: grid too small");
    const double expected_var = mn * cfg.symbol_power * cfg.symbol_power;

    GainStatsReport report;
    report.trials = trials;

    // Diagonal identity over a handful of frames.
    double max_rel = 0.0;
    for (int f = 0; f < 5; ++f) {
        const DDFrame x = gen_qpsk_frame(cfg, seed + 1000003ull * f);
        for (size_t i = 0; i < std::min<size_t>(mn, 8); ++i) {
            const Complex g = gain_entry(x, i, i);
            max_rel = std::max(max_rel,
                               std::abs(g - Complex(mn * cfg.symbol_power, 0.0)) /
                                   (mn * cfg.symbol_power));
        }
    }
    report.diagonal.max_rel_error = max_rel;
    report.diagonal.pass = max_rel < 1e-12;

    std::mt19937_64 rng(seed ^ 0xa5a5a5a5ull);
    std::uniform_int_distribution<size_t> pick(0, mn - 1);
    for (int e = 0; e < num_entries; ++e) {
        size_t i = pick(rng), j = pick(rng);
        while (j == i) j = pick(rng);
        const GainEntryStats stats = gain_offdiag_stats(cfg, trials, {i, j}, seed + 7919ull * e);
        GainStatsReport::OffDiagonalCheck check;
        check.i = i;
        check.j = j;
        check.empirical_mean = stats.empirical_mean;
        check.mean_bound = 5.0 * std::sqrt(expected_var / trials);
        check.empirical_variance = stats.empirical_variance;
        check.expected_variance = expected_var;
        check.pass = std::abs(stats.empirical_mean) < check.mean_bound &&
                     std::abs(stats.empirical_variance - expected_var) < 0.05 * expected_var;
        report.off_diagonals.push_back(check);
    }
    return report;
}

}  // namespace otfsradar
