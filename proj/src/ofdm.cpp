#include "otfsradar/ofdm.hpp"

#include "otfsradar/fft.hpp"

#include <cmath>
#include <random>

namespace otfsradar {

void OfdmConfig::validate() const {
    sys.validate();
    if (range_pad_factor < 1 || doppler_pad_factor < 1)
        throw ConfigError("ofdm pad factors must be >= 1");
}

TFFrame gen_ofdm_symbols(const OfdmConfig& cfg, uint64_t seed) {
    cfg.validate();
    TFFrame grid(cfg.num_symbols(), cfg.num_subcarriers());
    const double amp = std::sqrt(cfg.sys.symbol_power / 2.0);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> quadrant(0, 3);
    for (auto& sym : grid.data) {
        int q = quadrant(rng);
        sym = Complex((q & 1) ? amp : -amp, (q & 2) ? amp : -amp);
    }
    return grid;
}

TimeSignal ofdm_modulate(const TFFrame& symbols, const OfdmConfig& cfg) {
    cfg.validate();
    const int nc = cfg.num_subcarriers(), ns = cfg.num_symbols(), cp = cfg.sys.cp_length_samples;
    if (symbols.num_time != ns || symbols.num_freq != nc)
        throw std::invalid_argument("ofdm_modulate: symbol grid does not match config");

    std::vector<Complex> blocks(symbols.data);  // one symbol per contiguous row
    fft::transform(blocks.data(), nc, ns, 1, nc, fft::Direction::Backward);
    const double scale = 1.0 / std::sqrt(static_cast<double>(nc));
    for (auto& v : blocks) v *= scale;

    TimeSignal s;
    s.sample_period_s = cfg.sys.sample_period_s();
    s.cp_length = cp;  // per-symbol prefix for OFDM signals
    s.samples.resize(static_cast<size_t>(ns) * (nc + cp));
    for (int n = 0; n < ns; ++n) {
        const Complex* body = blocks.data() + static_cast<size_t>(n) * nc;
        Complex* out = s.samples.data() + static_cast<size_t>(n) * (nc + cp);
        std::copy(body + nc - cp, body + nc, out);
        std::copy(body, body + nc, out + cp);
    }
    return s;
}

namespace {

std::vector<double> hamming(int len) {
    std::vector<double> w(len, 1.0);
    if (len < 2) return w;
    for (int i = 0; i < len; ++i) w[i] = 0.54 - 0.46 * std::cos(kTwoPi * i / (len - 1));
    return w;
}

}  // namespace

RangeDopplerMap ofdm_radar_pipeline(const TFFrame& symbols, const TapChannel& taps,
                                    const OfdmConfig& cfg, std::optional<uint64_t> noise_seed) {
    cfg.validate();
    taps.validate(cfg.sys);
    const int nc = cfg.num_subcarriers(), ns = cfg.num_symbols(), cp = cfg.sys.cp_length_samples;
    if (symbols.num_time != ns || symbols.num_freq != nc)
        throw std::invalid_argument("ofdm_radar_pipeline: symbol grid does not match config");
    for (const Tap& tap : taps.taps)
        if (tap.delay_bin > cp) throw DelayExceedsCpError("tap delay exceeds per-symbol CP");

    // Transmit, reflect, receive. Doppler phase reference is the first body
    // sample, matching the OTFS time-domain path.
    const TimeSignal tx = ofdm_modulate(symbols, cfg);
    std::vector<Complex> rx =
        detail::apply_sample_channel(tx.samples, detail::to_sample_taps(taps, cfg.sys), cp);
    if (noise_seed) detail::add_awgn(rx, cfg.sys.noise_variance, *noise_seed);

    // Per-symbol receiver DFT, then element-wise division by the known
    // transmit symbols (unit-modulus QPSK, but guarded regardless).
    std::vector<Complex> divided(static_cast<size_t>(ns) * nc);
    const double fwd_scale = 1.0 / std::sqrt(static_cast<double>(nc));
    for (int n = 0; n < ns; ++n) {
        Complex* row = divided.data() + static_cast<size_t>(n) * nc;
        std::copy(rx.begin() + static_cast<size_t>(n) * (nc + cp) + cp,
                  rx.begin() + static_cast<size_t>(n) * (nc + cp) + cp + nc, row);
        fft::transform(row, nc, fft::Direction::Forward);
        for (int m = 0; m < nc; ++m) {
            const Complex x = symbols.at(n, m);
            if (std::norm(x) <= 0.0)
                throw std::invalid_argument("ofdm_radar_pipeline: zero-magnitude transmit symbol");
            row[m] = row[m] * fwd_scale / x;
        }
    }

    if (cfg.hamming_window) {
        const std::vector<double> wm = hamming(nc), wn = hamming(ns);
        for (int n = 0; n < ns; ++n)
            for (int m = 0; m < nc; ++m) divided[static_cast<size_t>(n) * nc + m] *= wm[m] * wn[n];
    }

    // Range axis: inverse transform across subcarriers, optionally zero padded.
    const int nr = nc * cfg.range_pad_factor;
    const int nd = ns * cfg.doppler_pad_factor;
    std::vector<Complex> padded(static_cast<size_t>(nr) * ns);
    for (int n = 0; n < ns; ++n)
        std::copy(divided.begin() + static_cast<size_t>(n) * nc,
                  divided.begin() + static_cast<size_t>(n + 1) * nc,
                  padded.begin() + static_cast<size_t>(n) * nr);
    fft::transform(padded.data(), nr, ns, 1, nr, fft::Direction::Backward);

    // Doppler axis: forward transform across symbols per range bin.
    std::vector<Complex> spectrum(static_cast<size_t>(nr) * nd);
    for (int n = 0; n < ns; ++n)
        for (int l = 0; l < nr; ++l)
            spectrum[static_cast<size_t>(l) * nd + n] = padded[static_cast<size_t>(n) * nr + l];
    fft::transform(spectrum.data(), nd, nr, 1, nd, fft::Direction::Forward);

    const GridResolutions res = derive_resolutions(cfg.sys);
    RangeDopplerMap map;
    map.num_range = nr;
    map.num_doppler = nd;
    map.range_step_m = res.range_res_m / cfg.range_pad_factor;
    map.velocity_step_m_s = res.velocity_res_m_s / cfg.doppler_pad_factor;
    map.magnitudes.resize(spectrum.size());
    const double scale = 1.0 / std::sqrt(static_cast<double>(nc) * ns);
    for (size_t i = 0; i < spectrum.size(); ++i) map.magnitudes[i] = std::abs(spectrum[i]) * scale;
    return map;
}

OfdmTargetEstimate estimate_target_ofdm(const RangeDopplerMap& map) {
    if (map.magnitudes.empty()) throw std::invalid_argument("estimate_target_ofdm: empty map");
    OfdmTargetEstimate best;
    best.magnitude = -1.0;
    for (int l = 0; l < map.num_range; ++l)
        for (int k = 0; k < map.num_doppler; ++k) {
            const double mag = map.at(l, k);
            if (mag > best.magnitude) best = {l, k, 0.0, 0.0, mag};
        }
    best.range_m = map.range_m(best.range_bin);
    best.velocity_m_s = map.velocity_m_s(best.doppler_bin);
    return best;
}

}  // namespace otfsradar
