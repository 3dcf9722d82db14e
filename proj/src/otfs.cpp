#include "otfsradar/otfs.hpp"

#include "otfsradar/fft.hpp"

#include <cmath>
#include <random>

namespace otfsradar {

DDFrame gen_qpsk_frame(const SystemConfig& cfg, uint64_t seed) {
    cfg.validate();
    DDFrame frame(cfg.num_doppler_bins, cfg.num_delay_bins);
    const double amp = std::sqrt(cfg.symbol_power / 2.0);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> quadrant(0, 3);
    for (auto& sym : frame.data) {
        int q = quadrant(rng);
        sym = Complex((q & 1) ? amp : -amp, (q & 2) ? amp : -amp);
    }
    return frame;
}

DDFrame gen_bpsk_frame(const SystemConfig& cfg, uint64_t seed) {
    cfg.validate();
    DDFrame frame(cfg.num_doppler_bins, cfg.num_delay_bins);
    const double amp = std::sqrt(cfg.symbol_power);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> bit(0, 1);
    for (auto& sym : frame.data) sym = Complex(bit(rng) ? amp : -amp, 0.0);
    return frame;
}

TFFrame isfft(const DDFrame& dd) {
    const int n = dd.num_doppler, m = dd.num_delay;
    if (n < 1 || m < 1 || dd.data.size() != static_cast<size_t>(n) * m)
        throw std::invalid_argument("isfft: malformed delay-Doppler frame");

    // Forward DFT along delay per Doppler row, then inverse DFT along
    // Doppler per frequency column, on a (k, l)-indexed scratch grid.
    std::vector<Complex> work(dd.data);
    fft::transform(work.data(), m, n, n, 1, fft::Direction::Forward);   // rows k, stride N
    fft::transform(work.data(), n, m, 1, n, fft::Direction::Backward);  // columns l, contiguous

    TFFrame tf(n, m);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n) * m);
    for (int nn = 0; nn < n; ++nn)
        for (int mm = 0; mm < m; ++mm)
            tf.at(nn, mm) = work[static_cast<size_t>(nn) + static_cast<size_t>(n) * mm] * scale;
    return tf;
}

DDFrame sfft(const TFFrame& tf) {
    const int n = tf.num_time, m = tf.num_freq;
    if (n < 1 || m < 1 || tf.data.size() != static_cast<size_t>(n) * m)
        throw std::invalid_argument("sfft: malformed time-frequency frame");

    DDFrame dd(n, m);
    for (int nn = 0; nn < n; ++nn)
        for (int mm = 0; mm < m; ++mm)
            dd.data[static_cast<size_t>(nn) + static_cast<size_t>(n) * mm] = tf.at(nn, mm);

    fft::transform(dd.data.data(), n, m, 1, n, fft::Direction::Forward);   // time -> Doppler
    fft::transform(dd.data.data(), m, n, n, 1, fft::Direction::Backward);  // frequency -> delay
    const double scale = 1.0 / std::sqrt(static_cast<double>(n) * m);
    for (auto& v : dd.data) v *= scale;
    return dd;
}

TimeSignal heisenberg(const TFFrame& tf, const SystemConfig& cfg) {
    const int n = cfg.num_doppler_bins, m = cfg.num_delay_bins, cp = cfg.cp_length_samples;
    if (tf.num_time != n || tf.num_freq != m)
        throw std::invalid_argument("heisenberg: frame does not match config grid");

    std::vector<Complex> body(tf.data);  // row n contiguous: one block per symbol
    fft::transform(body.data(), m, n, 1, m, fft::Direction::Backward);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    for (auto& v : body) v *= scale;

    TimeSignal s;
    s.sample_period_s = cfg.sample_period_s();
    s.cp_length = cp;
    s.samples.resize(body.size() + cp);
    std::copy(body.end() - cp, body.end(), s.samples.begin());
    std::copy(body.begin(), body.end(), s.samples.begin() + cp);
    return s;
}

TFFrame wigner(const TimeSignal& r, const SystemConfig& cfg) {
    const int n = cfg.num_doppler_bins, m = cfg.num_delay_bins, cp = cfg.cp_length_samples;
    const size_t expected = static_cast<size_t>(n) * m + cp;
    if (r.samples.size() != expected)
        throw std::invalid_argument("wigner: signal length does not match N*M + L");

    TFFrame tf(n, m);
    std::copy(r.samples.begin() + cp, r.samples.end(), tf.data.begin());
    fft::transform(tf.data.data(), m, n, 1, m, fft::Direction::Forward);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    for (auto& v : tf.data) v *= scale;
    return tf;
}

DDFrame apply_channel_dd(const DDFrame& x, const TapChannel& taps, const SystemConfig& cfg,
                         std::optional<uint64_t> noise_seed) {
    const int n = cfg.num_doppler_bins, m = cfg.num_delay_bins;
    if (x.num_doppler != n || x.num_delay != m)
        throw std::invalid_argument("apply_channel_dd: frame does not match config grid");
    taps.validate(cfg);

    DDFrame y(n, m);
    const double mn = static_cast<double>(m) * n;
    for (const Tap& tap : taps.taps) {
        const int kp = tap.doppler_bin, lp = tap.delay_bin;
        const int kp_signed = signed_doppler_index(kp, n);
        for (int l = 0; l < m; ++l) {
            const int l_src = mod_floor(l - lp, m);
            const Complex base = tap.gain * std::polar(1.0, kTwoPi * l_src * kp_signed / mn);
            for (int k = 0; k < n; ++k) {
                Complex term = base * x.at(mod_floor(k - kp, n), l_src);
                if (l < lp) term *= std::polar(1.0, -kTwoPi * k / n);
                y.at(k, l) += term;
            }
        }
    }
    if (noise_seed) detail::add_awgn(y.data, cfg.noise_variance, *noise_seed);
    return y;
}

TimeSignal apply_channel_time(const TimeSignal& s, const TapChannel& taps, const SystemConfig& cfg,
                              std::optional<uint64_t> noise_seed) {
    taps.validate(cfg);
    for (const Tap& tap : taps.taps)
        if (tap.delay_bin > cfg.cp_length_samples)
            throw DelayExceedsCpError("tap delay exceeds cyclic prefix length");

    TimeSignal r;
    r.sample_period_s = s.sample_period_s;
    r.cp_length = s.cp_length;
    r.samples = detail::apply_sample_channel(s.samples, detail::to_sample_taps(taps, cfg),
                                             s.cp_length);
    if (noise_seed) detail::add_awgn(r.samples, cfg.noise_variance, *noise_seed);
    return r;
}

namespace detail {

std::vector<SampleTap> to_sample_taps(const TapChannel& taps, const SystemConfig& cfg) {
    // nu * T_s = (k)_N / (N*T) * 1/(M*df) = (k)_N / (N*M)
    const double mn = static_cast<double>(cfg.num_delay_bins) * cfg.num_doppler_bins;
    std::vector<SampleTap> out;
    out.reserve(taps.taps.size());
    for (const Tap& t : taps.taps)
        out.push_back({t.delay_bin,
                       signed_doppler_index(t.doppler_bin, cfg.num_doppler_bins) / mn,
                       t.gain});
    return out;
}

std::vector<Complex> apply_sample_channel(const std::vector<Complex>& s,
                                          const std::vector<SampleTap>& taps, int origin) {
    std::vector<Complex> r(s.size());
    for (const SampleTap& tap : taps) {
        for (size_t u = static_cast<size_t>(std::max(tap.delay_samples, 0)); u < s.size(); ++u) {
            const double t_rel = static_cast<double>(u) - origin - tap.delay_samples;
            r[u] += tap.gain * s[u - tap.delay_samples] *
                    std::polar(1.0, kTwoPi * tap.doppler_cycles_per_sample * t_rel);
        }
    }
    return r;
}

void add_awgn(std::vector<Complex>& samples, double variance, uint64_t seed) {
    if (variance == 0.0) return;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(variance / 2.0));
    for (auto& v : samples) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        v += Complex(re, im);
    }
}

}  // namespace detail

}  // namespace otfsradar
