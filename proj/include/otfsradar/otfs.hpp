#pragma once

#include "otfsradar/grid.hpp"
#include "otfsradar/types.hpp"

#include <cstdint>
#include <optional>

namespace otfsradar {

/// A channel tap delay exceeds the cyclic prefix length.
struct DelayExceedsCpError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/**
 * @brief i.i.d. QPSK frame: each symbol uniform on {(+-1 +- j) * sqrt(P_s/2)}.
 * Deterministic for a given seed.
 */
DDFrame gen_qpsk_frame(const SystemConfig& cfg, uint64_t seed);

/// BPSK frame (+-sqrt(P_s)). Contrast alphabet: its symbols have E[x^2] != 0,
/// so the matched-filter sidelobe statistics differ from the QPSK case.
DDFrame gen_bpsk_frame(const SystemConfig& cfg, uint64_t seed);

/**
 * @brief Inverse symplectic finite Fourier transform (delay-Doppler -> time-frequency).
 *
 * X[n,m] = (1/sqrt(NM)) sum_{k,l} x[k,l] exp(j2pi(nk/N - ml/M)). Unitary.
 */
TFFrame isfft(const DDFrame& dd);

/// Symplectic finite Fourier transform; exact inverse of isfft.
DDFrame sfft(const TFFrame& tf);

/**
 * @brief Heisenberg transform with rectangular transmit pulse, reduced CP.
 *
 * Each time row X[n,.] becomes M samples via a unitary inverse DFT; the N
 * blocks are concatenated and one cyclic prefix of cfg.cp_length_samples
 * guards the whole NM-sample body. Sampling rate is M*df (one sample per
 * delay bin).
 */
TimeSignal heisenberg(const TFFrame& tf, const SystemConfig& cfg);

/// Wigner transform with matched rectangular receive pulse: drop the CP,
/// then a unitary forward DFT per M-sample block. Inverse of heisenberg over
/// an identity channel.
TFFrame wigner(const TimeSignal& r, const SystemConfig& cfg);

/**
 * @brief Exact delay-Doppler domain channel.
 *
 * y[k,l] = sum_taps h[k',l'] * exp(j2pi*[l-l']_M*(k')_N/(MN)) * alpha * x[[k-k']_N, [l-l']_M]
 * with alpha = exp(-j2pi*k/N) for 0 <= l < l' and 1 for l' <= l < M.
 * When noise_seed is given, adds i.i.d. circular complex Gaussian noise of
 * variance cfg.noise_variance per bin.
 */
DDFrame apply_channel_dd(const DDFrame& x, const TapChannel& taps, const SystemConfig& cfg,
                         std::optional<uint64_t> noise_seed = std::nullopt);

/**
 * @brief Discrete time-domain channel: r[n] = sum_taps h * s[n-l] * exp(j2pi*nu*(n-l)*T_s).
 *
 * n is the time index relative to the body start (the CP occupies n < 0) and
 * nu = (k)_N/(N*T). Requires every tap delay <= cfg.cp_length_samples. This
 * is the independent oracle for apply_channel_dd: the full chain
 * sfft(wigner(apply_channel_time(heisenberg(isfft(x))))) matches it exactly.
 */
TimeSignal apply_channel_time(const TimeSignal& s, const TapChannel& taps, const SystemConfig& cfg,
                              std::optional<uint64_t> noise_seed = std::nullopt);

namespace detail {

/// Physical tap for sample-domain channels: integer delay, Doppler in cycles
/// per sample, complex gain.
struct SampleTap {
    int delay_samples;
    double doppler_cycles_per_sample;
    Complex gain;
};

std::vector<SampleTap> to_sample_taps(const TapChannel& taps, const SystemConfig& cfg);

/// Shared delay-Doppler channel on a raw sample buffer. Sample u of the
/// output sums gain * s[u - delay] * exp(j2pi * doppler * (u - origin - delay))
/// over taps; s[] is zero before the buffer start.
std::vector<Complex> apply_sample_channel(const std::vector<Complex>& s,
                                          const std::vector<SampleTap>& taps, int origin);

/// Adds circular complex Gaussian noise of the given variance in place.
void add_awgn(std::vector<Complex>& samples, double variance, uint64_t seed);

}  // namespace detail

}  // namespace otfsradar
