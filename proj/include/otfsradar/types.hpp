#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace otfsradar {

using Complex = std::complex<double>;

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

/// Floor modulo: result is always in [0, n) even for negative values.
inline int mod_floor(int value, int n) {
    int r = value % n;
    return (r < 0) ? r + n : r;
}

/// Signed Doppler index (k)_N: k for k <= N/2, k - N otherwise.
inline int signed_doppler_index(int k, int num_doppler) {
    return (2 * k <= num_doppler) ? k : k - num_doppler;
}

/**
 * @brief M x N complex symbol grid on the delay-Doppler plane.
 *
 * Storage is Doppler-major within each delay column: element (k, l) lives at
 * index k + N*l. This matches the vectorization convention used throughout
 * the estimator (vector position k + N*l <-> grid position (k, l)), so
 * vec(x) is simply the flat data array.
 */
struct DDFrame {
    int num_doppler = 0;  // N, rows (Doppler bins k)
    int num_delay = 0;    // M, columns (delay bins l)
    std::vector<Complex> data;

    DDFrame() = default;
    DDFrame(int n_doppler, int n_delay)
        : num_doppler(n_doppler),
          num_delay(n_delay),
          data(static_cast<size_t>(n_doppler) * n_delay) {}

    size_t size() const { return data.size(); }

    Complex& at(int k, int l) { return data[static_cast<size_t>(k) + static_cast<size_t>(num_doppler) * l]; }
    const Complex& at(int k, int l) const {
        return data[static_cast<size_t>(k) + static_cast<size_t>(num_doppler) * l];
    }
};

/**
 * @brief N x M complex grid of modulated time-frequency samples X[n, m].
 *
 * Storage is frequency-major within each time row: element (n, m) lives at
 * index m + M*n, so one multicarrier symbol occupies a contiguous block.
 */
struct TFFrame {
    int num_time = 0;  // N, multicarrier symbols n
    int num_freq = 0;  // M, subcarriers m
    std::vector<Complex> data;

    TFFrame() = default;
    TFFrame(int n_time, int n_freq)
        : num_time(n_time), num_freq(n_freq), data(static_cast<size_t>(n_time) * n_freq) {}

    size_t size() const { return data.size(); }

    Complex& at(int n, int m) { return data[static_cast<size_t>(m) + static_cast<size_t>(num_freq) * n]; }
    const Complex& at(int n, int m) const {
        return data[static_cast<size_t>(m) + static_cast<size_t>(num_freq) * n];
    }
};

/**
 * @brief Sampled complex baseband signal with a single leading cyclic prefix.
 *
 * samples[0 .. cp_length) is the cyclic prefix (a copy of the last cp_length
 * body samples); the body starts at samples[cp_length]. The time origin t = 0
 * is the first body sample, so the prefix occupies negative time. Channel
 * Doppler phases are referenced to this origin.
 */
struct TimeSignal {
    std::vector<Complex> samples;
    double sample_period_s = 0.0;
    int cp_length = 0;

    size_t body_size() const { return samples.size() - static_cast<size_t>(cp_length); }
};

}  // namespace otfsradar
