#pragma once

#include "otfsradar/types.hpp"

namespace otfsradar::fft {

enum class Direction { Forward, Backward };

/**
 * @brief Batched in-place DFT on strided complex data (unnormalized).
 *
 * Runs `count` transforms of length n. Within one transform consecutive
 * elements are `stride` apart; transform j starts at data + j*dist.
 * Plans are created lazily with deterministic heuristics and cached for the
 * process lifetime, so results are reproducible run to run. Thread-safe.
 */
void transform(Complex* data, int n, int count, int stride, int dist, Direction dir);

/// Single unnormalized in-place DFT of length n on contiguous data.
inline void transform(Complex* data, int n, Direction dir) { transform(data, n, 1, 1, n, dir); }

}  // namespace otfsradar::fft
