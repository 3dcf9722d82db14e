#include "otfsradar/estimator.hpp"

#include "otfsradar/fft.hpp"
#include "otfsradar/otfs.hpp"

#include <algorithm>
#include <cmath>

namespace otfsradar {

namespace {

void check_frame(const DDFrame& f, const SystemConfig& cfg, const char* what) {
    if (f.num_doppler != cfg.num_doppler_bins || f.num_delay != cfg.num_delay_bins)
        throw std::invalid_argument(std::string(what) + ": frame does not match config grid");
}

/// Roots-of-unity table: roots[r] = exp(j2pi*r/(MN)).
std::vector<Complex> unity_roots(size_t mn) {
    std::vector<Complex> roots(mn);
    for (size_t r = 0; r < mn; ++r) roots[r] = std::polar(1.0, kTwoPi * r / mn);
    return roots;
}

DDEstimate finalize_estimate(int n, int m, std::vector<Complex> grid) {
    DDEstimate est;
    est.num_doppler = n;
    est.num_delay = m;
    est.grid = std::move(grid);

    std::vector<double> powers(est.grid.size());
    for (size_t i = 0; i < est.grid.size(); ++i) powers[i] = std::norm(est.grid[i]);
    std::vector<double> scratch(powers);
    auto mid = scratch.begin() + scratch.size() / 2;
    std::nth_element(scratch.begin(), mid, scratch.end());
    est.noise_floor_power = *mid / std::log(2.0);

    for (const Detection& d : detect_targets(est))
        est.peaks.push_back({d.doppler_bin, d.delay_bin, d.magnitude});
    return est;
}

}  // namespace

Peak DDEstimate::argmax() const {
    Peak best;
    double best_power = -1.0;
    for (int l = 0; l < num_delay; ++l)
        for (int k = 0; k < num_doppler; ++k) {
            double p = std::norm(at(k, l));
            if (p > best_power) {
                best_power = p;
                best = {k, l, std::sqrt(p)};
            }
        }
    return best;
}

Dictionary build_dictionary(const DDFrame& x, const SystemConfig& cfg, size_t max_grid) {
    check_frame(x, cfg, "build_dictionary");
    const int n = cfg.num_doppler_bins, m = cfg.num_delay_bins;
    const size_t mn = static_cast<size_t>(n) * m;
    if (mn > max_grid)
        throw GridTooLargeError("dictionary materialization needs O((MN)^2) memory; grid too large");

    Dictionary dict;
    dict.num_doppler = n;
    dict.num_delay = m;
    dict.symbol_power = cfg.symbol_power;
    dict.entries.resize(mn * mn);

    const std::vector<Complex> roots = unity_roots(mn);
    for (int lpp = 0; lpp < m; ++lpp) {
        for (int kpp = 0; kpp < n; ++kpp) {
            const size_t j = static_cast<size_t>(kpp) + static_cast<size_t>(n) * lpp;
            Complex* col = dict.entries.data() + mn * j;
            const int kpp_signed = signed_doppler_index(kpp, n);
            for (int lp = 0; lp < m; ++lp) {
                const int l_shift = mod_floor(lp - lpp, m);
                const Complex phase =
                    roots[static_cast<size_t>(mod_floor(kpp_signed * l_shift, static_cast<int>(mn)))];
                for (int kp = 0; kp < n; ++kp) {
                    Complex v = x.at(mod_floor(kp - kpp, n), l_shift) * phase;
                    if (lp < lpp) v *= roots[static_cast<size_t>(mod_floor(-kp * m, static_cast<int>(mn)))];
                    col[static_cast<size_t>(kp) + static_cast<size_t>(n) * lp] = v;
                }
            }
        }
    }
    return dict;
}

DDEstimate matched_filter_naive(const DDFrame& y, const Dictionary& dict) {
    const size_t mn = dict.dim();
    if (y.data.size() != mn || y.num_doppler != dict.num_doppler)
        throw std::invalid_argument("matched_filter_naive: dimensions disagree");

    std::vector<Complex> grid(mn);
    const double scale = 1.0 / (static_cast<double>(mn) * dict.symbol_power);
    for (size_t j = 0; j < mn; ++j) {
        const Complex* col = dict.col(j);
        Complex acc{0.0, 0.0};
        for (size_t i = 0; i < mn; ++i) acc += std::conj(col[i]) * y.data[i];
        grid[j] = acc * scale;
    }
    return finalize_estimate(dict.num_doppler, dict.num_delay, std::move(grid));
}

DDEstimate matched_filter_fast(const DDFrame& y, const DDFrame& x, const SystemConfig& cfg) {
    check_frame(x, cfg, "matched_filter_fast");
    check_frame(y, cfg, "matched_filter_fast");
    const int n = cfg.num_doppler_bins, m = cfg.num_delay_bins;
    const size_t mn = static_cast<size_t>(n) * m;

    // Doppler-axis spectra of every delay column (columns are contiguous).
    std::vector<Complex> x_hat(x.data), y_hat(y.data);
    fft::transform(x_hat.data(), n, m, 1, n, fft::Direction::Forward);
    fft::transform(y_hat.data(), n, m, 1, n, fft::Direction::Forward);

    // weight[k + N*a] = exp(-j2pi*(k)_N*a/(MN)); rot[k] = exp(j2pi*k/N).
    std::vector<Complex> weight(mn);
    for (int a = 0; a < m; ++a)
        for (int k = 0; k < n; ++k)
            weight[static_cast<size_t>(k) + static_cast<size_t>(n) * a] =
                std::polar(1.0, -kTwoPi * signed_doppler_index(k, n) * a / static_cast<double>(mn));
    std::vector<Complex> rot(n);
    for (int k = 0; k < n; ++k) rot[k] = std::polar(1.0, kTwoPi * k / n);

    std::vector<Complex> grid(mn);
    std::vector<Complex> corr(mn);
    const double scale = 1.0 / (static_cast<double>(n) * static_cast<double>(mn) * cfg.symbol_power);

    for (int lpp = 0; lpp < m; ++lpp) {
        // Column pair (a, a + l'') of x and y; pairs with a + l'' >= M wrap
        // around the delay axis and pick up the extra CP phase. The wrapped
        // case correlates against x modulated by exp(-j2pi*b/N), whose
        // spectrum is the cyclic shift X[(f+1) mod N].
        for (int a = 0; a < m; ++a) {
            const bool wrapped = (a + lpp >= m);
            const int c = wrapped ? a + lpp - m : a + lpp;
            const Complex* xa = x_hat.data() + static_cast<size_t>(n) * a;
            const Complex* yc = y_hat.data() + static_cast<size_t>(n) * c;
            Complex* dst = corr.data() + static_cast<size_t>(n) * a;
            if (wrapped) {
                for (int f = 0; f < n; ++f) dst[f] = std::conj(xa[(f + 1) % n]) * yc[f];
            } else {
                for (int f = 0; f < n; ++f) dst[f] = std::conj(xa[f]) * yc[f];
            }
        }
        fft::transform(corr.data(), n, m, 1, n, fft::Direction::Backward);

        Complex* out = grid.data() + static_cast<size_t>(n) * lpp;
        const int wrap_start = m - lpp;
        for (int a = 0; a < m; ++a) {
            const Complex* ca = corr.data() + static_cast<size_t>(n) * a;
            const Complex* wa = weight.data() + static_cast<size_t>(n) * a;
            if (a < wrap_start) {
                for (int k = 0; k < n; ++k) out[k] += ca[k] * wa[k];
            } else {
                for (int k = 0; k < n; ++k) out[k] += ca[k] * wa[k] * rot[k];
            }
        }
    }
    for (auto& v : grid) v *= scale;
    return finalize_estimate(n, m, std::move(grid));
}

DDEstimate matched_filter_reference(const DDFrame& y, const DDFrame& x, const SystemConfig& cfg) {
    check_frame(x, cfg, "matched_filter_reference");
    check_frame(y, cfg, "matched_filter_reference");
    const int n = cfg.num_doppler_bins, m = cfg.num_delay_bins;
    const size_t mn = static_cast<size_t>(n) * m;

    const std::vector<Complex> roots = unity_roots(mn);
    std::vector<Complex> rot(n);  // conj of the CP phase: exp(+j2pi*k'/N)
    for (int k = 0; k < n; ++k) rot[k] = std::polar(1.0, kTwoPi * k / n);

    std::vector<Complex> grid(mn);
    const double scale = 1.0 / (static_cast<double>(mn) * cfg.symbol_power);
    for (int lpp = 0; lpp < m; ++lpp) {
        for (int kpp = 0; kpp < n; ++kpp) {
            const int kpp_signed = signed_doppler_index(kpp, n);
            Complex acc{0.0, 0.0};
            for (int lp = 0; lp < m; ++lp) {
                const int l_shift = mod_floor(lp - lpp, m);
                const Complex phase_c = std::conj(
                    roots[static_cast<size_t>(mod_floor(kpp_signed * l_shift, static_cast<int>(mn)))]);
                const Complex* ycol = y.data.data() + static_cast<size_t>(n) * lp;
                Complex inner{0.0, 0.0};
                if (lp < lpp) {
                    for (int kp = 0; kp < n; ++kp)
                        inner += std::conj(x.at(mod_floor(kp - kpp, n), l_shift)) * ycol[kp] * rot[kp];
                } else {
                    for (int kp = 0; kp < n; ++kp)
                        inner += std::conj(x.at(mod_floor(kp - kpp, n), l_shift)) * ycol[kp];
                }
                acc += inner * phase_c;
            }
            grid[static_cast<size_t>(kpp) + static_cast<size_t>(n) * lpp] = acc * scale;
        }
    }
    return finalize_estimate(n, m, std::move(grid));
}

GainMatrix gain_matrix(const DDFrame& x, const SystemConfig& cfg, size_t max_grid) {
    const size_t mn = cfg.grid_size();
    if (mn > max_grid) throw GridTooLargeError("gain matrix needs O((MN)^2) memory; grid too large");
    const Dictionary dict = build_dictionary(x, cfg, max_grid);

    GainMatrix g;
    g.dim = mn;
    g.data.resize(mn * mn);
    for (size_t i = 0; i < mn; ++i) {
        const Complex* ci = dict.col(i);
        for (size_t j = i; j < mn; ++j) {
            const Complex* cj = dict.col(j);
            Complex acc{0.0, 0.0};
            for (size_t u = 0; u < mn; ++u) acc += std::conj(ci[u]) * cj[u];
            g.data[i * mn + j] = acc;
            g.data[j * mn + i] = std::conj(acc);
        }
    }
    return g;
}

Complex gain_entry(const DDFrame& x, size_t i, size_t j) {
    const int n = x.num_doppler, m = x.num_delay;
    const size_t mn = x.size();
    if (i >= mn || j >= mn) throw std::invalid_argument("gain_entry: index out of range");

    const int kp = static_cast<int>(i) % n, lp = static_cast<int>(i) / n;
    const int kpp = static_cast<int>(j) % n, lpp = static_cast<int>(j) / n;
    const int kp_signed = signed_doppler_index(kp, n);
    const int kpp_signed = signed_doppler_index(kpp, n);

    Complex acc{0.0, 0.0};
    for (int l = 0; l < m; ++l) {
        const int dl_p = mod_floor(l - lp, m);
        const int dl_pp = mod_floor(l - lpp, m);
        const double base = kTwoPi * (kpp_signed * dl_pp - kp_signed * dl_p) / static_cast<double>(mn);
        double extra = 0.0;  // CP phase branch of phi(i, j, k, l)
        if (lp <= l && l < lpp) extra = -kTwoPi / n;
        else if (lpp <= l && l < lp) extra = kTwoPi / n;
        for (int k = 0; k < n; ++k) {
            const Complex phi = std::polar(1.0, base + extra * k);
            acc += std::conj(x.at(mod_floor(k - kp, n), dl_p)) * x.at(mod_floor(k - kpp, n), dl_pp) * phi;
        }
    }
    return acc;
}

GainEntryStats gain_offdiag_stats(const SystemConfig& cfg, int num_trials,
                                  std::pair<size_t, size_t> ij, uint64_t seed) {
    cfg.validate();
    if (ij.first == ij.second) throw std::invalid_argument("gain_offdiag_stats: requires i != j");
    if (num_trials < 1000) throw std::invalid_argument("gain_offdiag_stats: requires >= 1000 trials");
    const size_t mn = cfg.grid_size();
    if (ij.first >= mn || ij.second >= mn)
        throw std::invalid_argument("gain_offdiag_stats: index out of range");

    Complex sum{0.0, 0.0};
    double sum_sq = 0.0;
    std::vector<Complex> samples(static_cast<size_t>(num_trials));
    for (int t = 0; t < num_trials; ++t) {
        const DDFrame x = gen_qpsk_frame(cfg, seed + static_cast<uint64_t>(t));
        samples[t] = gain_entry(x, ij.first, ij.second);
        sum += samples[t];
    }
    const Complex mean = sum / static_cast<double>(num_trials);
    for (const Complex& s : samples) sum_sq += std::norm(s - mean);

    GainEntryStats stats;
    stats.empirical_mean = mean;
    stats.empirical_variance = sum_sq / static_cast<double>(num_trials);
    stats.trials = num_trials;
    return stats;
}

std::vector<Detection> detect_targets(const DDEstimate& est, const DetectionPolicy& policy) {
    const double threshold = est.noise_floor_power * std::pow(10.0, policy.threshold_db / 10.0);
    std::vector<Detection> hits;
    for (int l = 0; l < est.num_delay; ++l)
        for (int k = 0; k < est.num_doppler; ++k) {
            const Complex v = est.at(k, l);
            const double p = std::norm(v);
            if (p > threshold) hits.push_back({k, l, v, std::sqrt(p)});
        }
    std::sort(hits.begin(), hits.end(), [](const Detection& a, const Detection& b) {
        if (a.magnitude != b.magnitude) return a.magnitude > b.magnitude;
        if (a.delay_bin != b.delay_bin) return a.delay_bin < b.delay_bin;
        return a.doppler_bin < b.doppler_bin;
    });
    return hits;
}

}  // namespace otfsradar
