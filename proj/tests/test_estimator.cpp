#include "otfsradar/estimator.hpp"

#include "otfsradar/otfs.hpp"

#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"

using namespace otfsradar;

namespace {

SystemConfig small_config(int m, int n, double snr_db = 10.0) {
    SystemConfig cfg;
    cfg.num_delay_bins = m;
    cfg.num_doppler_bins = n;
    cfg.cp_length_samples = m > 1 ? m / 2 : 0;
    cfg.bandwidth_hz = 10e6 * m / 256.0;
    cfg.noise_variance = cfg.symbol_power / std::pow(10.0, snr_db / 10.0);
    return cfg;
}

// Independent transcription of the dictionary entry definition, written
// directly from the case split without shared helpers: i = k' + N l',
// j = k'' + N l''.
Complex oracle_dictionary_entry(const DDFrame& x, int i, int j) {
    const int n = x.num_doppler, m = x.num_delay;
    const int kp = i % n, lp = i / n;
    const int kpp = j % n, lpp = j / n;
    auto pmod = [](int a, int q) { return ((a % q) + q) % q; };
    const int kppn = (kpp <= n / 2) ? kpp : kpp - n;  // (k'')_N
    const int dk = pmod(kp - kpp, n);
    const int dl = pmod(lp - lpp, m);
    const std::complex<double> jj(0.0, 1.0);
    std::complex<double> value =
        x.at(dk, dl) * std::exp(jj * (2.0 * kPi * kppn * dl / (static_cast<double>(m) * n)));
    if (lp < lpp) value *= std::exp(-jj * (2.0 * kPi * kp / static_cast<double>(n)));
    return value;
}

double max_abs_diff(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    REQUIRE(a.size() == b.size());
    double worst = 0.0;
    for (size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

}  // namespace

TEST_CASE("dictionary entries match the brute-force definition") {
    std::mt19937_64 rng(3);
    for (auto [m, n] : {std::pair{2, 2}, std::pair{3, 4}, std::pair{4, 3}, std::pair{8, 8}}) {
        const SystemConfig cfg = small_config(m, n);
        const DDFrame x = gen_qpsk_frame(cfg, rng());
        const Dictionary dict = build_dictionary(x, cfg);
        const size_t mn = dict.dim();
        for (size_t j = 0; j < mn; ++j)
            for (size_t i = 0; i < mn; ++i)
                CHECK(std::abs(dict.entry(i, j) -
                               oracle_dictionary_entry(x, static_cast<int>(i), static_cast<int>(j))) <
                      1e-13);
    }
}

TEST_CASE("dictionary structure") {
    const SystemConfig cfg = small_config(8, 4);
    const DDFrame x = gen_qpsk_frame(cfg, 17);
    const Dictionary dict = build_dictionary(x, cfg);

    SUBCASE("column zero is the vectorized frame") {
        for (size_t i = 0; i < dict.dim(); ++i) CHECK(dict.entry(i, 0) == x.data[i]);
    }

    SUBCASE("every column has squared norm MN * Ps") {
        for (size_t j = 0; j < dict.dim(); ++j) {
            double norm2 = 0.0;
            for (size_t i = 0; i < dict.dim(); ++i) norm2 += std::norm(dict.entry(i, j));
            CHECK(norm2 == doctest::Approx(dict.dim() * cfg.symbol_power).epsilon(1e-13));
        }
    }

    SUBCASE("degenerate 1x1 grid") {
        const SystemConfig tiny = small_config(1, 1);
        const DDFrame x1 = gen_qpsk_frame(tiny, 3);
        const Dictionary d1 = build_dictionary(x1, tiny);
        REQUIRE(d1.dim() == 1);
        CHECK(d1.entry(0, 0) == x1.data[0]);
    }

    SUBCASE("materialization is capped") {
        const SystemConfig big = small_config(256, 64);
        const DDFrame xb = gen_qpsk_frame(big, 1);
        CHECK_THROWS_AS((void)build_dictionary(xb, big), GridTooLargeError);
    }
}

TEST_CASE("dictionary columns reproduce the channel operator") {
    // y = X~ h must equal the direct delay-Doppler channel for random taps.
    const SystemConfig cfg = small_config(8, 8);
    std::mt19937_64 rng(29);
    const DDFrame x = gen_qpsk_frame(cfg, rng());
    const Dictionary dict = build_dictionary(x, cfg);

    TapChannel ch;
    ch.taps.push_back({3, 2, {0.5, -0.25}});
    ch.taps.push_back({7, 5, {-1.0, 0.1}});
    const DDFrame y = apply_channel_dd(x, ch, cfg);

    std::vector<Complex> via_dict(dict.dim());
    for (const Tap& tap : ch.taps) {
        const size_t j = static_cast<size_t>(tap.doppler_bin) +
                         static_cast<size_t>(cfg.num_doppler_bins) * tap.delay_bin;
        for (size_t i = 0; i < dict.dim(); ++i) via_dict[i] += tap.gain * dict.entry(i, j);
    }
    CHECK(max_abs_diff(via_dict, y.data) < 1e-12);
}

TEST_CASE("naive matched filter") {
    const SystemConfig cfg = small_config(16, 8, 10.0);
    const DDFrame x = gen_qpsk_frame(cfg, 101);
    const Dictionary dict = build_dictionary(x, cfg);

    SUBCASE("identity channel: unit normalized peak, sidelobes near 1/sqrt(MN)") {
        TapChannel ch;
        ch.taps.push_back({0, 0, {1.0, 0.0}});
        const DDFrame y = apply_channel_dd(x, ch, cfg);
        const DDEstimate est = matched_filter_naive(y, dict);
        CHECK(std::abs(est.at(0, 0) - Complex(1.0, 0.0)) < 1e-12);
        double rms = 0.0;
        for (size_t i = 1; i < est.grid.size(); ++i) {
            CHECK(std::abs(est.grid[i]) <= 1.0);
            rms += std::norm(est.grid[i]);
        }
        rms = std::sqrt(rms / (est.grid.size() - 1));
        const double expected = 1.0 / std::sqrt(static_cast<double>(est.grid.size()));
        CHECK(rms == doctest::Approx(expected).epsilon(0.5));
    }

    SUBCASE("zero input gives zero estimate") {
        DDFrame zero(cfg.num_doppler_bins, cfg.num_delay_bins);
        const DDEstimate est = matched_filter_naive(zero, dict);
        for (const Complex& v : est.grid) CHECK(v == Complex(0.0, 0.0));
        CHECK(detect_targets(est).empty());
    }

    SUBCASE("estimator is linear in the received frame") {
        const DDFrame y1 = gen_qpsk_frame(cfg, 7);
        const DDFrame y2 = gen_qpsk_frame(cfg, 8);
        DDFrame sum(cfg.num_doppler_bins, cfg.num_delay_bins);
        for (size_t i = 0; i < sum.size(); ++i) sum.data[i] = y1.data[i] + y2.data[i];
        const DDEstimate e1 = matched_filter_naive(y1, dict);
        const DDEstimate e2 = matched_filter_naive(y2, dict);
        const DDEstimate esum = matched_filter_naive(sum, dict);
        for (size_t i = 0; i < esum.grid.size(); ++i)
            CHECK(std::abs(esum.grid[i] - e1.grid[i] - e2.grid[i]) < 1e-12);
    }
}

TEST_CASE("fast matched filter equals the naive one") {
    const SystemConfig cfg = small_config(16, 16, 10.0);
    std::mt19937_64 rng(55);
    std::uniform_int_distribution<int> kd(0, cfg.num_doppler_bins - 1);
    std::uniform_int_distribution<int> ld(0, cfg.num_delay_bins - 1);

    for (int trial = 0; trial < 50; ++trial) {
        const DDFrame x = gen_qpsk_frame(cfg, rng());
        TapChannel ch;
        ch.taps.push_back({kd(rng), ld(rng), {0.9, -0.3}});
        const Tap second{kd(rng), ld(rng), {0.2, 0.4}};
        if (second.doppler_bin != ch.taps[0].doppler_bin || second.delay_bin != ch.taps[0].delay_bin)
            ch.taps.push_back(second);
        const DDFrame y = apply_channel_dd(x, ch, cfg, rng());

        const DDEstimate naive = matched_filter_naive(y, build_dictionary(x, cfg));
        const DDEstimate fast = matched_filter_fast(y, x, cfg);
        const DDEstimate reference = matched_filter_reference(y, x, cfg);
        CHECK(max_abs_diff(naive.grid, fast.grid) < 1e-10);
        CHECK(max_abs_diff(naive.grid, reference.grid) < 1e-12);
    }
}

TEST_CASE("fast and naive agree on the single-tap peak") {
    const SystemConfig cfg = small_config(16, 16, 10.0);
    const DDFrame x = gen_qpsk_frame(cfg, 4);
    TapChannel ch;
    ch.taps.push_back({5, 9, {1.0, 0.0}});
    const DDFrame y = apply_channel_dd(x, ch, cfg);
    const DDEstimate naive = matched_filter_naive(y, build_dictionary(x, cfg));
    const DDEstimate fast = matched_filter_fast(y, x, cfg);
    const Peak pn = naive.argmax(), pf = fast.argmax();
    CHECK(pn.doppler_bin == pf.doppler_bin);
    CHECK(pn.delay_bin == pf.delay_bin);
    CHECK(pn.doppler_bin == 5);
    CHECK(pn.delay_bin == 9);
    CHECK(pn.magnitude == doctest::Approx(pf.magnitude).epsilon(1e-10));
}

TEST_CASE("gain matrix properties") {
    SUBCASE("diagonal is exactly MN * Ps and the matrix is Hermitian") {
        const SystemConfig cfg = small_config(8, 8);
        std::mt19937_64 rng(77);
        for (int f = 0; f < 5; ++f) {
            const DDFrame x = gen_qpsk_frame(cfg, rng());
            const GainMatrix g = gain_matrix(x, cfg);
            const double expect = g.dim * cfg.symbol_power;
            for (size_t i = 0; i < g.dim; ++i)
                CHECK(std::abs(g.at(i, i) - Complex(expect, 0.0)) < 1e-12 * expect);
            for (size_t i = 0; i < g.dim; ++i)
                for (size_t j = i + 1; j < g.dim; ++j)
                    CHECK(std::abs(g.at(i, j) - std::conj(g.at(j, i))) < 1e-12 * expect);
        }
    }

    SUBCASE("entry-wise formula matches the materialized matrix") {
        const SystemConfig cfg = small_config(4, 4);
        const DDFrame x = gen_qpsk_frame(cfg, 13);
        const GainMatrix g = gain_matrix(x, cfg);
        for (size_t i = 0; i < g.dim; ++i)
            for (size_t j = 0; j < g.dim; ++j)
                CHECK(std::abs(g.at(i, j) - gain_entry(x, i, j)) < 1e-11);
    }

    SUBCASE("diagonal dominance strengthens with the grid (off/diag ratio drops)") {
        auto offdiag_ratio = [](int m, int n, uint64_t seed) {
            const SystemConfig cfg = small_config(m, n);
            const DDFrame x = gen_qpsk_frame(cfg, seed);
            const GainMatrix g = gain_matrix(x, cfg);
            double worst = 0.0;
            for (size_t i = 0; i < g.dim; ++i)
                for (size_t j = 0; j < g.dim; ++j)
                    if (i != j) worst = std::max(worst, std::abs(g.at(i, j)));
            return worst / (g.dim * cfg.symbol_power);
        };
        const double small = offdiag_ratio(4, 4, 5);
        const double large = offdiag_ratio(32, 32, 5);
        CHECK(large < small);
    }

    SUBCASE("materialization cap") {
        const SystemConfig cfg = small_config(256, 64);
        const DDFrame x = gen_qpsk_frame(cfg, 1);
        CHECK_THROWS_AS((void)gain_matrix(x, cfg), GridTooLargeError);
    }
}

TEST_CASE("off-diagonal gain entry statistics") {
    const SystemConfig cfg = small_config(4, 4);
    const size_t mn = cfg.grid_size();
    const double expected_var = mn * cfg.symbol_power * cfg.symbol_power;

    SUBCASE("mean near zero, variance near MN * Ps^2") {
        const GainEntryStats stats = gain_offdiag_stats(cfg, 10000, {1, 9}, 2024);
        CHECK(std::abs(stats.empirical_mean) < 5.0 * std::sqrt(expected_var / stats.trials));
        CHECK(std::abs(stats.empirical_variance - expected_var) < 0.05 * expected_var);
    }

    SUBCASE("normalized variance scales as 1/(MN): halving both dims quadruples it") {
        const SystemConfig half = small_config(2, 2);
        const GainEntryStats big = gain_offdiag_stats(cfg, 20000, {1, 9}, 31);
        const GainEntryStats small = gain_offdiag_stats(half, 20000, {1, 3}, 32);
        const double norm_big = big.empirical_variance / (16.0 * 16.0);
        const double norm_small = small.empirical_variance / (4.0 * 4.0);
        CHECK(norm_small / norm_big == doctest::Approx(4.0).epsilon(0.15));
    }

    SUBCASE("preconditions") {
        CHECK_THROWS_AS((void)gain_offdiag_stats(cfg, 10000, {3, 3}, 1), std::invalid_argument);
        CHECK_THROWS_AS((void)gain_offdiag_stats(cfg, 100, {1, 2}, 1), std::invalid_argument);
    }
}

TEST_CASE("QPSK fourth-moment cancellation vs a BPSK alphabet") {
    // The variance result needs E[x^2] = 0. QPSK satisfies it; BPSK has
    // E[x^2] = Ps, and for the pair (i, j) = (0, N/2) every cross term
    // survives with unit phase, doubling the variance to 2 * MN * Ps^2.
    const SystemConfig cfg = small_config(4, 4);
    const size_t mn = cfg.grid_size();
    const int trials = 20000;

    SUBCASE("alphabet second moments") {
        Complex qpsk_sq{0.0, 0.0}, bpsk_sq{0.0, 0.0};
        int count = 0;
        for (uint64_t seed = 0; seed < 500; ++seed) {
            const DDFrame q = gen_qpsk_frame(cfg, seed);
            const DDFrame b = gen_bpsk_frame(cfg, seed);
            for (size_t i = 0; i < q.size(); ++i) {
                qpsk_sq += q.data[i] * q.data[i];
                bpsk_sq += b.data[i] * b.data[i];
                ++count;
            }
        }
        CHECK(std::abs(qpsk_sq / double(count)) < 0.05);
        CHECK(std::abs(bpsk_sq / double(count) - Complex(cfg.symbol_power, 0.0)) < 1e-12);
    }

    SUBCASE("BPSK doubles the sidelobe variance at the half-grid pair") {
        const size_t i = 0, j = cfg.num_doppler_bins / 2;  // (k''-k') = N/2, l' = l''
        Complex mean_acc{0.0, 0.0};
        std::vector<Complex> samples(trials);
        for (int t = 0; t < trials; ++t) {
            const DDFrame x = gen_bpsk_frame(cfg, 9000 + t);
            samples[t] = gain_entry(x, i, j);
            mean_acc += samples[t];
        }
        const Complex mean = mean_acc / double(trials);
        double var = 0.0;
        for (const Complex& s : samples) var += std::norm(s - mean);
        var /= trials;
        const double qpsk_var = mn * cfg.symbol_power * cfg.symbol_power;
        CHECK(var == doctest::Approx(2.0 * qpsk_var).epsilon(0.10));
    }
}

TEST_CASE("noise-only estimate has per-bin variance sigma^2/(MN Ps)") {
    SystemConfig cfg = small_config(16, 16);
    cfg.noise_variance = 0.5;
    const DDFrame x = gen_qpsk_frame(cfg, 500);
    const size_t mn = cfg.grid_size();
    TapChannel empty;
    DDFrame zero(cfg.num_doppler_bins, cfg.num_delay_bins);

    double acc = 0.0;
    size_t count = 0;
    for (uint64_t seed = 0; seed < 80; ++seed) {
        const DDFrame w = apply_channel_dd(zero, empty, cfg, seed);  // pure noise
        const DDEstimate est = matched_filter_fast(w, x, cfg);
        for (const Complex& v : est.grid) acc += std::norm(v);
        count += est.grid.size();
    }
    const double var = acc / static_cast<double>(count);
    const double expected = cfg.noise_variance / (mn * cfg.symbol_power);
    CHECK(std::abs(var - expected) < 0.05 * expected);
}

TEST_CASE("detection") {
    SUBCASE("noiseless single tap yields exactly one detection at the true bin") {
        const SystemConfig cfg = small_config(16, 16);
        const DDFrame x = gen_qpsk_frame(cfg, 60);
        TapChannel ch;
        ch.taps.push_back({3, 7, {1.0, 0.0}});
        const DDFrame y = apply_channel_dd(x, ch, cfg);
        const auto hits = detect_targets(matched_filter_fast(y, x, cfg));
        REQUIRE(hits.size() == 1);
        CHECK(hits[0].doppler_bin == 3);
        CHECK(hits[0].delay_bin == 7);
        CHECK(std::abs(hits[0].gain_estimate - Complex(1.0, 0.0)) < 0.05);
    }

    SUBCASE("two equal targets at 10 dB SNR are both detected in nearly all trials") {
        SystemConfig cfg;  // full-size grid
        cfg.cp_length_samples = 128;
        TapChannel ch;
        ch.taps.push_back({21, 65, {1.0, 0.0}});
        ch.taps.push_back({50, 20, {1.0, 0.0}});
        int both = 0;
        const int trials = 100;
        for (int t = 0; t < trials; ++t) {
            const DDFrame x = gen_qpsk_frame(cfg, 7000 + t);
            const DDFrame y = apply_channel_dd(x, ch, cfg, 9000 + t);
            const auto hits = detect_targets(matched_filter_fast(y, x, cfg));
            int found = 0;
            for (const auto& h : hits)
                for (const Tap& tap : ch.taps)
                    if (h.doppler_bin == tap.doppler_bin && h.delay_bin == tap.delay_bin) ++found;
            if (found == 2) ++both;
        }
        CHECK(both >= 99);
    }

    SUBCASE("detections come out sorted by magnitude") {
        const SystemConfig cfg = small_config(16, 16);
        const DDFrame x = gen_qpsk_frame(cfg, 61);
        TapChannel ch;
        ch.taps.push_back({2, 2, {1.0, 0.0}});
        ch.taps.push_back({9, 12, {0.5, 0.0}});
        const DDFrame y = apply_channel_dd(x, ch, cfg);
        const auto hits = detect_targets(matched_filter_fast(y, x, cfg));
        REQUIRE(hits.size() >= 2);
        for (size_t i = 1; i < hits.size(); ++i) CHECK(hits[i - 1].magnitude >= hits[i].magnitude);
        CHECK(hits[0].doppler_bin == 2);
        CHECK(hits[1].doppler_bin == 9);
    }
}
