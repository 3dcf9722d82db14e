#include "otfsradar/grid.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"

using namespace otfsradar;

namespace {

SystemConfig canonical_config() { return SystemConfig{}; }

}  // namespace

TEST_CASE("canonical grid resolutions") {
    const SystemConfig cfg = canonical_config();
    const GridResolutions res = derive_resolutions(cfg);

    CHECK(res.range_res_m == 15.0);
    CHECK(res.max_unambiguous_range_m == 3840.0);
    CHECK(res.delay_res_s == doctest::Approx(1e-7).epsilon(1e-12));
    CHECK(res.doppler_res_hz == doctest::Approx(610.3515625).epsilon(1e-12));
    // Velocity resolution agrees with the published 3.8125 m/s to 3
    // significant digits; the print used a coarser rounding chain.
    CHECK(std::abs(res.velocity_res_m_s - 3.8125) <= 0.005);
    CHECK(std::abs(res.max_unambiguous_velocity_m_s - 122.0) <= 0.1);
}

TEST_CASE("unit grid identities") {
    SystemConfig cfg;
    cfg.num_delay_bins = 1;
    cfg.num_doppler_bins = 1;
    cfg.bandwidth_hz = 1.0;  // df = 1 Hz
    cfg.carrier_freq_hz = cfg.speed_of_light_m_s / 2.0;
    cfg.cp_length_samples = 0;
    const GridResolutions res = derive_resolutions(cfg);
    CHECK(res.range_res_m == doctest::Approx(cfg.speed_of_light_m_s / 2.0));
    CHECK(res.doppler_res_hz == doctest::Approx(1.0));
    CHECK(res.velocity_res_m_s == doctest::Approx(1.0));
}

TEST_CASE("resolution identities hold to machine precision on random configs") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> dim(1, 512);
    std::uniform_real_distribution<double> band(1e4, 1e9), carrier(1e8, 1e11);
    for (int i = 0; i < 200; ++i) {
        SystemConfig cfg;
        cfg.num_delay_bins = dim(rng);
        cfg.num_doppler_bins = dim(rng);
        cfg.bandwidth_hz = band(rng);
        cfg.carrier_freq_hz = carrier(rng);
        cfg.cp_length_samples = 0;
        const GridResolutions res = derive_resolutions(cfg);
        CHECK(res.range_res_m * 2.0 * cfg.bandwidth_hz / cfg.speed_of_light_m_s ==
              doctest::Approx(1.0).epsilon(1e-14));
        CHECK(res.velocity_res_m_s * 2.0 * cfg.carrier_freq_hz * cfg.frame_duration_s() /
                  cfg.speed_of_light_m_s ==
              doctest::Approx(1.0).epsilon(1e-14));
        CHECK(cfg.subcarrier_spacing_hz() * cfg.symbol_duration_s() ==
              doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("scene_to_taps maps the canonical scenario") {
    const SystemConfig cfg = canonical_config();
    const GridResolutions res = derive_resolutions(cfg);

    SUBCASE("975 m is delay tap 65, exactly on grid") {
        const Target t{975.0, 0.0, {1.0, 0.0}};
        const TapChannel ch = scene_to_taps(std::span(&t, 1), cfg, QuantizeMode::Exact);
        REQUIRE(ch.taps.size() == 1);
        CHECK(ch.taps[0].delay_bin == 65);
        CHECK(ch.taps[0].doppler_bin == 0);
        CHECK(ch.taps[0].delay_residual_bins == doctest::Approx(0.0).epsilon(1e-9));
    }

    SUBCASE("21 velocity taps land on Doppler bin 21") {
        const Target t{975.0, 21.0 * res.velocity_res_m_s, {1.0, 0.0}};
        const TapChannel ch = scene_to_taps(std::span(&t, 1), cfg, QuantizeMode::Exact);
        CHECK(ch.taps[0].doppler_bin == 21);
    }

    SUBCASE("negative velocity wraps: -3 taps -> bin N-3") {
        const Target t{975.0, -3.0 * res.velocity_res_m_s, {1.0, 0.0}};
        const TapChannel ch = scene_to_taps(std::span(&t, 1), cfg, QuantizeMode::Exact);
        CHECK(ch.taps[0].doppler_bin == cfg.num_doppler_bins - 3);
        CHECK(signed_doppler_index(ch.taps[0].doppler_bin, cfg.num_doppler_bins) == -3);
    }

    SUBCASE("exact mode rejects off-grid targets") {
        const Target t{975.0, 80.0, {1.0, 0.0}};  // 80 m/s is not a tap multiple
        CHECK_THROWS_AS((void)scene_to_taps(std::span(&t, 1), cfg, QuantizeMode::Exact),
                        NonIntegerTapError);
    }

    SUBCASE("nearest mode quantizes 80 m/s to tap 21 and records the residual") {
        const Target t{975.0, 80.0, {1.0, 0.0}};
        const TapChannel ch = scene_to_taps(std::span(&t, 1), cfg, QuantizeMode::Nearest);
        CHECK(ch.taps[0].doppler_bin == 21);
        const double expected_residual = 80.0 / res.velocity_res_m_s - 21.0;
        CHECK(ch.taps[0].doppler_residual_bins == doctest::Approx(expected_residual).epsilon(1e-12));
    }

    SUBCASE("ambiguity limits") {
        Target t{4000.0, 0.0, {1.0, 0.0}};
        CHECK_THROWS_AS((void)scene_to_taps(std::span(&t, 1), cfg, QuantizeMode::Nearest),
                        OutOfAmbiguityRangeError);
        t = {0.0, 0.0, {1.0, 0.0}};
        CHECK_THROWS_AS((void)scene_to_taps(std::span(&t, 1), cfg, QuantizeMode::Nearest),
                        OutOfAmbiguityRangeError);
        t = {975.0, res.max_unambiguous_velocity_m_s + 1.0, {1.0, 0.0}};
        CHECK_THROWS_AS((void)scene_to_taps(std::span(&t, 1), cfg, QuantizeMode::Nearest),
                        OutOfAmbiguityRangeError);
        t = {975.0, -res.max_unambiguous_velocity_m_s, {1.0, 0.0}};  // boundary excluded
        CHECK_THROWS_AS((void)scene_to_taps(std::span(&t, 1), cfg, QuantizeMode::Nearest),
                        OutOfAmbiguityRangeError);
    }

    SUBCASE("two targets on the same tap are rejected") {
        const Target a{975.0, 80.0, {1.0, 0.0}};
        const Target b{974.0, 80.2, {0.5, 0.0}};  // quantizes to the same (k, l)
        const Target scene[] = {a, b};
        CHECK_THROWS_AS((void)scene_to_taps(scene, cfg, QuantizeMode::Nearest),
                        std::invalid_argument);
    }
}

TEST_CASE("taps_to_scene inverts tap indices") {
    const SystemConfig cfg = canonical_config();
    const GridResolutions res = derive_resolutions(cfg);

    SUBCASE("canonical tap (21, 65)") {
        TapChannel ch;
        ch.taps.push_back({21, 65, {1.0, 0.0}});
        const auto scene = taps_to_scene(ch, cfg);
        REQUIRE(scene.size() == 1);
        CHECK(scene[0].range_m == doctest::Approx(975.0).epsilon(1e-12));
        CHECK(scene[0].velocity_m_s == doctest::Approx(21.0 * res.velocity_res_m_s).epsilon(1e-12));
    }

    SUBCASE("delay bin 0 maps to range 0 by convention") {
        TapChannel ch;
        ch.taps.push_back({1, 0, {1.0, 0.0}});
        CHECK(taps_to_scene(ch, cfg)[0].range_m == 0.0);
    }

    SUBCASE("Doppler bin N/2 is +V_max") {
        TapChannel ch;
        ch.taps.push_back({cfg.num_doppler_bins / 2, 1, {1.0, 0.0}});
        CHECK(taps_to_scene(ch, cfg)[0].velocity_m_s ==
              doctest::Approx(res.max_unambiguous_velocity_m_s).epsilon(1e-12));
    }

    SUBCASE("round trip is exact on tap indices") {
        std::mt19937_64 rng(11);
        std::uniform_int_distribution<int> kd(0, cfg.num_doppler_bins - 1);
        std::uniform_int_distribution<int> ld(1, cfg.num_delay_bins - 1);
        for (int i = 0; i < 100; ++i) {
            TapChannel ch;
            ch.taps.push_back({kd(rng), ld(rng), {0.3, -0.7}});
            const auto scene = taps_to_scene(ch, cfg);
            const TapChannel back = scene_to_taps(scene, cfg, QuantizeMode::Exact);
            CHECK(back.taps[0].doppler_bin == ch.taps[0].doppler_bin);
            CHECK(back.taps[0].delay_bin == ch.taps[0].delay_bin);
        }
    }
}

TEST_CASE("signed Doppler index wraps consistently") {
    for (int n : {1, 2, 3, 7, 8, 64}) {
        for (int k = 0; k < n; ++k) {
            const int s = signed_doppler_index(k, n);
            CHECK(mod_floor(s, n) == k);
            CHECK(s <= n / 2);
            CHECK(s > -n / 2 - (n % 2));
        }
    }
}

TEST_CASE("tap channel validation") {
    const SystemConfig cfg = canonical_config();
    TapChannel ch;
    ch.taps.push_back({2, 5, {1.0, 0.0}});
    ch.taps.push_back({2, 5, {0.1, 0.0}});
    CHECK_THROWS_AS(ch.validate(cfg), std::invalid_argument);
    ch.taps.pop_back();
    ch.taps.push_back({cfg.num_doppler_bins, 0, {1.0, 0.0}});
    CHECK_THROWS_AS(ch.validate(cfg), std::invalid_argument);
}

TEST_CASE("system config file round trip and errors") {
    SUBCASE("defaults survive a save/load cycle") {
        const SystemConfig cfg = canonical_config();
        const std::string path = "test_config_roundtrip.txt";
        save_system_config(cfg, path);
        const SystemConfig back = load_system_config(path);
        CHECK(back.carrier_freq_hz == cfg.carrier_freq_hz);
        CHECK(back.bandwidth_hz == cfg.bandwidth_hz);
        CHECK(back.num_delay_bins == cfg.num_delay_bins);
        CHECK(back.num_doppler_bins == cfg.num_doppler_bins);
        CHECK(back.symbol_power == cfg.symbol_power);
        CHECK(back.noise_variance == cfg.noise_variance);
        CHECK(back.cp_length_samples == cfg.cp_length_samples);
        CHECK(back.speed_of_light_m_s == cfg.speed_of_light_m_s);
        std::remove(path.c_str());
    }

    SUBCASE("subcarrier spacing may replace bandwidth") {
        std::istringstream in("num_delay_bins = 256\nsubcarrier_spacing_hz = 39062.5\n");
        const SystemConfig cfg = parse_system_config(in);
        CHECK(cfg.bandwidth_hz == doctest::Approx(10e6));
    }

    SUBCASE("inconsistent spacing is rejected") {
        std::istringstream in("bandwidth_hz = 10e6\nnum_delay_bins = 256\nsubcarrier_spacing_hz = 40000\n");
        CHECK_THROWS_AS((void)parse_system_config(in), ConfigError);
    }

    SUBCASE("parse errors carry line numbers") {
        std::istringstream in("carrier_freq_hz = 24e9\nthis line is wrong\n");
        CHECK_THROWS_WITH_AS((void)parse_system_config(in),
                             doctest::Contains("line 2"), ConfigError);
    }

    SUBCASE("unknown keys and bad numbers are rejected") {
        std::istringstream in1("no_such_key = 3\n");
        CHECK_THROWS_AS((void)parse_system_config(in1), ConfigError);
        std::istringstream in2("bandwidth_hz = banana\n");
        CHECK_THROWS_AS((void)parse_system_config(in2), ConfigError);
        std::istringstream in3("num_delay_bins = 2.5\n");
        CHECK_THROWS_AS((void)parse_system_config(in3), ConfigError);
    }

    SUBCASE("invariant violations are rejected") {
        std::istringstream in("cp_length_samples = 300\n");
        CHECK_THROWS_AS((void)parse_system_config(in), ConfigError);
    }
}
