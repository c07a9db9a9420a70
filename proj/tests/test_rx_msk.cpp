#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dualrx/rx_msk.hpp"
#include "test_support.hpp"

using namespace dualrx;
using namespace dualrx::testing;

TEST_CASE("diff_detect returns the plain chips at chip boundaries") {
    std::mt19937_64 rng(1);
    const auto plain = random_chips(rng, 500);
    const auto z = modulate(differential_encode(plain), 8);
    const auto y = msk::diff_detect(z);
    REQUIRE(y.y.size() == z.size());
    CHECK(y.delay == 8);
    CHECK(y.y.head(8).isZero());
    for (std::size_t m = 0; m < plain.size(); ++m) {
        const double expected = plain.chips[m] ? 1.0 : -1.0;
        REQUIRE(std::abs(y.y[static_cast<Eigen::Index>((m + 1) * 8)] - expected) < 1e-9);
    }
}

TEST_CASE("diff_detect: phase invariance, scale invariance and frequency bias") {
    std::mt19937_64 rng(2);
    const auto plain = random_chips(rng, 300);
    const auto z = modulate(differential_encode(plain), 8);
    const auto y0 = msk::diff_detect(z).y;

    for (double theta : {0.4, 2.0, -3.0}) {
        const auto y = msk::diff_detect(apply(z, ChannelParams{.theta_rad = theta})).y;
        CHECK((y - y0).cwiseAbs().maxCoeff() < 1e-9);
    }

    IqBuffer scaled = z;
    scaled.samples *= 0.1;
    CHECK((msk::diff_detect(scaled).y - y0).cwiseAbs().maxCoeff() < 1e-9);

    // an offset adds 2 pi f_d T_c to every phase difference
    const double f_d = 60e3;
    const auto y = msk::diff_detect(apply(z, ChannelParams{.f_d_hz = f_d})).y;
    const double shift = 2 * kPi * f_d * kChipDuration;
    for (Eigen::Index n = 8; n < z.size(); n += 3) {
        const double d = std::arg(z.samples[n] * std::conj(z.samples[n - 8]));
        REQUIRE(std::abs(y[n] - std::sin(d + shift)) < 1e-9);
    }
}

TEST_CASE("msk_timing finds the chip boundary phase") {
    std::mt19937_64 rng(3);
    const Bits payload = random_bits(rng, 200);
    const auto z = transmit(payload, ChannelParams{});
    const auto t = msk::msk_timing(z);
    CHECK(t.tau_hat == 0);
    CHECK(t.complete);
    CHECK(t.symbols_used == 64);
    REQUIRE(t.v.size() == 8);

    for (int d = 0; d < 16; ++d) {
        const auto td = msk::msk_timing(transmit(payload, ChannelParams{.f_d_hz = 15e3, .theta_rad = 0.9, .tau_samples = double(d)}));
        CAPTURE(d);
        CHECK(td.tau_hat == d % 8);
    }

    IqBuffer tiny;
    tiny.samples = ComplexVector::Ones(20);
    const auto short_stat = msk::msk_timing(tiny);
    CHECK_FALSE(short_stat.complete);
    CHECK(short_stat.symbols_used == 1);
}

TEST_CASE("msk_timing at 10 dB") {
    std::mt19937_64 rng(4);
    int good = 0;
    for (int t = 0; t < 500; ++t) {
        const int tau = static_cast<int>(rng() % 16);
        const auto z = transmit(random_bits(rng, 200), ChannelParams{.tau_samples = double(tau), .snr_db = 10.0, .seed = rng()});
        good += lattice_distance(msk::msk_timing(z).tau_hat, tau, 8) <= 1;
    }
    CHECK(good >= 475);
}

TEST_CASE("detect_chips") {
    msk::PhaseDiffSignal y{RealVector::Ones(80), 8};
    msk::MskTimingStat t;
    t.tau_hat = 3;
    const auto ones = msk::detect_chips(y, t, 8);
    CHECK(ones.size() == 10);
    for (auto c : ones.chips) CHECK(c == 1);

    y.y.setZero();
    for (auto c : msk::detect_chips(y, t, 8).chips) CHECK(c == 0);
}

TEST_CASE("frame_sync_msk") {
    std::mt19937_64 rng(5);
    const auto& pre = preamble_chips();
    ChipStream s = random_chips(rng, 17);
    s.chips.insert(s.chips.end(), pre.chips.begin(), pre.chips.end());
    const auto tail = random_chips(rng, 300);
    s.chips.insert(s.chips.end(), tail.chips.begin(), tail.chips.end());

    auto r = msk::frame_sync_msk(s);
    CHECK(r.found);
    CHECK(r.start_index == 17);
    CHECK(r.peak == doctest::Approx(1.0));

    // ten chip errors inside the preamble
    ChipStream damaged = s;
    for (int k = 0; k < 10; ++k) damaged.chips[17 + 25 * k] ^= 1;
    r = msk::frame_sync_msk(damaged);
    CHECK(r.found);
    CHECK(r.start_index == 17);
    CHECK(r.peak == doctest::Approx((246.0 - 10.0) / 256.0));

    CHECK_FALSE(msk::frame_sync_msk(random_chips(rng, 200)).found);
}

TEST_CASE("frame_sync_msk false alarm rate on random chips") {
    std::mt19937_64 rng(6);
    const std::size_t windows = 100000;
    const auto noise = random_chips(rng, windows + 255);
    const auto r = msk::frame_sync_msk(noise);
    // no window out of 1e5 reaches the threshold
    CHECK_FALSE(r.found);
    CHECK(r.peak < 0.5);
}

TEST_CASE("demodulate: ideal channel is exact") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 100; ++t) {
        const Bits payload = random_bits(rng, 200);
        const auto report = msk::demodulate(transmit(payload, ChannelParams{}), msk::Config{});
        REQUIRE(report.frame_found);
        CHECK(report.payload_bits == payload);
        CHECK(report.preamble_match_count == 256);
        CHECK(*report.frame_start == 0);
    }
}

TEST_CASE("demodulate: carrier offsets") {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 20; ++t) {
        const Bits payload = random_bits(rng, 200);
        const ChannelParams p{.f_d_hz = 50e3, .theta_rad = 2.0, .tau_samples = 5, .snr_db = 25.0, .seed = rng()};
        const auto report = msk::demodulate(transmit(payload, p), msk::Config{});
        REQUIRE(report.frame_found);
        CHECK(report.payload_bits == payload);
        CHECK(std::abs(static_cast<long>(*report.frame_start) - 5) <= 1);
    }

    const Bits payload = random_bits(rng, 200);
    const auto base = msk::demodulate(transmit(payload, ChannelParams{}), msk::Config{});
    for (double theta : {0.5, 1.5, -2.5}) {
        const auto r = msk::demodulate(transmit(payload, ChannelParams{.theta_rad = theta}), msk::Config{});
        CHECK(r.payload_bits == base.payload_bits);
        CHECK(r.preamble_match_count == base.preamble_match_count);
    }

    // f_d T_c = 0.05
    const auto fast = msk::demodulate(transmit(payload, ChannelParams{.f_d_hz = 0.05 * kChipRate}), msk::Config{});
    REQUIRE(fast.frame_found);
    CHECK(fast.payload_bits == payload);
    CHECK(fast.preamble_match_count == 256);
}

TEST_CASE("demodulate: short or silent input") {
    IqBuffer tiny;
    tiny.samples = ComplexVector::Ones(10);
    CHECK_FALSE(msk::demodulate(tiny, msk::Config{}).frame_found);

    std::mt19937_64 rng(9);
    int found = 0;
    for (int t = 0; t < 20; ++t)
        found += msk::demodulate(transmit(random_bits(rng, 200), ChannelParams{.snr_db = -20.0, .seed = rng()}), msk::Config{}).frame_found;
    CHECK(found == 0);
}
