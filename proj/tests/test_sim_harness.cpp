#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <bit>
#include <cstring>
#include <random>
#include <unistd.h>

#include "dualrx/sim_harness.hpp"

using namespace dualrx;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& name) {
    return fs::temp_directory_path() / ("dualrx_test_" + std::to_string(::getpid()) + "_" + name);
}

void write_bytes(const fs::path& p, std::size_t n) {
    std::ofstream out(p, std::ios::binary);
    for (std::size_t i = 0; i < n; ++i) out.put('\0');
}

SweepConfig small_sweep(SweepMode mode) {
    SweepConfig cfg;
    cfg.snr_start = -8.0;
    cfg.snr_stop = 6.0;
    cfg.snr_step = 2.0;
    cfg.packets_per_point = 12;
    cfg.mode = mode;
    return cfg;
}

}  // namespace

TEST_CASE("snr grid and validation") {
    SweepConfig cfg;
    const auto grid = snr_grid(cfg);
    REQUIRE(grid.size() == 18);
    CHECK(grid.front() == -20.0);
    CHECK(grid.back() == 14.0);

    cfg.snr_step = 0.0;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = SweepConfig{};
    cfg.payload_bits = 6;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg = SweepConfig{};
    cfg.n_fft = 100;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
}

TEST_CASE("packet seeds are distinct and reproducible") {
    CHECK(packet_seed(1, 0, 0) == packet_seed(1, 0, 0));
    CHECK(packet_seed(1, 0, 1) != packet_seed(1, 0, 0));
    CHECK(packet_seed(1, 1, 0) != packet_seed(1, 0, 1));
    CHECK(packet_seed(2, 0, 0) != packet_seed(1, 0, 0));
    CHECK(random_payload(200, 5) == random_payload(200, 5));
    CHECK(random_payload(200, 5) != random_payload(200, 6));
}

TEST_CASE("run_packet") {
    SweepConfig cfg;
    const auto seed = packet_seed(7, 3, 9);
    for (Mode m : {Mode::qpsk, Mode::msk}) {
        CHECK(run_packet(cfg, 2.0, m, seed) == run_packet(cfg, 2.0, m, seed));

        const auto clean = run_packet(cfg, 100.0, m, seed);
        CHECK(clean.frame_found);
        CHECK(clean.bit_errors == 0);
        CHECK(clean.preamble_match == 256);
        CHECK(clean.verdict.verdict == Verdict::good);

        const auto lost = run_packet(cfg, -30.0, m, seed);
        CHECK_FALSE(lost.frame_found);
        CHECK(lost.bit_errors == cfg.payload_bits);
        CHECK(lost.preamble_match == 0);
        CHECK(lost.verdict.verdict == Verdict::poor);
    }
}

TEST_CASE("IQ file round trip") {
    std::mt19937_64 rng(3);
    // float draws, so every sample is exactly representable in the file
    std::normal_distribution<float> g;
    IqBuffer buf;
    buf.sps = 4;
    buf.samples.resize(1000);
    for (Eigen::Index n = 0; n < buf.size(); ++n) {
        const float re = g(rng);
        const float im = g(rng);
        buf.samples[n] = Complex{re, im};
    }

    const auto path = temp_path("roundtrip.iq");
    iq_export(buf, path);
    CHECK(fs::file_size(path) == 8000);
    const auto back = iq_import(path);
    CHECK(back.sps == 4);
    CHECK(back.chip_duration == doctest::Approx(buf.chip_duration));
    REQUIRE(back.size() == buf.size());
    CHECK((back.samples - buf.samples).cwiseAbs().maxCoeff() == 0.0);

    std::ifstream in(path, std::ios::binary);
    unsigned char first[4];
    in.read(reinterpret_cast<char*>(first), 4);
    const float re = static_cast<float>(buf.samples[0].real());
    unsigned char expect[4];
    std::memcpy(expect, &re, 4);
    if constexpr (std::endian::native == std::endian::little)
        CHECK(std::equal(first, first + 4, expect));
    fs::remove(path);
    fs::remove(path.string() + ".meta");
}

TEST_CASE("IQ import errors") {
    IqBuffer seed;
    seed.samples = ComplexVector::Ones(4);
    const auto ok = temp_path("meta_source.iq");
    iq_export(seed, ok);

    const auto empty = temp_path("empty.iq");
    write_bytes(empty, 0);
    fs::copy_file(ok.string() + ".meta", empty.string() + ".meta", fs::copy_options::overwrite_existing);
    CHECK_THROWS_WITH_AS(iq_import(empty), doctest::Contains("empty IQ file"), std::runtime_error);

    const auto odd = temp_path("odd.iq");
    write_bytes(odd, 12);
    fs::copy_file(ok.string() + ".meta", odd.string() + ".meta", fs::copy_options::overwrite_existing);
    CHECK_THROWS_WITH_AS(iq_import(odd), doctest::Contains("truncated IQ pair"), std::runtime_error);

    const auto ragged = temp_path("ragged.iq");
    write_bytes(ragged, 10);
    CHECK_THROWS_AS(iq_import(ragged), std::runtime_error);

    const auto no_meta = temp_path("no_meta.iq");
    write_bytes(no_meta, 16);
    CHECK_THROWS_WITH_AS(iq_import(no_meta), doctest::Contains("unreadable IQ metadata"), std::runtime_error);

    CHECK_THROWS_AS(iq_export(IqBuffer{}, temp_path("never.iq")), std::invalid_argument);

    for (const auto& p : {ok, empty, odd, ragged, no_meta}) {
        fs::remove(p);
        fs::remove(p.string() + ".meta");
    }
}

TEST_CASE("config files") {
    const auto kv = parse_key_values("# sweep\nsnr-start = -4\nsnr-stop=4 \n\npackets = 50\nmode = msk\nfd-hz = 35000\n");
    CHECK(kv.at("snr-stop") == "4");
    SweepConfig cfg;
    apply_key_values(cfg, kv);
    CHECK(cfg.snr_start == -4.0);
    CHECK(cfg.snr_stop == 4.0);
    CHECK(cfg.packets_per_point == 50);
    CHECK(cfg.mode == SweepMode::msk);
    CHECK(cfg.channel.f_d_hz == 35000.0);

    // later values override earlier ones, as CLI flags do over the file
    apply_key_values(cfg, {{"packets", "7"}, {"mode", "auto"}});
    CHECK(cfg.packets_per_point == 7);
    CHECK(cfg.mode == SweepMode::automatic);

    SweepConfig round;
    apply_key_values(round, parse_key_values(to_key_values(cfg)));
    CHECK(to_key_values(round) == to_key_values(cfg));

    CHECK_THROWS_AS(apply_key_values(cfg, {{"bogus", "1"}}), std::invalid_argument);
    CHECK_THROWS_AS(apply_key_values(cfg, {{"packets", "ten"}}), std::invalid_argument);
    CHECK_THROWS_AS(apply_key_values(cfg, {{"mode", "bpsk"}}), std::invalid_argument);
    CHECK_THROWS_AS(parse_key_values("no equals sign"), std::invalid_argument);
}

TEST_CASE("sweep CSV layout") {
    auto cfg = small_sweep(SweepMode::qpsk);
    cfg.packets_per_point = 2;
    cfg.snr_stop = -6.0;
    const auto r = ber_sweep(cfg, true);
    const auto csv = sweep_csv(r);
    CHECK(csv.rfind("snr_db,mode,packets,frames_detected,bit_errors,ber,per,mean_preamble_match,adds_total,mults_total\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK(r.packets.size() == 4);
    CHECK(packets_csv(r).rfind("snr_db,packet,mode,frame_found,bit_errors,preamble_match,verdict\n", 0) == 0);
    // closed-form cost per processed packet
    CHECK(r.points[0].adds_total == 2 * 104617);
    CHECK(r.points[0].mults_total == 2 * 40968);
}

TEST_CASE("sweeps do not depend on the worker count") {
    for (SweepMode m : {SweepMode::qpsk, SweepMode::msk, SweepMode::automatic}) {
        auto cfg = small_sweep(m);
        const auto serial = sweep_csv(ber_sweep(cfg));
        cfg.threads = 4;
        const auto parallel = sweep_csv(ber_sweep(cfg));
        CAPTURE(sweep_mode_name(m));
        CHECK(serial == parallel);
        CHECK(sweep_csv(ber_sweep(cfg)) == parallel);
    }
}

TEST_CASE("BER falls with SNR") {
    auto cfg = small_sweep(SweepMode::qpsk);
    cfg.packets_per_point = 40;
    cfg.threads = 2;
    const auto r = ber_sweep(cfg);
    for (std::size_t i = 1; i < r.points.size(); ++i) CHECK(r.points[i].ber() <= r.points[i - 1].ber() + 1e-3);
    CHECK(r.points.back().ber() == 0.0);
    CHECK(r.first_snr_at_ber(1e-3).has_value());
}

TEST_CASE("missed frames can be left out of the BER") {
    auto cfg = small_sweep(SweepMode::msk);
    cfg.snr_start = cfg.snr_stop = -20.0;
    cfg.packets_per_point = 5;
    auto r = ber_sweep(cfg);
    CHECK(r.points[0].frames_missed() == 5);
    CHECK(r.points[0].ber() == 1.0);
    CHECK(r.points[0].per() == 1.0);

    cfg.missed_frames_as_errors = false;
    r = ber_sweep(cfg);
    CHECK(r.points[0].bits_counted == 0);
    CHECK(r.points[0].per() == 1.0);
}
