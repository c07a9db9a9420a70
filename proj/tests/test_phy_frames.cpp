#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "dualrx/phy_frames.hpp"

using namespace dualrx;

namespace {

Bits random_bits(std::mt19937& rng, std::size_t n) {
    Bits b(n);
    for (auto& x : b) x = static_cast<std::uint8_t>(rng() & 1);
    return b;
}

ChipStream stream(std::initializer_list<int> v) {
    ChipStream c;
    for (int x : v) c.chips.push_back(static_cast<std::uint8_t>(x));
    return c;
}

}  // namespace

TEST_CASE("bits_to_symbols groups four bits LSB first") {
    CHECK(bits_to_symbols(Bits{0, 0, 0, 0})[0].value() == 0);
    CHECK(bits_to_symbols(Bits{1, 1, 1, 1})[0].value() == 15);
    CHECK(bits_to_symbols(Bits{1, 0, 0, 0})[0].value() == 1);
    CHECK(bits_to_symbols(Bits{0, 0, 0, 1})[0].value() == 8);
    CHECK_THROWS_AS(bits_to_symbols(Bits{1, 0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(bits_to_symbols(Bits{2, 0, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(SymbolIndex{16}, std::out_of_range);
}

TEST_CASE("symbols_to_bits inverts bits_to_symbols") {
    for (int s = 0; s < 16; ++s) {
        const std::vector<SymbolIndex> one{SymbolIndex{s}};
        CHECK(bits_to_symbols(symbols_to_bits(one))[0] == SymbolIndex{s});
    }
    CHECK(symbols_to_bits(std::vector{SymbolIndex{0}}) == Bits{0, 0, 0, 0});
    CHECK(symbols_to_bits(std::vector{SymbolIndex{15}}) == Bits{1, 1, 1, 1});

    std::mt19937 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const Bits p = random_bits(rng, 4 * (rng() % 64));
        CHECK(symbols_to_bits(bits_to_symbols(p)) == p);
    }
}

TEST_CASE("chip table matches the checked-in resource") {
    std::ifstream in(DUALRX_DATA_DIR "/chip_table.txt");
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == chip_table_text());
}

TEST_CASE("chip table structure: cyclic shifts and odd-chip inversion") {
    const auto& t = chip_table();
    for (int s = 1; s < 8; ++s)
        for (int k = 0; k < 32; ++k) CHECK(t[s][k] == t[0][(k - 4 * s + 64) % 32]);
    for (int s = 0; s < 8; ++s)
        for (int k = 0; k < 32; ++k) CHECK(t[s + 8][k] == (k % 2 ? 1 - t[s][k] : t[s][k]));
    // symbol 0 row, c0 first
    const ChipSequence32 row0 = spread_symbol(SymbolIndex{0});
    const std::string expected = "11011001110000110101001000101110";
    for (int k = 0; k < 32; ++k) CHECK(row0[k] == expected[k] - '0');
}

TEST_CASE("chip table rows are pairwise distinct; brute-force dmin") {
    const auto& t = chip_table();
    int dmin = 33;
    for (int a = 0; a < 16; ++a)
        for (int b = a + 1; b < 16; ++b) {
            int d = 0;
            for (int k = 0; k < 32; ++k) d += t[a][k] != t[b][k];
            CHECK(d > 0);
            dmin = std::min(dmin, d);
        }
    CHECK(dmin == 12);
    CHECK(chip_table_min_distance() == dmin);
}

TEST_CASE("preamble is eight copies of the symbol-0 row") {
    const auto& p = preamble_chips();
    REQUIRE(p.size() == 256);
    CHECK(p.origin == ChipOrigin::preamble);
    const auto row = spread_symbol(SymbolIndex{0});
    for (std::size_t k = 0; k < 256; ++k) CHECK(p.chips[k] == row[k % 32]);
}

TEST_CASE("despread_chips") {
    const auto row7 = spread_symbol(SymbolIndex{7});
    auto r = despread_chips(row7);
    CHECK(r.symbol.value() == 7);
    CHECK(r.distance == 0);

    // within the correction radius floor((12 - 1) / 2) = 5
    ChipSequence32 flipped = row7;
    for (int k : {0, 5, 11, 20, 31}) flipped[k] ^= 1;
    r = despread_chips(flipped);
    CHECK(r.symbol.value() == 7);
    CHECK(r.distance == 5);

    // every row has weight 16, so all-zero ties everywhere and goes to symbol 0
    ChipSequence32 zeros{};
    r = despread_chips(zeros);
    CHECK(r.symbol.value() == 0);
    CHECK(r.distance == 16);

    for (int s = 0; s < 16; ++s) {
        const auto res = despread_chips(spread_symbol(SymbolIndex{s}));
        CHECK(res.symbol.value() == s);
        CHECK(res.distance == 0);
    }
}

TEST_CASE("differential coding") {
    CHECK(differential_encode(stream({0, 0, 0, 0})) == stream({0, 0, 0, 0}));
    CHECK(differential_encode(stream({1, 0, 0, 1})) == stream({1, 1, 1, 0}));
    CHECK(differential_decode(stream({1, 1, 1, 0})) == stream({1, 0, 0, 1}));
    CHECK(differential_decode(stream({0, 0, 0})) == stream({0, 0, 0}));
    CHECK(differential_encode(stream({0, 0}), 1) == stream({1, 1}));

    std::mt19937 rng(11);
    for (int trial = 0; trial < 1000; ++trial) {
        ChipStream c;
        c.chips = random_bits(rng, rng() % 300);
        const auto d_init = static_cast<std::uint8_t>(trial & 1);
        CHECK(differential_decode(differential_encode(c, d_init), d_init) == c);
    }
}

TEST_CASE("build_frame length and loopback") {
    CHECK(build_frame(Bits{}).size() == 256);
    CHECK(build_frame(Bits{}).chips == differential_encode(preamble_chips()).chips);
    CHECK(frame_chips_plain(Bits(200, 0)).size() == 256 + 50 * 32);
    CHECK(build_frame(Bits(200, 1)).size() == 1856);
    CHECK_THROWS_AS(build_frame(Bits(6, 0)), std::invalid_argument);

    std::mt19937 rng(3);
    for (std::size_t n_bits : {4u, 8u, 100u, 200u, 1024u}) {
        const Bits payload = random_bits(rng, n_bits);
        const ChipStream frame = build_frame(payload);
        CHECK(frame.size() == FrameLayout{n_bits}.frame_chips());
        CHECK(frame.size() == 256 + 8 * ((n_bits + 3) / 4) * 4);
        const ChipStream plain = differential_decode(frame);
        const std::span<const std::uint8_t> body{plain.chips.data() + 256, plain.size() - 256};
        CHECK(symbols_to_bits(despread_stream(body)) == payload);
    }
}

TEST_CASE("correction radius holds for every symbol and flip set up to size 2") {
    const int radius = (chip_table_min_distance() - 1) / 2;
    REQUIRE(radius >= 2);
    for (int s = 0; s < 16; ++s) {
        const auto row = spread_symbol(SymbolIndex{s});
        for (int a = 0; a < 32; ++a)
            for (int b = a; b < 32; ++b) {
                ChipSequence32 c = row;
                c[a] ^= 1;
                if (b != a) c[b] ^= 1;
                REQUIRE(despread_chips(c).symbol.value() == s);
            }
    }
}
