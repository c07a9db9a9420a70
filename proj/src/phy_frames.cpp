#include "dualrx/phy_frames.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string_view>

#include "dualrx/complexity_meter.hpp"

namespace dualrx {

namespace {

// Symbol-to-chip mapping of the 2.4 GHz O-QPSK PHY, chips c0..c31 left to
// right. Rows 1-7 are 4-chip cyclic right shifts of row 0; rows 8-15 repeat
// rows 0-7 with the odd-indexed chips inverted.
constexpr std::array<std::string_view, 16> kChipRows = {
    "11011001110000110101001000101110",
    "11101101100111000011010100100010",
    "00101110110110011100001101010010",
    "00100010111011011001110000110101",
    "01010010001011101101100111000011",
    "00110101001000101110110110011100",
    "11000011010100100010111011011001",
    "10011100001101010010001011101101",
    "10001100100101100000011101111011",
    "10111000110010010110000001110111",
    "01111011100011001001011000000111",
    "01110111101110001100100101100000",
    "00000111011110111000110010010110",
    "01100000011101111011100011001001",
    "10010110000001110111101110001100",
    "11001001011000000111011110111000",
};

std::array<ChipSequence32, 16> make_table() {
    std::array<ChipSequence32, 16> t{};
    for (std::size_t s = 0; s < 16; ++s)
        for (std::size_t k = 0; k < 32; ++k) t[s][k] = kChipRows[s][k] == '1' ? 1 : 0;
    return t;
}

void require_binary(std::span<const std::uint8_t> bits) {
    if (std::ranges::any_of(bits, [](std::uint8_t b) { return b > 1; }))
        throw std::invalid_argument("bit values must be 0 or 1");
}

}  // namespace

SymbolIndex::SymbolIndex(int value) : value_(static_cast<std::uint8_t>(value)) {
    if (value < 0 || value > 15) throw std::out_of_range("symbol index must be in [0, 15]");
}

const std::array<ChipSequence32, 16>& chip_table() {
    static const auto table = make_table();
    return table;
}

std::string chip_table_text() {
    std::string out;
    for (auto row : kChipRows) {
        out.append(row);
        out.push_back('\n');
    }
    return out;
}

std::vector<SymbolIndex> bits_to_symbols(std::span<const std::uint8_t> bits) {
    if (bits.size() % 4 != 0) throw std::invalid_argument("bit count must be a multiple of 4");
    require_binary(bits);
    std::vector<SymbolIndex> out;
    out.reserve(bits.size() / 4);
    for (std::size_t i = 0; i < bits.size(); i += 4)
        out.emplace_back(bits[i] | bits[i + 1] << 1 | bits[i + 2] << 2 | bits[i + 3] << 3);
    return out;
}

Bits symbols_to_bits(std::span<const SymbolIndex> symbols) {
    Bits out;
    out.reserve(symbols.size() * 4);
    for (auto s : symbols)
        for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>((s.value() >> b) & 1));
    return out;
}

ChipSequence32 spread_symbol(SymbolIndex s) { return chip_table()[s.value()]; }

DespreadResult despread_chips(std::span<const std::uint8_t, 32> chips, OpCounter* counter) {
    const auto& table = chip_table();
    DespreadResult best{SymbolIndex{0}, std::numeric_limits<int>::max()};
    for (int s = 0; s < 16; ++s) {
        int distance = 0;
        for (std::size_t k = 0; k < 32; ++k) distance += (chips[k] ^ table[s][k]) & 1;
        if (distance < best.distance) best = {SymbolIndex{s}, distance};
    }
    if (counter != nullptr) {
        // 32 XORs and 31 additions per row, 15 comparisons to pick the minimum
        counter->add(Stage::chip_to_symbol, {.additions = 16 * 31, .comparisons = 15, .xors = 16 * 32});
    }
    return best;
}

std::vector<SymbolIndex> despread_stream(std::span<const std::uint8_t> chips, OpCounter* counter) {
    std::vector<SymbolIndex> out;
    out.reserve(chips.size() / 32);
    for (std::size_t i = 0; i + 32 <= chips.size(); i += 32)
        out.push_back(despread_chips(chips.subspan(i).first<32>(), counter).symbol);
    return out;
}

ChipStream differential_encode(const ChipStream& c, std::uint8_t d_init) {
    ChipStream out{.chips = std::vector<std::uint8_t>(c.size()), .origin = c.origin};
    std::uint8_t prev = d_init & 1;
    for (std::size_t k = 0; k < c.size(); ++k) {
        prev = static_cast<std::uint8_t>((c.chips[k] ^ prev) & 1);
        out.chips[k] = prev;
    }
    return out;
}

ChipStream differential_decode(const ChipStream& c, std::uint8_t d_init) {
    ChipStream out{.chips = std::vector<std::uint8_t>(c.size()), .origin = c.origin};
    std::uint8_t prev = d_init & 1;
    for (std::size_t k = 0; k < c.size(); ++k) {
        out.chips[k] = static_cast<std::uint8_t>((c.chips[k] ^ prev) & 1);
        prev = c.chips[k] & 1;
    }
    return out;
}

ChipStream spread_bits(std::span<const std::uint8_t> bits, ChipOrigin origin) {
    ChipStream out{.chips = {}, .origin = origin};
    const auto symbols = bits_to_symbols(bits);
    out.chips.reserve(symbols.size() * 32);
    for (auto s : symbols) {
        const auto& row = spread_symbol(s);
        out.chips.insert(out.chips.end(), row.begin(), row.end());
    }
    return out;
}

const ChipStream& preamble_chips() {
    static const ChipStream preamble = [] {
        const Bits zeros(FrameLayout::preamble_bits, 0);
        return spread_bits(zeros, ChipOrigin::preamble);
    }();
    return preamble;
}

ChipStream frame_chips_plain(std::span<const std::uint8_t> payload_bits) {
    ChipStream frame = preamble_chips();
    frame.origin = ChipOrigin::full_frame;
    const auto payload = spread_bits(payload_bits, ChipOrigin::payload);
    frame.chips.insert(frame.chips.end(), payload.chips.begin(), payload.chips.end());
    return frame;
}

ChipStream build_frame(std::span<const std::uint8_t> payload_bits, std::uint8_t d_init) {
    return differential_encode(frame_chips_plain(payload_bits), d_init);
}

int chip_table_min_distance() {
    const auto& table = chip_table();
    int dmin = 32;
    for (std::size_t a = 0; a < 16; ++a)
        for (std::size_t b = a + 1; b < 16; ++b) {
            int d = 0;
            for (std::size_t k = 0; k < 32; ++k) d += table[a][k] != table[b][k];
            dmin = std::min(dmin, d);
        }
    return dmin;
}

}  // namespace dualrx
