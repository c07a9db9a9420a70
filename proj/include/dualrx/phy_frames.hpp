#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dualrx/types.hpp"

namespace dualrx {

class OpCounter;

/// 4-bit data symbol, 0..15.
class SymbolIndex {
public:
    constexpr SymbolIndex() = default;
    explicit SymbolIndex(int value);

    [[nodiscard]] constexpr int value() const { return value_; }
    friend constexpr bool operator==(SymbolIndex, SymbolIndex) = default;

private:
    std::uint8_t value_ = 0;
};

using ChipSequence32 = std::array<std::uint8_t, 32>;

enum class ChipOrigin { preamble, payload, full_frame };

struct ChipStream {
    std::vector<std::uint8_t> chips;
    ChipOrigin origin = ChipOrigin::full_frame;

    [[nodiscard]] std::size_t size() const { return chips.size(); }
    friend bool operator==(const ChipStream&, const ChipStream&) = default;
};

/// Frame geometry: 32 zero bits of preamble spread to 256 chips, then payload.
struct FrameLayout {
    static constexpr std::size_t preamble_bits = 32;
    static constexpr std::size_t chips_per_symbol = 32;
    static constexpr std::size_t preamble_chips = preamble_bits / 4 * chips_per_symbol;

    std::size_t payload_bits = 0;

    [[nodiscard]] std::size_t payload_chips() const {
        return (payload_bits + 3) / 4 * chips_per_symbol;
    }
    [[nodiscard]] std::size_t frame_chips() const { return preamble_chips + payload_chips(); }
};

/// The 16 x 32 DSSS chip table of the 2.4 GHz O-QPSK PHY (c0 first).
const std::array<ChipSequence32, 16>& chip_table();

/// Chip table as 16 lines of 32 '0'/'1' characters, newline terminated.
std::string chip_table_text();

/// Groups bits in fours, least significant bit first. Throws on a length
/// that is not a multiple of 4.
std::vector<SymbolIndex> bits_to_symbols(std::span<const std::uint8_t> bits);
Bits symbols_to_bits(std::span<const SymbolIndex> symbols);

ChipSequence32 spread_symbol(SymbolIndex s);

struct DespreadResult {
    SymbolIndex symbol;
    int distance = 0;
};

/// Minimum Hamming distance decision over the chip table; ties go to the
/// lowest symbol index. When `counter` is set the XOR, addition and
/// comparison work is tallied.
DespreadResult despread_chips(std::span<const std::uint8_t, 32> chips, OpCounter* counter = nullptr);

/// Despreads consecutive 32-chip groups. Trailing chips that do not fill a
/// group are ignored.
std::vector<SymbolIndex> despread_stream(std::span<const std::uint8_t> chips,
                                         OpCounter* counter = nullptr);

ChipStream differential_encode(const ChipStream& c, std::uint8_t d_init = 0);
ChipStream differential_decode(const ChipStream& c, std::uint8_t d_init = 0);

/// Spreads `bits` without differential coding.
ChipStream spread_bits(std::span<const std::uint8_t> bits, ChipOrigin origin);

/// The 256 preamble chips before differential encoding.
const ChipStream& preamble_chips();

/// Preamble followed by the spread payload, before differential encoding.
ChipStream frame_chips_plain(std::span<const std::uint8_t> payload_bits);

/// Preamble followed by the spread payload, differentially encoded as one
/// stream. This is the chip stream handed to the modulator.
ChipStream build_frame(std::span<const std::uint8_t> payload_bits, std::uint8_t d_init = 0);

/// Minimum pairwise Hamming distance over the chip table rows.
int chip_table_min_distance();

}  // namespace dualrx
