#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <string_view>

#include "dualrx/demod_report.hpp"
#include "dualrx/rx_msk.hpp"
#include "dualrx/rx_qpsk.hpp"

namespace dualrx {

std::string_view mode_name(Mode m);
std::optional<Mode> parse_mode(std::string_view s);

/// Number of agreeing positions between two 256-chip preambles.
int preamble_match_count(std::span<const std::uint8_t> received, std::span<const std::uint8_t> reference);

enum class Verdict { good, poor };

struct SnrVerdict {
    int match_count = 0;
    Verdict verdict = Verdict::poor;
    int threshold = 240;

    friend bool operator==(const SnrVerdict&, const SnrVerdict&) = default;
};

SnrVerdict make_verdict(int match_count, int threshold = 240);
/// A packet with no detected frame has no preamble to compare: poor.
SnrVerdict make_verdict(const DemodReport& report, int threshold = 240);

struct ControllerConfig {
    int threshold = 240;
    int k_up = 3;    // consecutive good verdicts before moving to MSK
    int k_down = 1;  // consecutive poor verdicts before moving back to QPSK
    std::size_t history_length = 8;
    std::optional<Mode> manual;  // pins the mode when set
};

struct ModeState {
    Mode current = Mode::qpsk;
    std::deque<SnrVerdict> history;
    int switch_count = 0;
    int good_run = 0;
    int poor_run = 0;
};

/// Folds verdicts into the state in order. Mode changes happen only here,
/// between packets.
ModeState decide_mode(std::span<const SnrVerdict> verdicts, ModeState state, const ControllerConfig& cfg = {});

/// Routes each buffer to exactly one chain (the other is never invoked) and
/// feeds that chain's preamble verdict back into the mode state.
class DualModeReceiver {
public:
    DualModeReceiver(ControllerConfig controller, qpsk::Config qpsk_cfg, msk::Config msk_cfg);

    struct Result {
        Mode used;
        DemodReport report;
        SnrVerdict verdict;
    };

    Result process(const IqBuffer& z, OpCounter* counter = nullptr);

    [[nodiscard]] Mode mode() const { return state_.current; }
    [[nodiscard]] const ModeState& state() const { return state_; }

private:
    ControllerConfig controller_;
    qpsk::Config qpsk_cfg_;
    msk::Config msk_cfg_;
    ModeState state_;
};

}  // namespace dualrx
