#include "dualrx/mode_controller.hpp"

#include <stdexcept>

#include "dualrx/phy_frames.hpp"

namespace dualrx {

std::string_view mode_name(Mode m) { return m == Mode::qpsk ? "qpsk" : "msk"; }

std::optional<Mode> parse_mode(std::string_view s) {
    if (s == "qpsk") return Mode::qpsk;
    if (s == "msk") return Mode::msk;
    return std::nullopt;
}

int preamble_match_count(std::span<const std::uint8_t> received, std::span<const std::uint8_t> reference) {
    if (received.size() != FrameLayout::preamble_chips || reference.size() != FrameLayout::preamble_chips)
        throw std::invalid_argument("preamble comparison needs exactly 256 chips on both sides");
    int count = 0;
    for (std::size_t k = 0; k < received.size(); ++k) count += (received[k] & 1) == (reference[k] & 1);
    return count;
}

SnrVerdict make_verdict(int match_count, int threshold) {
    return {match_count, match_count >= threshold ? Verdict::good : Verdict::poor, threshold};
}

SnrVerdict make_verdict(const DemodReport& report, int threshold) {
    if (!report.frame_found) return {0, Verdict::poor, threshold};
    return make_verdict(report.preamble_match_count, threshold);
}

ModeState decide_mode(std::span<const SnrVerdict> verdicts, ModeState state, const ControllerConfig& cfg) {
    for (const auto& v : verdicts) {
        state.history.push_back(v);
        while (state.history.size() > cfg.history_length) state.history.pop_front();

        if (v.verdict == Verdict::good) {
            ++state.good_run;
            state.poor_run = 0;
        } else {
            ++state.poor_run;
            state.good_run = 0;
        }

        Mode next = state.current;
        if (cfg.manual) {
            next = *cfg.manual;
        } else if (state.current == Mode::qpsk && state.good_run >= cfg.k_up) {
            next = Mode::msk;
        } else if (state.current == Mode::msk && state.poor_run >= cfg.k_down) {
            next = Mode::qpsk;
        }
        if (next != state.current) {
            state.current = next;
            ++state.switch_count;
            state.good_run = 0;
            state.poor_run = 0;
        }
    }
    return state;
}

DualModeReceiver::DualModeReceiver(ControllerConfig controller, qpsk::Config qpsk_cfg, msk::Config msk_cfg)
    : controller_(std::move(controller)), qpsk_cfg_(qpsk_cfg), msk_cfg_(msk_cfg) {
    if (controller_.manual) state_.current = *controller_.manual;
}

DualModeReceiver::Result DualModeReceiver::process(const IqBuffer& z, OpCounter* counter) {
    const Mode used = state_.current;
    DemodReport report =
        used == Mode::qpsk ? qpsk::demodulate(z, qpsk_cfg_, counter) : msk::demodulate(z, msk_cfg_, counter);
    const SnrVerdict verdict = make_verdict(report, controller_.threshold);
    state_ = decide_mode(std::span{&verdict, 1}, std::move(state_), controller_);
    return {used, std::move(report), verdict};
}

}  // namespace dualrx
