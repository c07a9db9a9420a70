#include "dualrx/rx_msk.hpp"

#include <algorithm>
#include <cmath>

#include "dualrx/complexity_meter.hpp"

namespace dualrx::msk {

PhaseDiffSignal diff_detect(const IqBuffer& z, OpCounter* counter) {
    constexpr double eps = 1e-12;
    const int sps = z.sps;
    PhaseDiffSignal out{RealVector::Zero(z.size()), sps};
    for (Eigen::Index n = sps; n < z.size(); ++n) {
        const Complex a = z.samples[n];
        const Complex b = z.samples[n - sps];
        out.y[n] = (a * std::conj(b)).imag() / (std::abs(a) * std::abs(b) + eps);
    }
    if (counter != nullptr && z.size() > sps) {
        const std::int64_t n = z.size() - sps;
        counter->add(Stage::differential_detection, {.additions = 3 * n, .multiplications = 7 * n});
    }
    return out;
}

MskTimingStat msk_timing(const IqBuffer& z, int window, OpCounter* counter) {
    const int sps = z.sps;
    MskTimingStat stat;
    stat.v.assign(static_cast<std::size_t>(sps), Complex{});

    // chip intervals available for every phase
    const Eigen::Index available = z.size() >= sps ? (z.size() - sps) / sps : 0;
    const int used = static_cast<int>(std::min<Eigen::Index>(window, available));
    stat.symbols_used = used;
    stat.complete = used == window;

    for (int i = 0; i < sps; ++i) {
        Complex acc{};
        for (int n = 1; n <= used; ++n) {
            const Complex c = z.samples[i + n * sps] * std::conj(z.samples[i + (n - 1) * sps]);
            acc += c * c;
        }
        stat.v[static_cast<std::size_t>(i)] = used > 0 ? acc / static_cast<double>(used) : acc;
    }
    double best = -1.0;
    for (int i = 0; i < sps; ++i) {
        const double mag = std::abs(stat.v[static_cast<std::size_t>(i)]);
        if (mag > best) {
            best = mag;
            stat.tau_hat = i;
        }
    }
    if (counter != nullptr) {
        // conjugate product and squaring per term: 8 real multiplications, 4 additions
        const std::int64_t terms = static_cast<std::int64_t>(used) * sps;
        counter->add(Stage::symbol_timing_recovery,
                     {.additions = terms * 4, .multiplications = terms * 8, .comparisons = sps - 1});
    }
    return stat;
}

ChipStream detect_chips(const PhaseDiffSignal& y, const MskTimingStat& t, int sps) {
    ChipStream out{.chips = {}, .origin = ChipOrigin::full_frame};
    for (Eigen::Index n = t.tau_hat; n < y.y.size(); n += sps) out.chips.push_back(y.y[n] > 0.0 ? 1 : 0);
    return out;
}

FrameSyncResult frame_sync_msk(const ChipStream& chips, double threshold, std::optional<std::size_t> max_start,
                               OpCounter* counter) {
    FrameSyncResult best;
    const auto& ref = preamble_chips().chips;
    const std::size_t n_ref = ref.size();
    if (chips.size() < n_ref) return best;
    std::size_t last = chips.size() - n_ref;
    if (max_start) last = std::min(last, *max_start);

    bool have = false;
    for (std::size_t lag = 0; lag <= last; ++lag) {
        int acc = 0;
        for (std::size_t k = 0; k < n_ref; ++k) acc += (chips.chips[lag + k] == ref[k]) ? 1 : -1;
        const double rho = static_cast<double>(acc) / static_cast<double>(n_ref);
        if (!have || rho > best.peak) {
            have = true;
            best.peak = rho;
            best.start_index = lag;
        }
    }
    best.found = have && best.peak >= threshold;
    if (counter != nullptr) {
        const auto lags = static_cast<std::int64_t>(last + 1);
        const auto n = static_cast<std::int64_t>(n_ref);
        counter->add(Stage::frame_sync, {.additions = lags * (n - 1), .multiplications = lags * n, .comparisons = lags});
    }
    return best;
}

DemodReport demodulate(const IqBuffer& z, const Config& cfg, OpCounter* counter) {
    DemodReport report;
    const int sps = z.sps;
    const FrameLayout layout{cfg.payload_bits};
    const std::size_t frame_chips = layout.frame_chips();
    if (z.size() <= 2 * sps) return report;

    const MskTimingStat timing = msk_timing(z, cfg.timing_window, counter);
    report.timing = {.sample_phase = timing.tau_hat, .converged = timing.complete, .iterations_used = timing.symbols_used};

    const PhaseDiffSignal y = diff_detect(z, counter);
    const ChipStream chips = detect_chips(y, timing, sps);
    if (counter != nullptr)
        counter->add(Stage::bit_detection, {.comparisons = static_cast<std::int64_t>(chips.size())});

    std::optional<std::size_t> max_start;
    if (cfg.fit_frame) {
        if (chips.size() < frame_chips) return report;
        max_start = chips.size() - frame_chips;
    }
    const FrameSyncResult sync = frame_sync_msk(chips, cfg.sync_threshold, max_start, counter);
    if (!sync.found) return report;

    const auto& ref = preamble_chips().chips;
    int matches = 0;
    for (std::size_t k = 0; k < FrameLayout::preamble_chips; ++k)
        matches += chips.chips[sync.start_index + k] == ref[k];

    std::vector<std::uint8_t> payload(frame_chips - FrameLayout::preamble_chips, 0);
    for (std::size_t k = 0; k < payload.size(); ++k) {
        const std::size_t idx = sync.start_index + FrameLayout::preamble_chips + k;
        if (idx < chips.size()) payload[k] = chips.chips[idx];
    }
    Bits bits = symbols_to_bits(despread_stream(payload, counter));
    bits.resize(cfg.payload_bits);

    // chip k is decided at the end of its interval, one chip after it starts
    const long decision = timing.tau_hat + static_cast<long>(sync.start_index) * sps;
    report.frame_found = true;
    report.frame_start = static_cast<std::size_t>(std::max(0L, decision - sps));
    report.payload_bits = std::move(bits);
    report.preamble_match_count = matches;
    return report;
}

}  // namespace dualrx::msk
