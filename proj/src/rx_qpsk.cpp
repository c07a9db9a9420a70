#include "dualrx/rx_qpsk.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/FFT>

#include "dualrx/complexity_meter.hpp"
#include "dualrx/phy_frames.hpp"
#include "dualrx/tx_oqpsk.hpp"

namespace dualrx::qpsk {

IqBuffer matched_filter(const IqBuffer& z, OpCounter* counter) {
    const int n_taps = 2 * z.sps;
    const RealVector taps = half_sine<double>(n_taps);
    IqBuffer out;
    out.sps = z.sps;
    out.chip_duration = z.chip_duration;
    if (z.empty()) return out;

    const Eigen::Index len = z.size();
    out.samples = ComplexVector::Zero(len + n_taps - 1);
    for (int k = 0; k < n_taps; ++k) {
        if (taps[k] == 0.0) continue;
        out.samples.segment(k, len) += taps[k] * z.samples;
    }
    if (counter != nullptr) {
        const auto n_out = static_cast<std::int64_t>(out.size());
        counter->add(Stage::matched_filter_timing,
                     {.additions = 2 * n_out * (n_taps - 1), .multiplications = 2 * n_out * n_taps});
    }
    return out;
}

TimingEstimate elg_timing(const IqBuffer& mf, const ElgConfig& cfg, int start_phase, OpCounter* counter) {
    const int sps = mf.sps;
    const int pulse = 2 * sps;
    if (cfg.delta < 1 || 2 * cfg.delta >= pulse) throw std::invalid_argument("ELG delta out of range");

    const Eigen::Index len = mf.size();
    auto metric = [&](Eigen::Index i) {
        const Complex a = mf.samples[i];
        const Complex b = mf.samples[i + sps];
        const Complex c = mf.samples[i + 2 * sps];
        return std::abs(a * a - b * b) + std::abs(b * b - c * c);
    };

    TimingEstimate est;
    int phase = ((start_phase % pulse) + pulse) % pulse;
    int quiet = 0;
    std::int64_t comparisons = 0;
    for (int iter = 0; iter < cfg.pulses; ++iter) {
        // skip the first pulse of filter transient
        const Eigen::Index centre = pulse + static_cast<Eigen::Index>(iter) * pulse + phase;
        if (centre - cfg.delta < 0 || centre + cfg.delta + pulse >= len) break;
        est.iterations_used = iter + 1;

        const double early = metric(centre - cfg.delta);
        const double middle = metric(centre);
        const double late = metric(centre + cfg.delta);
        comparisons += 3;
        if (late > middle && late >= early) {
            phase += cfg.step;
            quiet = 0;
        } else if (early > middle) {
            phase -= cfg.step;
            quiet = 0;
        } else if (++quiet >= cfg.settle) {
            est.converged = true;
            break;
        }
        phase = ((phase % pulse) + pulse) % pulse;
    }
    est.sample_phase = phase;
    if (counter != nullptr) counter->add(Stage::matched_filter_timing, {.comparisons = comparisons});
    return est;
}

std::vector<Complex> chip_samples(const IqBuffer& mf, int phase) {
    std::vector<Complex> out;
    for (Eigen::Index i = phase; i < mf.size(); i += mf.sps) out.push_back(mf.samples[i]);
    return out;
}

std::vector<Complex> pair_symbols(std::span<const Complex> chips, int parity) {
    std::vector<Complex> out;
    for (std::size_t j = static_cast<std::size_t>(parity); j + 1 < chips.size(); j += 2)
        out.push_back(chips[j] + chips[j + 1]);
    return out;
}

CarrierEstimate rb_carrier_estimate(std::span<const Complex> symbols, int n_fft, double symbol_period,
                                    OpCounter* counter, std::size_t min_symbols) {
    if (n_fft < 64 || !std::has_single_bit(static_cast<unsigned>(n_fft)))
        throw std::invalid_argument("n_fft must be a power of two >= 64");
    if (symbols.size() < min_symbols) throw std::invalid_argument("too few symbols for carrier estimation");

    const std::size_t used = std::min(symbols.size(), static_cast<std::size_t>(n_fft));
    std::vector<Complex> powered(static_cast<std::size_t>(n_fft), Complex{});
    for (std::size_t m = 0; m < used; ++m) {
        const Complex sq = symbols[m] * symbols[m];
        powered[m] = sq * sq;
    }

    Eigen::FFT<double> fft;
    std::vector<Complex> spectrum;
    fft.fwd(spectrum, powered);

    std::size_t peak = 0;
    double peak_mag = -1.0;
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
        const double mag = std::abs(spectrum[k]);
        if (mag > peak_mag) {
            peak_mag = mag;
            peak = k;
        }
    }
    const long signed_bin = peak < static_cast<std::size_t>(n_fft / 2) ? static_cast<long>(peak)
                                                                        : static_cast<long>(peak) - n_fft;

    CarrierEstimate est;
    est.n_fft = n_fft;
    est.peak_magnitude = peak_mag;
    est.f_d_hat = static_cast<double>(signed_bin) / (n_fft * symbol_period) / 4.0;
    est.theta_hat = std::arg(-spectrum[peak]) / 4.0;

    if (counter != nullptr) {
        OpCounts c{.additions = fft_additions(n_fft), .multiplications = fft_multiplications(n_fft), .arctans = 1};
        // two complex squarings per symbol
        c.multiplications += static_cast<std::int64_t>(used) * 8;
        c.additions += static_cast<std::int64_t>(used) * 4;
        c.comparisons += n_fft - 1;
        counter->add(Stage::frequency_phase_sync, c);
    }
    return est;
}

IqBuffer compensate(const IqBuffer& z, const CarrierEstimate& c) {
    IqBuffer out = z;
    const double step = 2.0 * kPi * c.f_d_hat * z.sample_period();
    for (Eigen::Index n = 0; n < out.size(); ++n)
        out.samples[n] *= std::polar(1.0, -(step * static_cast<double>(n) + c.theta_hat));
    return out;
}

const std::vector<std::uint8_t>& encoded_preamble(std::uint8_t d_init) {
    static const std::vector<std::uint8_t> encoded[2] = {
        differential_encode(preamble_chips(), 0).chips,
        differential_encode(preamble_chips(), 1).chips,
    };
    return encoded[d_init & 1];
}

std::vector<Complex> reference_symbols(std::uint8_t d_init) {
    const auto& chips = encoded_preamble(d_init);
    std::vector<Complex> ref;
    ref.reserve(chips.size() / 2);
    for (std::size_t k = 0; k + 1 < chips.size(); k += 2) {
        const double i = (chips[k] ? 1.0 : -1.0) * chip_sign(static_cast<long>(k));
        const double q = (chips[k + 1] ? 1.0 : -1.0) * chip_sign(static_cast<long>(k + 1));
        ref.emplace_back(i, q);
    }
    return ref;
}

FrameSyncResult frame_sync_qpsk(std::span<const Complex> symbols, std::span<const Complex> reference,
                                double threshold, std::optional<std::size_t> max_start, OpCounter* counter) {
    FrameSyncResult best;
    const std::size_t n_ref = reference.size();
    if (n_ref == 0 || symbols.size() < n_ref) return best;

    std::size_t last = symbols.size() - n_ref;
    if (max_start) last = std::min(last, *max_start);

    double ref_energy = 0.0;
    for (const auto& r : reference) ref_energy += std::norm(r);
    const double ref_norm = std::sqrt(ref_energy);

    double window_energy = 0.0;
    for (std::size_t m = 0; m < n_ref; ++m) window_energy += std::norm(symbols[m]);

    bool have = false;
    for (std::size_t lag = 0; lag <= last; ++lag) {
        if (lag > 0) {
            window_energy += std::norm(symbols[lag + n_ref - 1]) - std::norm(symbols[lag - 1]);
            window_energy = std::max(window_energy, 0.0);
        }
        Complex acc{};
        for (std::size_t m = 0; m < n_ref; ++m) acc += symbols[lag + m] * std::conj(reference[m]);
        const double denom = ref_norm * std::sqrt(window_energy);
        if (denom <= 0.0) continue;
        // Re(acc * (-j)^r) for r = 0..3
        const double candidates[4] = {acc.real(), acc.imag(), -acc.real(), -acc.imag()};
        for (int r = 0; r < 4; ++r) {
            const double rho = candidates[r] / denom;
            if (!have || rho > best.peak) {
                have = true;
                best.peak = rho;
                best.start_index = lag;
                best.rotation = r;
            }
        }
    }
    best.found = have && best.peak >= threshold;
    if (counter != nullptr) {
        const auto lags = static_cast<std::int64_t>(last + 1);
        const auto n = static_cast<std::int64_t>(n_ref);
        counter->add(Stage::frame_sync,
                     {.additions = lags * (4 * n - 2), .multiplications = lags * 4 * n, .comparisons = lags * 4});
    }
    return best;
}

namespace {

Complex quarter_turns(int r) {
    constexpr Complex table[4] = {{1.0, 0.0}, {0.0, -1.0}, {-1.0, 0.0}, {0.0, 1.0}};
    return table[((r % 4) + 4) % 4];
}

}  // namespace

DemodReport demodulate(const IqBuffer& z, const Config& cfg, OpCounter* counter) {
    DemodReport report;
    const int sps = z.sps;
    const FrameLayout layout{cfg.payload_bits};
    const std::size_t frame_chips = layout.frame_chips();

    const IqBuffer mf = matched_filter(z, counter);
    if (mf.size() < 4 * 2 * sps) return report;
    report.timing = elg_timing(mf, cfg.elg, 0, counter);

    const int phase = report.timing.sample_phase % sps;
    std::vector<Complex> chips = chip_samples(mf, phase);
    const std::vector<Complex> symbols = pair_symbols(chips, 0);
    if (symbols.size() < 64) return report;

    const double symbol_period = 2.0 * z.chip_duration;
    report.carrier = rb_carrier_estimate(symbols, cfg.n_fft, symbol_period, counter);

    // The estimate is referenced to the first symbol, whose two chips sit
    // half a chip either side of phase + sps / 2.
    const double step = 2.0 * kPi * report.carrier.f_d_hat * z.sample_period();
    const double origin = phase + 0.5 * sps;
    for (std::size_t j = 0; j < chips.size(); ++j) {
        const double n = phase + static_cast<double>(j) * sps;
        chips[j] *= std::polar(1.0, -(step * (n - origin) + report.carrier.theta_hat));
    }

    const auto reference = reference_symbols(cfg.d_init);
    FrameSyncResult sync;
    int parity = 0;
    for (int o = 0; o < 2; ++o) {
        const auto paired = pair_symbols(chips, o);
        std::optional<std::size_t> max_start;
        if (cfg.fit_frame) {
            if (paired.size() < frame_chips / 2) continue;
            max_start = paired.size() - frame_chips / 2;
        }
        const auto candidate = frame_sync_qpsk(paired, reference, cfg.sync_threshold, max_start, counter);
        if (candidate.found && (!sync.found || candidate.peak > sync.peak)) {
            sync = candidate;
            parity = o;
        }
    }
    if (!sync.found) return report;

    const std::size_t first = static_cast<std::size_t>(parity) + 2 * sync.start_index;
    const Complex derotate = quarter_turns(sync.rotation);
    ChipStream hard{.chips = std::vector<std::uint8_t>(frame_chips, 0), .origin = ChipOrigin::full_frame};
    for (std::size_t k = 0; k < frame_chips && first + k < chips.size(); ++k) {
        const Complex v = chips[first + k] * derotate;
        const double soft = ((k % 2 == 0) ? v.real() : v.imag()) * chip_sign(static_cast<long>(k));
        hard.chips[k] = soft > 0.0 ? 1 : 0;
    }

    const auto& ref_chips = encoded_preamble(cfg.d_init);
    int matches = 0;
    for (std::size_t k = 0; k < FrameLayout::preamble_chips; ++k) matches += hard.chips[k] == ref_chips[k];

    const ChipStream plain = differential_decode(hard, cfg.d_init);
    const std::span<const std::uint8_t> payload_chips{plain.chips.data() + FrameLayout::preamble_chips,
                                                      frame_chips - FrameLayout::preamble_chips};
    const auto decoded = despread_stream(payload_chips, counter);
    Bits bits = symbols_to_bits(decoded);
    bits.resize(cfg.payload_bits);
    if (counter != nullptr)
        counter->add(Stage::bit_detection, {.comparisons = static_cast<std::int64_t>(frame_chips)});

    const auto peak_index = static_cast<long>(phase) + static_cast<long>(first) * sps;
    report.frame_found = true;
    report.frame_start = static_cast<std::size_t>(std::max(0L, peak_index - 2L * sps));
    report.payload_bits = std::move(bits);
    report.preamble_match_count = matches;
    return report;
}

}  // namespace dualrx::qpsk
