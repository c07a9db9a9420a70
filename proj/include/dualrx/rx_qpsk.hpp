#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dualrx/demod_report.hpp"
#include "dualrx/types.hpp"

namespace dualrx {
class OpCounter;
}

/// Coherent O-QPSK receiver chain.
namespace dualrx::qpsk {

/// Convolves both rails with the 2 * sps half-sine taps. Output length is
/// input length + N - 1; a pulse starting at sample s peaks at s + N.
IqBuffer matched_filter(const IqBuffer& z, OpCounter* counter = nullptr);

/// Delay (in samples) from a pulse centre to its matched-filter peak.
constexpr int group_delay(int sps) { return sps; }

struct ElgConfig {
    int pulses = 32;  // L
    int delta = 2;    // early/late spacing in samples
    int step = 1;
    int settle = 3;   // consecutive no-shift decisions that declare convergence
};

/// Early-late gate on the matched-filter magnitude.
///
/// Each iteration consumes one pulse (2 * sps samples) and compares the
/// early, middle and late points. The metric at i is
/// |r[i]^2 - r[i + sps]^2| + |r[i + sps]^2 - r[i + 2 sps]^2|, so both rails
/// of the pulse contribute and a carrier rotation cancels. Chip peaks recur every sps samples,
/// so the phase locks to a chip peak; which rail it landed on is resolved
/// later by frame synchronization.
TimingEstimate elg_timing(const IqBuffer& mf, const ElgConfig& cfg = {}, int start_phase = 0,
                          OpCounter* counter = nullptr);

/// Chip-rate samples mf[phase + j * sps], j = 0, 1, ...
std::vector<Complex> chip_samples(const IqBuffer& mf, int phase);

/// Symbol-rate stream: the earlier chip of each pair (the I rail) delayed
/// onto the later one, sym[m] = chip[2m + parity] + chip[2m + 1 + parity].
std::vector<Complex> pair_symbols(std::span<const Complex> chips, int parity = 0);

/// Non-data-aided 4th-power frequency and phase estimate.
///
/// Raises the first min(size, n_fft) symbols to the 4th power, zero-pads to
/// n_fft and takes the spectral peak. f_d_hat is the peak frequency / 4,
/// within +-1 / (8 T); theta_hat = arg(-peak) / 4, within (-pi/4, pi/4],
/// referenced to the first symbol. Throws for a non power-of-two n_fft,
/// n_fft < 64 or fewer than `min_symbols` symbols.
CarrierEstimate rb_carrier_estimate(std::span<const Complex> symbols, int n_fft, double symbol_period,
                                    OpCounter* counter = nullptr, std::size_t min_symbols = 64);

/// z[n] * exp(-j(2 pi f_d_hat n T_s + theta_hat)).
IqBuffer compensate(const IqBuffer& z, const CarrierEstimate& c);

/// The 128 preamble symbols as transmitted: differentially encoded chips,
/// chip_sign applied, I + jQ per chip pair.
std::vector<Complex> reference_symbols(std::uint8_t d_init = 0);

struct FrameSyncResult {
    bool found = false;
    std::size_t start_index = 0;
    int rotation = 0;  // quarter turns removed from the input
    double peak = 0.0; // normalized correlation at the chosen lag
};

/// Sliding real cross-correlation against the reference for each of the
/// four quarter-turn rotations of the input. The peak is the normalized
/// correlation sum Re(sym * conj(ref)) / (|sym| |ref|); it must reach
/// `threshold`. Lags run from 0 to `max_start` (or as far as the input
/// allows).
FrameSyncResult frame_sync_qpsk(std::span<const Complex> symbols, std::span<const Complex> reference,
                                double threshold = 0.5, std::optional<std::size_t> max_start = {},
                                OpCounter* counter = nullptr);

struct Config {
    std::size_t payload_bits = 200;
    int n_fft = 2048;
    ElgConfig elg;
    double sync_threshold = 0.5;
    std::uint8_t d_init = 0;
    /// Restrict the frame search to starts where the whole frame fits.
    bool fit_frame = true;
};

/// Matched filter, ELG timing, carrier estimation and compensation, frame
/// sync, chip slicing, differential decoding and despreading.
DemodReport demodulate(const IqBuffer& z, const Config& cfg, OpCounter* counter = nullptr);

/// The 256 transmitted (encoded) preamble chips for the match count.
const std::vector<std::uint8_t>& encoded_preamble(std::uint8_t d_init);

}  // namespace dualrx::qpsk
