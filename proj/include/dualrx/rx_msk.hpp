#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dualrx/demod_report.hpp"
#include "dualrx/phy_frames.hpp"
#include "dualrx/types.hpp"

namespace dualrx {
class OpCounter;
}

/// Non-coherent MSK receiver chain. There is no differential decoder: the
/// phase-difference detector returns the chips as they were before the
/// transmitter's differential encoding.
namespace dualrx::msk {

struct MskTimingStat {
    std::vector<Complex> v;  // one accumulator per candidate phase
    int tau_hat = 0;
    int symbols_used = 0;
    bool complete = false;   // false when fewer than the requested symbols existed
};

/// y[n] = Im(z[n] conj(z[n - sps])) / (|z[n]| |z[n - sps]| + eps); zero for
/// n < sps.
struct PhaseDiffSignal {
    RealVector y;
    int delay = 0;
};

PhaseDiffSignal diff_detect(const IqBuffer& z, OpCounter* counter = nullptr);

/// Nonlinear timing estimate: for each phase i in [0, sps) average
/// (z[i + n sps] conj(z[i + (n-1) sps]))^2 over `window` chip intervals and
/// pick the phase with the largest magnitude (ties to the smaller i).
MskTimingStat msk_timing(const IqBuffer& z, int window = 64, OpCounter* counter = nullptr);

/// Samples y at tau_hat + m sps for m = 0, 1, ...; y > 0 gives chip 1.
ChipStream detect_chips(const PhaseDiffSignal& y, const MskTimingStat& t, int sps);

struct FrameSyncResult {
    bool found = false;
    std::size_t start_index = 0;
    double peak = 0.0;  // correlation / 256, in [-1, 1]
};

/// Sliding +-1 correlation against the 256 preamble chips.
FrameSyncResult frame_sync_msk(const ChipStream& chips, double threshold = 0.5,
                               std::optional<std::size_t> max_start = {}, OpCounter* counter = nullptr);

struct Config {
    std::size_t payload_bits = 200;
    int timing_window = 64;
    double sync_threshold = 0.5;
    bool fit_frame = true;
};

DemodReport demodulate(const IqBuffer& z, const Config& cfg, OpCounter* counter = nullptr);

}  // namespace dualrx::msk
