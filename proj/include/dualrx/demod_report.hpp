#pragma once

#include <cstddef>
#include <optional>

#include "dualrx/types.hpp"

namespace dualrx {

enum class Mode { qpsk, msk };

struct TimingEstimate {
    int sample_phase = 0;
    bool converged = false;
    int iterations_used = 0;
};

struct CarrierEstimate {
    double f_d_hat = 0.0;
    double theta_hat = 0.0;
    int n_fft = 0;
    double peak_magnitude = 0.0;
};

/// Outcome of one demodulation attempt; payload_bits is only present when
/// frame_found is set. The carrier estimate is zeroed for the MSK chain.
struct DemodReport {
    bool frame_found = false;
    std::optional<std::size_t> frame_start;
    std::optional<Bits> payload_bits;
    int preamble_match_count = 0;
    CarrierEstimate carrier;
    TimingEstimate timing;
};

}  // namespace dualrx
