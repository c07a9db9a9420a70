#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "dualrx/phy_frames.hpp"
#include "dualrx/types.hpp"

namespace dualrx {

/// Half-sine taps sin(pi n / N), n = 0..N-1, for N samples per pulse.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> half_sine(int samples_per_pulse) {
    if (samples_per_pulse < 4 || samples_per_pulse % 2 != 0)
        throw std::invalid_argument("samples per pulse must be even and >= 4");
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> taps(samples_per_pulse);
    for (int n = 0; n < samples_per_pulse; ++n)
        taps[n] = static_cast<Scalar>(std::sin(kPi * n / samples_per_pulse));
    return taps;
}

struct PulseShape {
    RealVector taps;
    int samples_per_pulse = 0;

    /// Index of the unit peak, N / 2.
    [[nodiscard]] int peak_index() const { return samples_per_pulse / 2; }
};

PulseShape half_sine_taps(int samples_per_pulse);

/// Sign applied to chip k's pulse so that differential MSK detection of the
/// modulated, differentially encoded stream returns the chips before
/// encoding. The pattern +,-,-,+ repeats every four chips.
constexpr int chip_sign(long k) {
    constexpr int pattern[4] = {1, -1, -1, 1};
    return pattern[((k % 4) + 4) % 4];
}

/// Half-sine O-QPSK modulation.
///
/// Chip k (0 -> -1, 1 -> +1, times chip_sign(k)) drives a half-sine pulse of
/// 2 * sps samples starting at sample k * sps; even chips ride on I and odd
/// chips on Q, so Q trails I by one chip. Guard half-pulses for a virtual
/// chip -1 (state `d_init`) and a virtual trailing chip (repeating the last
/// chip) keep the envelope at unit magnitude over the whole buffer. The
/// output has (chips + 1) * sps samples; an empty stream yields an empty
/// buffer.
IqBuffer modulate(const ChipStream& chips, int sps = 8, std::uint8_t d_init = 0);

}  // namespace dualrx
