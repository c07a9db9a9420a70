#pragma once

#include <cstdint>
#include <limits>

#include "dualrx/types.hpp"

namespace dualrx {

/// Carrier frequency/phase offset, timing offset and AWGN.
///
/// SNR is signal power over noise power per complex sample at the
/// oversampled rate, with the transmit signal at unit power. An infinite
/// snr_db disables the noise.
struct ChannelParams {
    double f_d_hz = 0.0;
    double theta_rad = 0.0;
    double tau_samples = 0.0;
    double snr_db = std::numeric_limits<double>::infinity();
    std::uint64_t seed = 0;
    /// Non-integer tau is applied by linear interpolation when set;
    /// otherwise tau is rounded to whole samples.
    bool fractional_delay = false;
};

/// Per-complex-sample noise standard deviation for unit signal power.
double noise_sigma(double snr_db);

/// Delays by tau (output grows by ceil(tau) samples), rotates by
/// exp(j(2 pi f_d n T_s + theta)) and adds circularly symmetric Gaussian
/// noise. Throws on an empty buffer, negative tau or |f_d| >= chip_rate / 2.
IqBuffer apply(const IqBuffer& x, const ChannelParams& p);

}  // namespace dualrx
