#include "dualrx/tx_oqpsk.hpp"

namespace dualrx {

PulseShape half_sine_taps(int samples_per_pulse) {
    return {half_sine<double>(samples_per_pulse), samples_per_pulse};
}

IqBuffer modulate(const ChipStream& chips, int sps, std::uint8_t d_init) {
    if (sps < 2 || sps % 2 != 0) throw std::invalid_argument("sps must be even and >= 2");
    IqBuffer out;
    out.sps = sps;
    const long n_chips = static_cast<long>(chips.size());
    if (n_chips == 0) return out;

    const int pulse_len = 2 * sps;
    const RealVector taps = half_sine<double>(pulse_len);
    const long length = (n_chips + 1) * sps;
    out.samples = ComplexVector::Zero(length);

    auto level = [&](long k) -> std::uint8_t {
        if (k < 0) return d_init & 1;
        if (k >= n_chips) return chips.chips.back() & 1;
        return chips.chips[static_cast<std::size_t>(k)] & 1;
    };

    for (long k = -1; k <= n_chips; ++k) {
        const double amplitude = (level(k) ? 1.0 : -1.0) * chip_sign(k);
        const Complex rail = (k % 2 == 0) ? Complex{amplitude, 0.0} : Complex{0.0, amplitude};
        const long start = k * sps;
        for (int n = 0; n < pulse_len; ++n) {
            const long idx = start + n;
            if (idx < 0 || idx >= length) continue;
            out.samples[idx] += rail * taps[n];
        }
    }
    return out;
}

}  // namespace dualrx
