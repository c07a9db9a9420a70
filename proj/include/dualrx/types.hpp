#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace dualrx {

using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Binary sequence, one value (0 or 1) per element.
using Bits = std::vector<std::uint8_t>;

/// Chip rate of the 2.4 GHz O-QPSK PHY.
inline constexpr double kChipRate = 2.0e6;
inline constexpr double kChipDuration = 1.0 / kChipRate;

inline constexpr double kPi = 3.14159265358979323846;

/// Complex baseband samples with their timebase.
///
/// `sps` is samples per chip; the sample period is chip_duration / sps.
struct IqBuffer {
    ComplexVector samples;
    int sps = 8;
    double chip_duration = kChipDuration;

    [[nodiscard]] Eigen::Index size() const { return samples.size(); }
    [[nodiscard]] bool empty() const { return samples.size() == 0; }
    [[nodiscard]] double sample_period() const { return chip_duration / sps; }
    [[nodiscard]] double sample_rate() const { return sps / chip_duration; }
};

}  // namespace dualrx
