#pragma once

#include <span>
#include <vector>

namespace dualrx {

class OpCounter;

/// Full linear cross-correlation of a received window against a reference
/// of the same length, over all 2N - 1 overlaps. Entry k corresponds to the
/// reference shifted by k - (N - 1) samples. Counts N^2 multiplications and
/// (N - 1)^2 additions into the frame-sync stage when `counter` is set.
std::vector<double> full_cross_correlation(std::span<const double> window,
                                           std::span<const double> reference,
                                           OpCounter* counter = nullptr);

/// Relative shift of the peak of full_cross_correlation (0 when aligned).
int correlation_peak_shift(std::span<const double> window, std::span<const double> reference,
                           OpCounter* counter = nullptr);

}  // namespace dualrx
