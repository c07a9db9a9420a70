#include "dualrx/correlator.hpp"

#include <algorithm>
#include <stdexcept>

#include "dualrx/complexity_meter.hpp"

namespace dualrx {

std::vector<double> full_cross_correlation(std::span<const double> window,
                                           std::span<const double> reference,
                                           OpCounter* counter) {
    if (window.size() != reference.size())
        throw std::invalid_argument("window and reference lengths differ");
    const auto n = static_cast<long>(window.size());
    if (n == 0) return {};
    std::vector<double> out(static_cast<std::size_t>(2 * n - 1), 0.0);
    std::int64_t mults = 0;
    std::int64_t adds = 0;
    for (long shift = -(n - 1); shift <= n - 1; ++shift) {
        const long lo = std::max(0L, shift);
        const long hi = std::min(n, n + shift);
        double acc = window[static_cast<std::size_t>(lo)] * reference[static_cast<std::size_t>(lo - shift)];
        ++mults;
        for (long i = lo + 1; i < hi; ++i) {
            acc += window[static_cast<std::size_t>(i)] * reference[static_cast<std::size_t>(i - shift)];
            ++mults;
            ++adds;
        }
        out[static_cast<std::size_t>(shift + n - 1)] = acc;
    }
    if (counter != nullptr) counter->add(Stage::frame_sync, {.additions = adds, .multiplications = mults});
    return out;
}

int correlation_peak_shift(std::span<const double> window, std::span<const double> reference,
                           OpCounter* counter) {
    const auto c = full_cross_correlation(window, reference, counter);
    if (c.empty()) return 0;
    const auto best = std::max_element(c.begin(), c.end());
    return static_cast<int>(best - c.begin()) - static_cast<int>(window.size() - 1);
}

}  // namespace dualrx
