#include "dualrx/channel_model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace dualrx {

double noise_sigma(double snr_db) { return std::sqrt(std::pow(10.0, -snr_db / 10.0)); }

IqBuffer apply(const IqBuffer& x, const ChannelParams& p) {
    if (x.empty()) throw std::invalid_argument("channel input is empty");
    if (p.tau_samples < 0.0) throw std::invalid_argument("tau must be non-negative");
    if (std::abs(p.f_d_hz) >= 0.5 / x.chip_duration)
        throw std::invalid_argument("|f_d| must be below half the chip rate");

    const Eigen::Index n_in = x.size();
    IqBuffer out;
    out.sps = x.sps;
    out.chip_duration = x.chip_duration;

    if (p.fractional_delay) {
        const auto shift = static_cast<Eigen::Index>(std::ceil(p.tau_samples));
        out.samples = ComplexVector::Zero(n_in + shift);
        auto at = [&](Eigen::Index i) { return (i >= 0 && i < n_in) ? x.samples[i] : Complex{}; };
        // out[n] = x(n - tau), linear between neighbouring input samples
        for (Eigen::Index n = 0; n < out.size(); ++n) {
            const double t = static_cast<double>(n) - p.tau_samples;
            const double base = std::floor(t);
            const double frac = t - base;
            const auto i = static_cast<Eigen::Index>(base);
            out.samples[n] = (1.0 - frac) * at(i) + frac * at(i + 1);
        }
    } else {
        const auto shift = static_cast<Eigen::Index>(std::llround(p.tau_samples));
        out.samples = ComplexVector::Zero(n_in + shift);
        out.samples.tail(n_in) = x.samples;
    }

    if (p.f_d_hz != 0.0 || p.theta_rad != 0.0) {
        const double step = 2.0 * kPi * p.f_d_hz * x.sample_period();
        for (Eigen::Index n = 0; n < out.size(); ++n)
            out.samples[n] *= std::polar(1.0, step * static_cast<double>(n) + p.theta_rad);
    }

    if (std::isfinite(p.snr_db)) {
        std::mt19937_64 rng(p.seed);
        std::normal_distribution<double> gauss(0.0, noise_sigma(p.snr_db) / std::sqrt(2.0));
        for (Eigen::Index n = 0; n < out.size(); ++n) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            out.samples[n] += Complex{re, im};
        }
    }
    return out;
}

}  // namespace dualrx
