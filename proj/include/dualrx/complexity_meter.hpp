#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dualrx {

/// Receiver processing stages, named after the rows of the complexity tables.
enum class Stage {
    symbol_timing_recovery,      // MSK nonlinear timing
    matched_filter_timing,       // QPSK matched filter + early-late gate
    frequency_phase_sync,        // QPSK 4th-power FFT estimator
    differential_detection,      // MSK; not tabulated in closed form
    frame_sync,
    chip_to_symbol,
    bit_detection,
};

inline constexpr std::size_t kStageCount = 7;

std::string_view stage_label(Stage s);

struct OpCounts {
    std::int64_t additions = 0;
    std::int64_t multiplications = 0;
    std::int64_t comparisons = 0;
    std::int64_t xors = 0;
    std::int64_t arctans = 0;

    OpCounts& operator+=(const OpCounts& o);
    friend bool operator==(const OpCounts&, const OpCounts&) = default;
};

struct StageCount {
    Stage stage;
    OpCounts counts;
};

/// Per-stage operation counts plus their totals.
struct OpCountReport {
    std::vector<StageCount> stages;

    [[nodiscard]] OpCounts total() const;
    [[nodiscard]] const OpCounts* find(Stage s) const;
    /// "stage,additions,multiplications,comparisons,xors,arctans" rows with a
    /// header and a trailing "total" row.
    [[nodiscard]] std::string to_csv() const;
    [[nodiscard]] std::string to_text(std::string_view title) const;
};

struct ComplexityParams {
    std::int64_t pulses = 32;            // L
    std::int64_t samples_per_pulse = 16; // N_sample
    std::int64_t preamble_symbols = 64;  // N_preamble
    std::int64_t payload_bits = 200;     // N_bits
    std::int64_t n_fft = 2048;           // N_fft
};

/// Throws std::invalid_argument unless every field is positive (payload_bits
/// may be zero), n_fft is a power of two >= 64 and preamble_symbols is within
/// `max_preamble`.
void validate(const ComplexityParams& p, std::int64_t max_preamble);

/// Closed-form counts for the non-coherent chain.
OpCountReport msk_op_counts(const ComplexityParams& p);
/// Closed-form counts for the coherent chain; the FFT rows use the radix-2
/// Cooley-Tukey operation counts with a base-2 logarithm.
OpCountReport qpsk_op_counts(const ComplexityParams& p);

/// Radix-2 FFT additions and multiplications for an n-point transform.
std::int64_t fft_additions(std::int64_t n_fft);
std::int64_t fft_multiplications(std::int64_t n_fft);

/// Runtime tally filled in by instrumented receiver stages.
class OpCounter {
public:
    void add(Stage s, const OpCounts& c);
    void merge(const OpCounter& other);
    void reset();

    [[nodiscard]] const OpCounts& stage(Stage s) const;
    [[nodiscard]] OpCountReport report() const;

private:
    std::array<OpCounts, kStageCount> stages_{};
    std::array<bool, kStageCount> touched_{};
};

/// Report of an instrumented run, absent when instrumentation was off.
std::optional<OpCountReport> runtime_counters(const OpCounter* counter);

}  // namespace dualrx
