#include "dualrx/complexity_meter.hpp"

#include <bit>
#include <sstream>
#include <stdexcept>

namespace dualrx {

std::string_view stage_label(Stage s) {
    switch (s) {
        case Stage::symbol_timing_recovery: return "Symbol Timing Recovery";
        case Stage::matched_filter_timing: return "Matched Filter and Symbol Timing Recovery";
        case Stage::frequency_phase_sync: return "Frequency and Phase Synchronization";
        case Stage::differential_detection: return "Differential Detection";
        case Stage::frame_sync: return "Frame Synchronization";
        case Stage::chip_to_symbol: return "Chip to Symbol Mapping";
        case Stage::bit_detection: return "Bit Detection";
    }
    return "?";
}

OpCounts& OpCounts::operator+=(const OpCounts& o) {
    additions += o.additions;
    multiplications += o.multiplications;
    comparisons += o.comparisons;
    xors += o.xors;
    arctans += o.arctans;
    return *this;
}

OpCounts OpCountReport::total() const {
    OpCounts t;
    for (const auto& s : stages) t += s.counts;
    return t;
}

const OpCounts* OpCountReport::find(Stage s) const {
    for (const auto& sc : stages)
        if (sc.stage == s) return &sc.counts;
    return nullptr;
}

std::string OpCountReport::to_csv() const {
    std::ostringstream out;
    auto row = [&out](std::string_view label, const OpCounts& c) {
        out << '"' << label << "\"," << c.additions << ',' << c.multiplications << ','
            << c.comparisons << ',' << c.xors << ',' << c.arctans << '\n';
    };
    out << "stage,additions,multiplications,comparisons,xors,arctans\n";
    for (const auto& s : stages) row(stage_label(s.stage), s.counts);
    row("total", total());
    return out.str();
}

std::string OpCountReport::to_text(std::string_view title) const {
    std::ostringstream out;
    out << title << '\n';
    auto line = [&out](std::string_view label, const OpCounts& c) {
        out << "  " << label << ": adds=" << c.additions << " mults=" << c.multiplications;
        if (c.comparisons) out << " comparisons=" << c.comparisons;
        if (c.xors) out << " xor=" << c.xors;
        if (c.arctans) out << " arctan=" << c.arctans;
        out << '\n';
    };
    for (const auto& s : stages) line(stage_label(s.stage), s.counts);
    line("Total", total());
    return out.str();
}

void validate(const ComplexityParams& p, std::int64_t max_preamble) {
    if (p.pulses <= 0 || p.samples_per_pulse <= 0 || p.preamble_symbols <= 0 || p.payload_bits < 0)
        throw std::invalid_argument("complexity parameters must be positive");
    if (p.n_fft < 64 || !std::has_single_bit(static_cast<std::uint64_t>(p.n_fft)))
        throw std::invalid_argument("n_fft must be a power of two >= 64");
    if (p.preamble_symbols > max_preamble)
        throw std::invalid_argument("preamble_symbols exceeds the chain maximum");
}

std::int64_t fft_additions(std::int64_t n_fft) {
    const std::int64_t half = n_fft / 2;
    const std::int64_t log_half = std::bit_width(static_cast<std::uint64_t>(half)) - 1;
    return 7 * half * log_half - 5 * n_fft + 8;
}

std::int64_t fft_multiplications(std::int64_t n_fft) {
    const std::int64_t half = n_fft / 2;
    const std::int64_t log_half = std::bit_width(static_cast<std::uint64_t>(half)) - 1;
    return 3 * half * log_half - 5 * n_fft + 8;
}

namespace {

// Rows shared by both chains.
void append_back_end(OpCountReport& r, const ComplexityParams& p) {
    const std::int64_t np = p.preamble_symbols;
    r.stages.push_back({Stage::frame_sync, {.additions = (np - 1) * (np - 1), .multiplications = np * np}});
    r.stages.push_back({Stage::chip_to_symbol,
                        {.additions = (p.payload_bits / 4) * 31 * 16,
                         .comparisons = (p.payload_bits / 4) * 15,
                         .xors = p.payload_bits * 128}});
    r.stages.push_back({Stage::bit_detection, {.comparisons = p.payload_bits}});
}

}  // namespace

OpCountReport msk_op_counts(const ComplexityParams& p) {
    validate(p, 256);
    const std::int64_t half = p.samples_per_pulse / 2;
    OpCountReport r;
    r.stages.push_back({Stage::symbol_timing_recovery,
                        {.additions = p.pulses * half * 4,
                         .multiplications = p.pulses * half * 8,
                         .comparisons = half - 1}});
    append_back_end(r, p);
    return r;
}

OpCountReport qpsk_op_counts(const ComplexityParams& p) {
    validate(p, 128);
    const std::int64_t ns = p.samples_per_pulse;
    OpCountReport r;
    r.stages.push_back({Stage::matched_filter_timing,
                        {.additions = p.pulses * 2 * (ns - 1) * (ns - 1),
                         .multiplications = p.pulses * 2 * ns * ns,
                         .comparisons = p.pulses * 3}});
    r.stages.push_back({Stage::frequency_phase_sync,
                        {.additions = fft_additions(p.n_fft),
                         .multiplications = fft_multiplications(p.n_fft),
                         .arctans = 1}});
    append_back_end(r, p);
    return r;
}

void OpCounter::add(Stage s, const OpCounts& c) {
    const auto i = static_cast<std::size_t>(s);
    stages_[i] += c;
    touched_[i] = true;
}

void OpCounter::merge(const OpCounter& other) {
    for (std::size_t i = 0; i < kStageCount; ++i) {
        stages_[i] += other.stages_[i];
        touched_[i] = touched_[i] || other.touched_[i];
    }
}

void OpCounter::reset() {
    stages_ = {};
    touched_ = {};
}

const OpCounts& OpCounter::stage(Stage s) const { return stages_[static_cast<std::size_t>(s)]; }

OpCountReport OpCounter::report() const {
    OpCountReport r;
    for (std::size_t i = 0; i < kStageCount; ++i)
        if (touched_[i]) r.stages.push_back({static_cast<Stage>(i), stages_[i]});
    return r;
}

std::optional<OpCountReport> runtime_counters(const OpCounter* counter) {
    if (counter == nullptr) return std::nullopt;
    return counter->report();
}

}  // namespace dualrx
