#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <string>

#include "dualrx/complexity_meter.hpp"
#include "dualrx/mode_controller.hpp"
#include "dualrx/sim_harness.hpp"

using namespace dualrx;

namespace {

// Flags that map one-to-one onto config-file keys.
struct KeyFlags {
    std::map<std::string, std::string> values;
    std::vector<std::pair<std::string, CLI::Option*>> options;

    void add(CLI::App& app, const std::string& key, const std::string& help) {
        options.emplace_back(key, app.add_option("--" + key, values[key], help));
    }

    [[nodiscard]] std::map<std::string, std::string> given() const {
        std::map<std::string, std::string> kv;
        for (const auto& [key, opt] : options)
            if (opt->count() > 0) kv[key] = values.at(key);
        return kv;
    }
};

void add_channel_flags(CLI::App& app, KeyFlags& f) {
    f.add(app, "payload-bits", "payload length N_bits (multiple of 4)");
    f.add(app, "sps", "samples per chip (even)");
    f.add(app, "nfft", "FFT length of the carrier estimator");
    f.add(app, "seed", "master seed");
    f.add(app, "fd-hz", "carrier frequency offset in Hz");
    f.add(app, "theta-rad", "carrier phase offset in rad");
    f.add(app, "tau-samples", "timing offset in samples");
}

SweepConfig load_config(const std::string& config_path, const KeyFlags& flags) {
    SweepConfig cfg;
    if (!config_path.empty()) apply_key_values(cfg, read_key_values(config_path));
    apply_key_values(cfg, flags.given());
    validate(cfg);
    return cfg;
}

void write_or_print(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

std::string hex_symbols(const Bits& bits) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    for (const auto sym : bits_to_symbols(bits)) s += digits[sym.value()];
    return s;
}

int run_sweep(const SweepConfig& cfg, const std::string& out, const std::string& packets_out) {
    const auto result = ber_sweep(cfg, !packets_out.empty());
    write_or_print(out, sweep_csv(result));
    if (!packets_out.empty()) write_or_print(packets_out, packets_csv(result));
    return 0;
}

int run_decode(const SweepConfig& cfg, const std::string& input, const std::string& out) {
    const IqBuffer z = iq_import(input);
    qpsk::Config qc;
    qc.payload_bits = cfg.payload_bits;
    qc.n_fft = cfg.n_fft;
    msk::Config mc;
    mc.payload_bits = cfg.payload_bits;
    ControllerConfig ctl = cfg.controller;
    if (cfg.mode == SweepMode::qpsk) ctl.manual = Mode::qpsk;
    if (cfg.mode == SweepMode::msk) ctl.manual = Mode::msk;
    DualModeReceiver rx(ctl, qc, mc);

    // Each window holds one frame plus a margin too short for a second preamble,
    // so a frame that fits is the earliest one.
    const Eigen::Index frame_samples =
        static_cast<Eigen::Index>(FrameLayout{cfg.payload_bits}.frame_chips() + 2) * z.sps;
    const Eigen::Index margin = 64 * static_cast<Eigen::Index>(z.sps);
    std::string csv = "frame,start_sample,mode,preamble_match,verdict,payload_hex\n";
    Eigen::Index offset = 0;
    int frames = 0;
    while (offset + frame_samples <= z.size()) {
        IqBuffer window = z;
        window.samples = z.samples.segment(offset, std::min(frame_samples + margin, z.size() - offset));
        const auto r = rx.process(window);
        if (!r.report.frame_found) {
            offset += margin;
            continue;
        }
        const auto start = offset + static_cast<Eigen::Index>(*r.report.frame_start);
        csv += std::to_string(frames++) + ',' + std::to_string(start) + ',' + std::string(mode_name(r.used)) + ',' +
               std::to_string(r.report.preamble_match_count) + ',' +
               (r.verdict.verdict == Verdict::good ? "good" : "poor") + ',' + hex_symbols(*r.report.payload_bits) + '\n';
        offset = start + frame_samples - 2 * z.sps;
    }
    write_or_print(out, csv);
    std::cerr << frames << " frame(s) decoded\n";
    return 0;
}

int run_synth(const SweepConfig& cfg, double snr_db, int count, const std::string& out) {
    if (out.empty()) throw std::invalid_argument("synth needs --out <file.iq>");
    IqBuffer all;
    all.sps = cfg.sps;
    std::string payloads;
    for (int k = 0; k < count; ++k) {
        const auto seed = packet_seed(cfg.master_seed, 0, static_cast<std::uint64_t>(k));
        const Bits payload = random_payload(cfg.payload_bits, seed);
        const IqBuffer z = synthesize_packet(cfg, payload, snr_db, seed);
        const ComplexVector prev = all.samples;
        all.samples.resize(prev.size() + z.size());
        all.samples << prev, z.samples;
        payloads += hex_symbols(payload) + '\n';
    }
    iq_export(all, out);
    std::cout << payloads;
    return 0;
}

int run_complexity(const ComplexityParams& p, bool csv) {
    const auto m = msk_op_counts(p);
    const auto r = qpsk_op_counts(p);
    if (csv) {
        std::cout << "# msk\n" << m.to_csv() << "# qpsk\n" << r.to_csv();
    } else {
        std::cout << m.to_text("MSK demodulator") << '\n' << r.to_text("QPSK demodulator");
    }
    return 0;
}

int run_selftest() {
    int failed = 0;
    auto check = [&failed](bool ok, const std::string& what) {
        std::cout << (ok ? "ok   " : "FAIL ") << what << '\n';
        failed += !ok;
    };
    SweepConfig cfg;
    for (Mode m : {Mode::qpsk, Mode::msk}) {
        std::size_t errors = 0;
        for (std::uint64_t k = 0; k < 20; ++k) errors += run_packet(cfg, 100.0, m, packet_seed(99, 0, k)).bit_errors;
        check(errors == 0, std::string(mode_name(m)) + " loopback with channel offsets, 20 packets, " +
                               std::to_string(errors) + " bit errors");
    }
    const auto mt = msk_op_counts(ComplexityParams{}).total();
    const auto qt = qpsk_op_counts(ComplexityParams{}).total();
    check(mt.additions == 29793 && mt.multiplications == 6144, "msk op counts 29793 / 6144");
    check(qt.additions == 104617 && qt.multiplications == 40968, "qpsk op counts 104617 / 40968");
    check(chip_table_min_distance() == 12, "chip table minimum distance 12");
    return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dual-mode O-QPSK / MSK baseband receiver simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out;

    auto* sweep = app.add_subcommand("sweep", "Monte Carlo BER sweep over SNR, CSV output");
    KeyFlags sweep_flags;
    sweep_flags.add(*sweep, "mode", "qpsk, msk or auto");
    sweep_flags.add(*sweep, "snr-start", "first SNR in dB");
    sweep_flags.add(*sweep, "snr-stop", "last SNR in dB");
    sweep_flags.add(*sweep, "snr-step", "SNR step in dB");
    sweep_flags.add(*sweep, "packets", "packets per SNR point");
    sweep_flags.add(*sweep, "threads", "worker threads");
    sweep_flags.add(*sweep, "threshold", "preamble match threshold for auto mode");
    sweep_flags.add(*sweep, "missed-as-errors", "count missed frames as all-bit errors (true/false)");
    add_channel_flags(*sweep, sweep_flags);
    std::string packets_out;
    sweep->add_option("--config", config_path, "key = value file; flags override it");
    sweep->add_option("--out", out, "sweep CSV path (stdout when omitted)");
    sweep->add_option("--packets-out", packets_out, "per-packet CSV path");

    auto* decode = app.add_subcommand("decode", "decode every frame in an IQ file");
    std::string input;
    decode->add_option("input", input, "interleaved float32 IQ file with .meta sidecar")->required();
    KeyFlags decode_flags;
    decode_flags.add(*decode, "mode", "qpsk, msk or auto");
    decode_flags.add(*decode, "payload-bits", "payload length N_bits");
    decode_flags.add(*decode, "nfft", "FFT length of the carrier estimator");
    decode_flags.add(*decode, "threshold", "preamble match threshold for auto mode");
    decode->add_option("--config", config_path, "key = value file; flags override it");
    decode->add_option("--out", out, "frame CSV path (stdout when omitted)");

    auto* synth = app.add_subcommand("synth", "write impaired packets to an IQ file");
    KeyFlags synth_flags;
    add_channel_flags(*synth, synth_flags);
    double synth_snr = 20.0;
    int synth_count = 1;
    synth->add_option("--snr", synth_snr, "SNR in dB");
    synth->add_option("--count", synth_count, "number of packets")->check(CLI::PositiveNumber);
    synth->add_option("--config", config_path, "key = value file; flags override it");
    synth->add_option("--out", out, "IQ file path")->required();

    auto* complexity = app.add_subcommand("complexity", "print the closed-form operation counts");
    ComplexityParams cp;
    bool csv = false;
    complexity->add_option("--pulses", cp.pulses, "L");
    complexity->add_option("--samples-per-pulse", cp.samples_per_pulse, "N_sample");
    complexity->add_option("--preamble-symbols", cp.preamble_symbols, "N_preamble");
    complexity->add_option("--payload-bits", cp.payload_bits, "N_bits");
    complexity->add_option("--nfft", cp.n_fft, "N_fft");
    complexity->add_flag("--csv", csv, "CSV instead of text");

    auto* selftest = app.add_subcommand("selftest", "quick loopback and op-count checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep->parsed()) return run_sweep(load_config(config_path, sweep_flags), out, packets_out);
        if (decode->parsed()) return run_decode(load_config(config_path, decode_flags), input, out);
        if (synth->parsed()) return run_synth(load_config(config_path, synth_flags), synth_snr, synth_count, out);
        if (complexity->parsed()) return run_complexity(cp, csv);
        if (selftest->parsed()) return run_selftest();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
