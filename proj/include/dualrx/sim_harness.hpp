#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dualrx/channel_model.hpp"
#include "dualrx/complexity_meter.hpp"
#include "dualrx/mode_controller.hpp"

namespace dualrx {

enum class SweepMode { qpsk, msk, automatic };

std::string_view sweep_mode_name(SweepMode m);
std::optional<SweepMode> parse_sweep_mode(std::string_view s);

struct SweepConfig {
    double snr_start = -20.0;
    double snr_stop = 14.0;
    double snr_step = 2.0;
    int packets_per_point = 2000;
    std::size_t payload_bits = 200;
    SweepMode mode = SweepMode::qpsk;
    /// Impairment template; snr_db and seed are set per packet.
    ChannelParams channel{.f_d_hz = 20e3, .theta_rad = 1.0, .tau_samples = 3.0};
    int sps = 8;
    int n_fft = 2048;
    std::uint64_t master_seed = 1;
    /// A missed frame counts all payload bits as errors; when false, missed
    /// packets are left out of the BER and only show up in the PER.
    bool missed_frames_as_errors = true;
    ControllerConfig controller;
    /// N_preamble used for the op-count columns.
    int complexity_preamble = 64;
    int threads = 1;
};

/// Throws std::invalid_argument on a non-positive step, no packets, a bad
/// payload length or bad sps / n_fft.
void validate(const SweepConfig& cfg);

std::vector<double> snr_grid(const SweepConfig& cfg);

/// Seed for one packet: a hash of (master, snr index, packet index).
std::uint64_t packet_seed(std::uint64_t master, std::uint64_t snr_index, std::uint64_t packet_index);

struct PacketRecord {
    double snr_db = 0.0;
    std::uint64_t packet_index = 0;
    Mode mode = Mode::qpsk;
    bool frame_found = false;
    std::size_t bit_errors = 0;       // counted over the payload; N_bits if missed
    std::size_t payload_bits = 0;
    int preamble_match = 0;
    SnrVerdict verdict;

    friend bool operator==(const PacketRecord&, const PacketRecord&) = default;
};

/// Payload for one packet, drawn from its seed.
Bits random_payload(std::size_t n_bits, std::uint64_t seed);

/// Transmit, impair and build the received buffer for one packet.
IqBuffer synthesize_packet(const SweepConfig& cfg, const Bits& payload, double snr_db, std::uint64_t seed);

/// One Monte Carlo trial through the given chain.
PacketRecord run_packet(const SweepConfig& cfg, double snr_db, Mode mode, std::uint64_t seed,
                        OpCounter* counter = nullptr);

struct PointResult {
    double snr_db = 0.0;
    SweepMode mode = SweepMode::qpsk;
    int packets = 0;
    int frames_detected = 0;
    std::int64_t bit_errors = 0;
    std::int64_t bits_counted = 0;
    int packet_errors = 0;
    std::int64_t preamble_match_sum = 0;
    int qpsk_packets = 0;
    int msk_packets = 0;
    int mode_switches = 0;
    std::int64_t adds_total = 0;
    std::int64_t mults_total = 0;

    [[nodiscard]] double ber() const;
    [[nodiscard]] double per() const;
    [[nodiscard]] double mean_preamble_match() const;
    [[nodiscard]] int frames_missed() const { return packets - frames_detected; }
    [[nodiscard]] double msk_fraction() const;
};

struct SweepResult {
    std::vector<PointResult> points;
    std::vector<PacketRecord> packets;  // filled when requested

    /// First SNR whose BER is at or below `target`, if any.
    [[nodiscard]] std::optional<double> first_snr_at_ber(double target) const;
};

/// Runs the sweep. Non-auto modes split packets over `cfg.threads`
/// workers; auto mode runs each SNR point's packets in order (mode state
/// depends on it) and splits points over workers instead. Output does not
/// depend on the worker count.
SweepResult ber_sweep(const SweepConfig& cfg, bool keep_packets = false);

/// CSV header and rows:
/// snr_db,mode,packets,frames_detected,bit_errors,ber,per,mean_preamble_match,adds_total,mults_total
std::string sweep_csv(const SweepResult& r);
/// Per-packet rows with mode and verdict.
std::string packets_csv(const SweepResult& r);

/// Reads `key = value` lines ('#' comments) into a map.
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);
std::map<std::string, std::string> parse_key_values(const std::string& text);
/// Applies keys named like the CLI flags (snr-start, fd-hz, ...). Throws on
/// an unknown key or an unparsable value.
void apply_key_values(SweepConfig& cfg, const std::map<std::string, std::string>& kv);
std::string to_key_values(const SweepConfig& cfg);

/// Interleaved little-endian float32 I/Q plus a `<path>.meta` sidecar with
/// sample_rate, sps and chip_rate.
void iq_export(const IqBuffer& buf, const std::filesystem::path& path);
IqBuffer iq_import(const std::filesystem::path& path);

}  // namespace dualrx
