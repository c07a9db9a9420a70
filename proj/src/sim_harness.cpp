#include "dualrx/sim_harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dualrx/phy_frames.hpp"
#include "dualrx/tx_oqpsk.hpp"

namespace dualrx {

std::string_view sweep_mode_name(SweepMode m) {
    switch (m) {
        case SweepMode::qpsk: return "qpsk";
        case SweepMode::msk: return "msk";
        case SweepMode::automatic: return "auto";
    }
    return "?";
}

std::optional<SweepMode> parse_sweep_mode(std::string_view s) {
    if (s == "qpsk") return SweepMode::qpsk;
    if (s == "msk") return SweepMode::msk;
    if (s == "auto") return SweepMode::automatic;
    return std::nullopt;
}

void validate(const SweepConfig& cfg) {
    if (!(cfg.snr_step > 0.0)) throw std::invalid_argument("snr step must be positive");
    if (cfg.snr_stop < cfg.snr_start) throw std::invalid_argument("snr stop is below snr start");
    if (cfg.packets_per_point < 1) throw std::invalid_argument("packets per point must be >= 1");
    if (cfg.payload_bits % 4 != 0) throw std::invalid_argument("payload bits must be a multiple of 4");
    if (cfg.sps < 2 || cfg.sps % 2 != 0) throw std::invalid_argument("sps must be even and >= 2");
    if (cfg.n_fft < 64 || !std::has_single_bit(static_cast<unsigned>(cfg.n_fft)))
        throw std::invalid_argument("n_fft must be a power of two >= 64");
    if (cfg.threads < 1) throw std::invalid_argument("threads must be >= 1");
}

std::vector<double> snr_grid(const SweepConfig& cfg) {
    std::vector<double> grid;
    const auto steps = static_cast<long>(std::floor((cfg.snr_stop - cfg.snr_start) / cfg.snr_step + 1e-9));
    for (long i = 0; i <= steps; ++i) grid.push_back(cfg.snr_start + static_cast<double>(i) * cfg.snr_step);
    return grid;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

qpsk::Config qpsk_config(const SweepConfig& cfg) {
    qpsk::Config q;
    q.payload_bits = cfg.payload_bits;
    q.n_fft = cfg.n_fft;
    return q;
}

msk::Config msk_config(const SweepConfig& cfg) {
    msk::Config m;
    m.payload_bits = cfg.payload_bits;
    return m;
}

OpCounts chain_cost(const SweepConfig& cfg, Mode mode) {
    ComplexityParams p;
    p.samples_per_pulse = 2 * cfg.sps;
    p.preamble_symbols = cfg.complexity_preamble;
    p.payload_bits = static_cast<std::int64_t>(cfg.payload_bits);
    p.n_fft = cfg.n_fft;
    return (mode == Mode::qpsk ? qpsk_op_counts(p) : msk_op_counts(p)).total();
}

PacketRecord score(const SweepConfig& cfg, double snr_db, Mode mode, const Bits& payload,
                   const DemodReport& report) {
    PacketRecord rec;
    rec.snr_db = snr_db;
    rec.mode = mode;
    rec.frame_found = report.frame_found;
    rec.payload_bits = payload.size();
    rec.preamble_match = report.frame_found ? report.preamble_match_count : 0;
    rec.verdict = make_verdict(report, cfg.controller.threshold);
    if (!report.frame_found || !report.payload_bits) {
        rec.bit_errors = payload.size();
    } else {
        const Bits& got = *report.payload_bits;
        for (std::size_t i = 0; i < payload.size(); ++i) rec.bit_errors += (i >= got.size() || got[i] != payload[i]);
    }
    return rec;
}

// Index-ordered parallel map; results never depend on the worker count.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) fn(i);
        });
}

}  // namespace

std::uint64_t packet_seed(std::uint64_t master, std::uint64_t snr_index, std::uint64_t packet_index) {
    return splitmix64(splitmix64(splitmix64(master) ^ snr_index) ^ packet_index);
}

Bits random_payload(std::size_t n_bits, std::uint64_t seed) {
    std::mt19937_64 rng(splitmix64(seed ^ 0x5041594c4f4144ULL));
    Bits bits(n_bits);
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < n_bits; ++i) {
        if (i % 64 == 0) word = rng();
        bits[i] = static_cast<std::uint8_t>((word >> (i % 64)) & 1);
    }
    return bits;
}

IqBuffer synthesize_packet(const SweepConfig& cfg, const Bits& payload, double snr_db, std::uint64_t seed) {
    const ChipStream frame = build_frame(payload);
    const IqBuffer tx = modulate(frame, cfg.sps);
    ChannelParams p = cfg.channel;
    p.snr_db = snr_db;
    p.seed = splitmix64(seed ^ 0x4e4f495345ULL);
    return apply(tx, p);
}

PacketRecord run_packet(const SweepConfig& cfg, double snr_db, Mode mode, std::uint64_t seed, OpCounter* counter) {
    const Bits payload = random_payload(cfg.payload_bits, seed);
    const IqBuffer rx = synthesize_packet(cfg, payload, snr_db, seed);
    const DemodReport report = mode == Mode::qpsk ? qpsk::demodulate(rx, qpsk_config(cfg), counter)
                                                  : msk::demodulate(rx, msk_config(cfg), counter);
    return score(cfg, snr_db, mode, payload, report);
}

double PointResult::ber() const {
    return bits_counted > 0 ? static_cast<double>(bit_errors) / static_cast<double>(bits_counted) : 0.0;
}

double PointResult::per() const {
    return packets > 0 ? static_cast<double>(packet_errors) / packets : 0.0;
}

double PointResult::mean_preamble_match() const {
    return packets > 0 ? static_cast<double>(preamble_match_sum) / packets : 0.0;
}

double PointResult::msk_fraction() const {
    return packets > 0 ? static_cast<double>(msk_packets) / packets : 0.0;
}

std::optional<double> SweepResult::first_snr_at_ber(double target) const {
    for (const auto& p : points)
        if (p.ber() <= target) return p.snr_db;
    return std::nullopt;
}

SweepResult ber_sweep(const SweepConfig& cfg, bool keep_packets) {
    validate(cfg);
    const auto grid = snr_grid(cfg);
    const auto n_packets = static_cast<std::size_t>(cfg.packets_per_point);
    std::vector<PacketRecord> records(grid.size() * n_packets);

    if (cfg.mode == SweepMode::automatic) {
        parallel_for(grid.size(), cfg.threads, [&](std::size_t s) {
            DualModeReceiver rx(cfg.controller, qpsk_config(cfg), msk_config(cfg));
            for (std::size_t k = 0; k < n_packets; ++k) {
                const auto seed = packet_seed(cfg.master_seed, s, k);
                const Bits payload = random_payload(cfg.payload_bits, seed);
                const IqBuffer buf = synthesize_packet(cfg, payload, grid[s], seed);
                const auto result = rx.process(buf);
                auto rec = score(cfg, grid[s], result.used, payload, result.report);
                rec.packet_index = k;
                records[s * n_packets + k] = rec;
            }
        });
    } else {
        const Mode mode = cfg.mode == SweepMode::qpsk ? Mode::qpsk : Mode::msk;
        parallel_for(records.size(), cfg.threads, [&](std::size_t i) {
            const std::size_t s = i / n_packets;
            const std::size_t k = i % n_packets;
            auto rec = run_packet(cfg, grid[s], mode, packet_seed(cfg.master_seed, s, k));
            rec.packet_index = k;
            records[i] = rec;
        });
    }

    const OpCounts qpsk_cost = chain_cost(cfg, Mode::qpsk);
    const OpCounts msk_cost = chain_cost(cfg, Mode::msk);

    SweepResult result;
    for (std::size_t s = 0; s < grid.size(); ++s) {
        PointResult pt;
        pt.snr_db = grid[s];
        pt.mode = cfg.mode;
        std::optional<Mode> previous;
        for (std::size_t k = 0; k < n_packets; ++k) {
            const auto& rec = records[s * n_packets + k];
            ++pt.packets;
            pt.frames_detected += rec.frame_found;
            if (rec.frame_found || cfg.missed_frames_as_errors) {
                pt.bit_errors += static_cast<std::int64_t>(rec.bit_errors);
                pt.bits_counted += static_cast<std::int64_t>(rec.payload_bits);
            }
            pt.packet_errors += (!rec.frame_found || rec.bit_errors > 0);
            pt.preamble_match_sum += rec.preamble_match;
            const OpCounts& cost = rec.mode == Mode::qpsk ? qpsk_cost : msk_cost;
            (rec.mode == Mode::qpsk ? pt.qpsk_packets : pt.msk_packets)++;
            pt.adds_total += cost.additions;
            pt.mults_total += cost.multiplications;
            if (previous && *previous != rec.mode) ++pt.mode_switches;
            previous = rec.mode;
        }
        result.points.push_back(pt);
    }
    if (keep_packets) result.packets = std::move(records);
    return result;
}

std::string sweep_csv(const SweepResult& r) {
    std::string out = "snr_db,mode,packets,frames_detected,bit_errors,ber,per,mean_preamble_match,adds_total,mults_total\n";
    char line[256];
    for (const auto& p : r.points) {
        std::snprintf(line, sizeof line, "%.2f,%s,%d,%d,%lld,%.6e,%.6e,%.4f,%lld,%lld\n", p.snr_db,
                      std::string(sweep_mode_name(p.mode)).c_str(), p.packets, p.frames_detected,
                      static_cast<long long>(p.bit_errors), p.ber(), p.per(), p.mean_preamble_match(),
                      static_cast<long long>(p.adds_total), static_cast<long long>(p.mults_total));
        out += line;
    }
    return out;
}

std::string packets_csv(const SweepResult& r) {
    std::string out = "snr_db,packet,mode,frame_found,bit_errors,preamble_match,verdict\n";
    char line[160];
    for (const auto& p : r.packets) {
        std::snprintf(line, sizeof line, "%.2f,%llu,%s,%d,%zu,%d,%s\n", p.snr_db,
                      static_cast<unsigned long long>(p.packet_index), std::string(mode_name(p.mode)).c_str(),
                      p.frame_found ? 1 : 0, p.bit_errors, p.preamble_match,
                      p.verdict.verdict == Verdict::good ? "good" : "poor");
        out += line;
    }
    return out;
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string{};
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("line " + std::to_string(line_no) + ": expected key = value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_key_values(ss.str());
}

namespace {

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw std::invalid_argument("bad value for " + key + ": " + v);
    }
}

long long to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const long long i = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw std::invalid_argument("bad value for " + key + ": " + v);
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("bad value for " + key + ": " + v);
}

}  // namespace

void apply_key_values(SweepConfig& cfg, const std::map<std::string, std::string>& kv) {
    for (const auto& [key, value] : kv) {
        if (key == "snr-start") cfg.snr_start = to_double(key, value);
        else if (key == "snr-stop") cfg.snr_stop = to_double(key, value);
        else if (key == "snr-step") cfg.snr_step = to_double(key, value);
        else if (key == "packets") cfg.packets_per_point = static_cast<int>(to_int(key, value));
        else if (key == "payload-bits") cfg.payload_bits = static_cast<std::size_t>(to_int(key, value));
        else if (key == "mode") {
            const auto m = parse_sweep_mode(value);
            if (!m) throw std::invalid_argument("bad value for mode: " + value);
            cfg.mode = *m;
        }
        else if (key == "sps") cfg.sps = static_cast<int>(to_int(key, value));
        else if (key == "nfft") cfg.n_fft = static_cast<int>(to_int(key, value));
        else if (key == "seed") cfg.master_seed = static_cast<std::uint64_t>(to_int(key, value));
        else if (key == "fd-hz") cfg.channel.f_d_hz = to_double(key, value);
        else if (key == "theta-rad") cfg.channel.theta_rad = to_double(key, value);
        else if (key == "tau-samples") cfg.channel.tau_samples = to_double(key, value);
        else if (key == "fractional-delay") cfg.channel.fractional_delay = to_bool(key, value);
        else if (key == "threshold") cfg.controller.threshold = static_cast<int>(to_int(key, value));
        else if (key == "k-up") cfg.controller.k_up = static_cast<int>(to_int(key, value));
        else if (key == "k-down") cfg.controller.k_down = static_cast<int>(to_int(key, value));
        else if (key == "missed-as-errors") cfg.missed_frames_as_errors = to_bool(key, value);
        else if (key == "preamble-symbols") cfg.complexity_preamble = static_cast<int>(to_int(key, value));
        else if (key == "threads") cfg.threads = static_cast<int>(to_int(key, value));
        else if (key == "out" || key == "packets-out" || key == "config") continue;
        else throw std::invalid_argument("unknown config key: " + key);
    }
}

std::string to_key_values(const SweepConfig& cfg) {
    std::ostringstream out;
    out.precision(17);
    out << "snr-start = " << cfg.snr_start << '\n'
        << "snr-stop = " << cfg.snr_stop << '\n'
        << "snr-step = " << cfg.snr_step << '\n'
        << "packets = " << cfg.packets_per_point << '\n'
        << "payload-bits = " << cfg.payload_bits << '\n'
        << "mode = " << sweep_mode_name(cfg.mode) << '\n'
        << "sps = " << cfg.sps << '\n'
        << "nfft = " << cfg.n_fft << '\n'
        << "seed = " << cfg.master_seed << '\n'
        << "fd-hz = " << cfg.channel.f_d_hz << '\n'
        << "theta-rad = " << cfg.channel.theta_rad << '\n'
        << "tau-samples = " << cfg.channel.tau_samples << '\n'
        << "fractional-delay = " << (cfg.channel.fractional_delay ? "true" : "false") << '\n'
        << "threshold = " << cfg.controller.threshold << '\n'
        << "k-up = " << cfg.controller.k_up << '\n'
        << "k-down = " << cfg.controller.k_down << '\n'
        << "missed-as-errors = " << (cfg.missed_frames_as_errors ? "true" : "false") << '\n'
        << "preamble-symbols = " << cfg.complexity_preamble << '\n'
        << "threads = " << cfg.threads << '\n';
    return out.str();
}

namespace {

std::filesystem::path meta_path(const std::filesystem::path& path) {
    auto p = path;
    p += ".meta";
    return p;
}

void put_f32(std::ostream& out, float f) {
    const auto bits = std::bit_cast<std::uint32_t>(f);
    const char bytes[4] = {static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
                           static_cast<char>((bits >> 16) & 0xff), static_cast<char>((bits >> 24) & 0xff)};
    out.write(bytes, 4);
}

float get_f32(const unsigned char* b) {
    const std::uint32_t bits = static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
                               static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
    return std::bit_cast<float>(bits);
}

}  // namespace

void iq_export(const IqBuffer& buf, const std::filesystem::path& path) {
    if (buf.empty()) throw std::invalid_argument("refusing to export an empty IQ buffer");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    for (Eigen::Index n = 0; n < buf.size(); ++n) {
        put_f32(out, static_cast<float>(buf.samples[n].real()));
        put_f32(out, static_cast<float>(buf.samples[n].imag()));
    }
    std::ofstream meta(meta_path(path));
    if (!meta) throw std::runtime_error("cannot write " + meta_path(path).string());
    meta.precision(17);
    meta << "sample_rate = " << buf.sample_rate() << '\n'
         << "sps = " << buf.sps << '\n'
         << "chip_rate = " << 1.0 / buf.chip_duration << '\n';
}

IqBuffer iq_import(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.empty()) throw std::runtime_error("empty IQ file: " + path.string());
    if (bytes.size() % 4 != 0) throw std::runtime_error("IQ file length is not a whole number of floats");
    if (bytes.size() % 8 != 0) throw std::runtime_error("truncated IQ pair");

    std::map<std::string, std::string> meta;
    try {
        meta = read_key_values(meta_path(path));
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("unreadable IQ metadata: ") + e.what());
    }
    if (!meta.contains("sps") || !meta.contains("chip_rate"))
        throw std::runtime_error("IQ metadata needs sps and chip_rate");

    IqBuffer buf;
    try {
        buf.sps = static_cast<int>(to_int("sps", meta.at("sps")));
        buf.chip_duration = 1.0 / to_double("chip_rate", meta.at("chip_rate"));
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(std::string("unreadable IQ metadata: ") + e.what());
    }
    if (buf.sps < 2 || !(buf.chip_duration > 0.0)) throw std::runtime_error("IQ metadata out of range");

    const std::size_t n = bytes.size() / 8;
    buf.samples.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        buf.samples[static_cast<Eigen::Index>(i)] = Complex{get_f32(&bytes[8 * i]), get_f32(&bytes[8 * i + 4])};
    return buf;
}

}  // namespace dualrx
