#pragma once

// Fixtures and statistics shared by the unit tests and the acceptance run.

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "asnm/obfuscation.hpp"
#include "asnm/rng.hpp"
#include "asnm/trace.hpp"

namespace support {

using namespace asnm;

inline const Endpoint kClient{{10, 1, 0, 1}, 41000};
inline const Endpoint kServer{{192, 168, 10, 1}, 8080};

/// One long connection: SYN, then `n - 1` payload-bearing events alternating
/// 3:1 client:server, 1 ms apart. Each event's seq is its index, so it can be
/// traced through an operator.
inline Trace bulk_trace(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<PacketEvent> events;
    events.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        PacketEvent e;
        e.timestamp_us = static_cast<std::int64_t>(i) * 1000;
        const bool out = i % 4 != 3;
        e.src = out ? kClient : kServer;
        e.dst = out ? kServer : kClient;
        e.flags = i == 0 ? TcpFlags(TcpFlags::SYN) : TcpFlags(TcpFlags::ACK | TcpFlags::PSH);
        e.payload_len = i == 0 ? 0 : static_cast<std::uint32_t>(1 + rng.below(1460));
        e.seq = static_cast<std::uint32_t>(i);
        events.push_back(e);
    }
    return Trace(std::move(events), {{"label", "intrusion"}});
}

/// A few connections with random header lengths and payloads up to 1460.
inline Trace random_trace(std::uint64_t seed) {
    Rng rng(seed);
    std::vector<PacketEvent> events;
    const std::size_t conns = 1 + rng.below(4);
    std::int64_t ts = 0;
    for (std::size_t c = 0; c < conns; ++c) {
        const Endpoint cl{{10, 2, 0, static_cast<std::uint8_t>(c + 1)},
                          static_cast<std::uint16_t>(40000 + c)};
        const std::size_t n = 2 + rng.below(60);
        for (std::size_t i = 0; i < n; ++i) {
            ts += static_cast<std::int64_t>(rng.below(20000));
            PacketEvent e;
            e.timestamp_us = ts;
            const bool out = i == 0 || rng.bernoulli(0.5);
            e.src = out ? cl : kServer;
            e.dst = out ? kServer : cl;
            e.ip_header_len = static_cast<std::uint16_t>(20 + 4 * rng.below(3));
            e.tcp_header_len = static_cast<std::uint16_t>(20 + 4 * rng.below(8));
            e.flags = i == 0 ? TcpFlags(TcpFlags::SYN) : TcpFlags(TcpFlags::ACK);
            if (rng.bernoulli(0.3)) e.flags.set(TcpFlags::PSH);
            if (i + 1 == n) e.flags.set(TcpFlags::FIN);
            e.payload_len = i == 0 ? 0 : static_cast<std::uint32_t>(rng.below(1461));
            e.seq = static_cast<std::uint32_t>(rng.next_u64());
            events.push_back(e);
        }
    }
    return Trace(std::move(events), {});
}

/// How an operator treated the originals of bulk_trace().
struct Fate {
    std::size_t originals = 0;
    std::size_t survived = 0;     ///< original timestamp and seq still present
    std::size_t retransmits = 0;  ///< copies 1 s after the original
    std::size_t extra = 0;        ///< output events minus originals
};

inline Fate fate_of(const Trace& input, const Trace& output) {
    std::map<std::uint32_t, std::int64_t> ts;
    for (const auto& e : input.events()) ts[e.seq] = e.timestamp_us;
    Fate f;
    f.originals = input.events().size();
    for (const auto& e : output.events()) {
        const auto t = ts.at(e.seq);
        if (e.timestamp_us == t && !e.corrupt) ++f.survived;
        if (e.timestamp_us == t + 1'000'000) ++f.retransmits;
    }
    f.extra = output.events().size() - f.originals;
    return f;
}

inline double lag1_autocorrelation(const std::vector<double>& x) {
    const double n = static_cast<double>(x.size());
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= n;
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        den += (x[i] - mean) * (x[i] - mean);
        if (i > 0) num += (x[i] - mean) * (x[i - 1] - mean);
    }
    return num / den;
}

/// Payload bytes per (src, dst) direction.
inline std::map<std::pair<Endpoint, Endpoint>, std::uint64_t> payload_by_direction(const Trace& t) {
    std::map<std::pair<Endpoint, Endpoint>, std::uint64_t> out;
    for (const auto& e : t.events()) out[{e.src, e.dst}] += e.payload_len;
    return out;
}

}  // namespace support
