#include "asnm/flow.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "asnm/error.hpp"

namespace asnm {

std::string_view to_string(Label label) noexcept {
    return label == Label::Intrusion ? "intrusion" : "legitimate";
}

Label parse_label(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "intrusion") return Label::Intrusion;
    if (lower == "legitimate") return Label::Legitimate;
    throw Error(Errc::SchemaViolation, "unknown label '" + std::string(text) + "'");
}

TcpConnection TcpConnection::from_packets(const ConnectionKey& key,
                                          const std::vector<PacketEvent>& packets) {
    TcpConnection c;
    c.key = key;
    for (const auto& p : packets) {
        if (c.arrival.empty()) {
            c.start_us = p.timestamp_us;
            c.end_us = p.timestamp_us;
        }
        c.start_us = std::min(c.start_us, p.timestamp_us);
        c.end_us = std::max(c.end_us, p.timestamp_us);
        if (p.src == key.client) {
            c.packets_client.push_back(p);
            c.arrival.push_back(Direction::Outbound);
        } else {
            c.packets_server.push_back(p);
            c.arrival.push_back(Direction::Inbound);
        }
    }
    return c;
}

std::vector<std::pair<Direction, const PacketEvent*>> TcpConnection::chronological() const {
    std::vector<std::pair<Direction, const PacketEvent*>> out;
    out.reserve(arrival.size());
    std::size_t ci = 0;
    std::size_t si = 0;
    for (Direction d : arrival) {
        if (d == Direction::Outbound) {
            out.emplace_back(d, &packets_client[ci++]);
        } else {
            out.emplace_back(d, &packets_server[si++]);
        }
    }
    return out;
}

ContextIndex::SiblingKey ContextIndex::sibling_key(const ConnectionKey& key) {
    return {key.client.address, key.server.address, key.server.port};
}

void ContextIndex::add(const TcpConnection& conn) {
    starts_[sibling_key(conn.key)].push_back(conn.start_us);
    ++count_;
}

void ContextIndex::finalize() {
    for (auto& [k, v] : starts_) std::sort(v.begin(), v.end());
}

const std::vector<std::int64_t>* ContextIndex::starts(const SiblingKey& key) const {
    auto it = starts_.find(key);
    return it == starts_.end() ? nullptr : &it->second;
}

namespace {

struct ActiveFlow {
    std::size_t index = 0;
    std::int64_t last_us = 0;
    bool fin_client = false;
    bool fin_server = false;
    bool finished = false;
};

bool pure_syn(const PacketEvent& e) {
    return e.flags.has(TcpFlags::SYN) && !e.flags.has(TcpFlags::ACK);
}

std::int64_t to_us(double seconds) { return std::llround(seconds * 1e6); }

}  // namespace

Assembly assemble(const Trace& trace, const AssemblyOptions& options) {
    const std::int64_t timeout_us = to_us(options.idle_timeout_s);
    const Label label = parse_label(trace.meta_or(meta_key::label, "legitimate"));
    const std::string service = trace.meta_or(meta_key::service);
    const std::string exploit = trace.meta_or(meta_key::exploit);
    const std::string obfuscation = trace.meta_or(meta_key::obfuscation, "direct");

    Assembly out;
    std::map<std::pair<Endpoint, Endpoint>, ActiveFlow> active;

    for (const auto& e : trace.events()) {
        const auto pair_key = std::minmax(e.src, e.dst);
        auto it = active.find(pair_key);
        if (it != active.end()) {
            const ActiveFlow& f = it->second;
            if (e.timestamp_us - f.last_us > timeout_us || (f.finished && pure_syn(e))) {
                active.erase(it);
                it = active.end();
            }
        }
        if (it == active.end()) {
            TcpConnection c;
            const bool syn_ack = e.flags.has(TcpFlags::SYN) && e.flags.has(TcpFlags::ACK);
            c.key = syn_ack ? ConnectionKey{e.dst, e.src} : ConnectionKey{e.src, e.dst};
            c.start_us = e.timestamp_us;
            c.end_us = e.timestamp_us;
            c.label = label;
            c.service = service;
            c.exploit = exploit;
            c.obfuscation_id = obfuscation;
            out.connections.push_back(std::move(c));
            it = active.emplace(pair_key, ActiveFlow{out.connections.size() - 1, e.timestamp_us})
                     .first;
        }
        ActiveFlow& f = it->second;
        TcpConnection& c = out.connections[f.index];
        const bool outbound = e.src == c.key.client;
        if (outbound) {
            c.packets_client.push_back(e);
            c.arrival.push_back(Direction::Outbound);
        } else {
            c.packets_server.push_back(e);
            c.arrival.push_back(Direction::Inbound);
        }
        c.end_us = e.timestamp_us;
        f.last_us = e.timestamp_us;

        if (e.flags.has(TcpFlags::RST)) {
            active.erase(it);
            continue;
        }
        if (e.flags.has(TcpFlags::FIN)) {
            (outbound ? f.fin_client : f.fin_server) = true;
            f.finished = f.fin_client && f.fin_server;
        }
    }

    for (const auto& c : out.connections) out.context.add(c);
    out.context.finalize();
    return out;
}

std::size_t flows_before(const ContextIndex& ctx, const TcpConnection& conn, double window_s) {
    const auto* starts = ctx.starts(ContextIndex::sibling_key(conn.key));
    if (!starts) return 0;
    const std::int64_t lo = conn.start_us - to_us(window_s);
    const auto first = std::lower_bound(starts->begin(), starts->end(), lo);
    const auto last = std::lower_bound(starts->begin(), starts->end(), conn.start_us);
    return static_cast<std::size_t>(last - first);
}

std::size_t flows_after(const ContextIndex& ctx, const TcpConnection& conn, double window_s) {
    const auto* starts = ctx.starts(ContextIndex::sibling_key(conn.key));
    if (!starts) return 0;
    const std::int64_t hi = conn.end_us + to_us(window_s);
    const auto first = std::upper_bound(starts->begin(), starts->end(), conn.end_us);
    const auto last = std::upper_bound(starts->begin(), starts->end(), hi);
    return static_cast<std::size_t>(last - first);
}

}  // namespace asnm
