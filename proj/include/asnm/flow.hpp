#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "asnm/trace.hpp"

namespace asnm {

enum class Label { Intrusion, Legitimate };

std::string_view to_string(Label label) noexcept;
/// Accepts "intrusion" / "legitimate" (case-insensitive). Throws SchemaViolation.
Label parse_label(std::string_view text);

/// Outbound is client to server, inbound is server to client.
enum class Direction { Outbound, Inbound };

struct ConnectionKey {
    Endpoint client;
    Endpoint server;

    friend auto operator<=>(const ConnectionKey&, const ConnectionKey&) = default;
};

struct TcpConnection {
    ConnectionKey key;
    std::int64_t start_us = 0;
    std::int64_t end_us = 0;
    std::vector<PacketEvent> packets_client;  ///< P_c
    std::vector<PacketEvent> packets_server;  ///< P_s
    std::vector<Direction> arrival;           ///< direction of each packet in capture order
    Label label = Label::Legitimate;
    std::string service;
    std::string exploit;
    std::string obfuscation_id = "direct";

    std::size_t packet_count() const { return packets_client.size() + packets_server.size(); }

    /// Builds a connection from packets in capture order; direction is decided
    /// by comparing each packet's source with `key.client`.
    static TcpConnection from_packets(const ConnectionKey& key,
                                      const std::vector<PacketEvent>& packets);

    /// Packets merged back into capture order, paired with their direction.
    std::vector<std::pair<Direction, const PacketEvent*>> chronological() const;
};

/// Start/end intervals of all connections, grouped by
/// (client address, server address, server port).
class ContextIndex {
public:
    using SiblingKey = std::tuple<std::array<std::uint8_t, 4>, std::array<std::uint8_t, 4>,
                                  std::uint16_t>;

    static SiblingKey sibling_key(const ConnectionKey& key);

    void add(const TcpConnection& conn);
    /// Must be called after the last add().
    void finalize();

    /// Starts (sorted) of connections sharing the sibling key.
    const std::vector<std::int64_t>* starts(const SiblingKey& key) const;
    std::size_t size() const noexcept { return count_; }

private:
    std::map<SiblingKey, std::vector<std::int64_t>> starts_;
    std::size_t count_ = 0;
};

struct AssemblyOptions {
    double idle_timeout_s = 300.0;
};

struct Assembly {
    std::vector<TcpConnection> connections;
    ContextIndex context;
};

/// Splits a trace into TCP connections. Provenance (label, service, exploit,
/// obfuscation) is copied from the trace meta.
Assembly assemble(const Trace& trace, const AssemblyOptions& options = {});

/// Sibling connections with start in [conn.start - window, conn.start).
std::size_t flows_before(const ContextIndex& ctx, const TcpConnection& conn, double window_s);
/// Sibling connections with start in (conn.end, conn.end + window].
std::size_t flows_after(const ContextIndex& ctx, const TcpConnection& conn, double window_s);

}  // namespace asnm
