#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "asnm/trace.hpp"

namespace asnm {

struct IngestResult {
    Trace trace;
    std::size_t skipped = 0;  ///< retained-as-not-TCP frames (ARP, UDP, ICMP, IP fragments)
};

/// Parses a classic libpcap capture with an Ethernet link layer. pcapng,
/// non-Ethernet link types and IPv6 frames are rejected with
/// UnsupportedCapture; bad magic and truncated records raise MalformedCapture;
/// a capture without TCP frames raises EmptyTrace.
IngestResult ingest_pcap(std::span<const std::uint8_t> bytes, TraceMeta meta = {});

/// Writes events as a microsecond pcap (Ethernet/IPv4/TCP, zero payload bytes
/// sized to payload_len). The corrupt mark has no pcap representation and is
/// dropped.
std::vector<std::uint8_t> write_pcap(const Trace& trace);

}  // namespace asnm
