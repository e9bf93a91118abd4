#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace asnm {

struct Endpoint {
    std::array<std::uint8_t, 4> address{};
    std::uint16_t port = 0;

    friend auto operator<=>(const Endpoint&, const Endpoint&) = default;
};

/// Dotted-quad formatting and parsing of IPv4 addresses.
std::string format_address(const std::array<std::uint8_t, 4>& a);
std::array<std::uint8_t, 4> parse_address(std::string_view text);

/// TCP flag set. Canonical text order is "SAFRPU".
class TcpFlags {
public:
    enum Bit : std::uint8_t {
        SYN = 1 << 0,
        ACK = 1 << 1,
        FIN = 1 << 2,
        RST = 1 << 3,
        PSH = 1 << 4,
        URG = 1 << 5,
    };

    constexpr TcpFlags() = default;
    constexpr TcpFlags(std::uint8_t bits) : bits_(bits & 0x3f) {}  // NOLINT implicit

    constexpr bool has(Bit b) const { return (bits_ & b) != 0; }
    constexpr void set(Bit b) { bits_ |= b; }
    constexpr void clear(Bit b) { bits_ &= static_cast<std::uint8_t>(~b); }
    constexpr std::uint8_t bits() const { return bits_; }

    /// Subsequence of "SAFRPU"; the empty set is written as "-".
    std::string to_string() const;
    static TcpFlags parse(std::string_view text);

    friend constexpr bool operator==(TcpFlags, TcpFlags) = default;

private:
    std::uint8_t bits_ = 0;
};

struct PacketEvent {
    std::int64_t timestamp_us = 0;
    Endpoint src;
    Endpoint dst;
    std::uint16_t ip_header_len = 20;
    std::uint16_t tcp_header_len = 20;
    std::uint32_t payload_len = 0;
    TcpFlags flags;
    std::uint32_t seq = 0;
    std::uint32_t ack = 0;
    bool corrupt = false;

    /// On-wire IP datagram length.
    std::uint32_t total_len() const {
        return static_cast<std::uint32_t>(ip_header_len) + tcp_header_len + payload_len;
    }

    friend bool operator==(const PacketEvent&, const PacketEvent&) = default;
};

/// Well-known meta keys.
namespace meta_key {
inline constexpr std::string_view service = "service";
inline constexpr std::string_view label = "label";
inline constexpr std::string_view exploit = "exploit";
inline constexpr std::string_view obfuscation = "obfuscation";
inline constexpr std::string_view obfuscation_seed = "obfuscation_seed";
inline constexpr std::string_view source = "source";
}  // namespace meta_key

using TraceMeta = std::map<std::string, std::string, std::less<>>;

/// An immutable, validated packet trace. Events are ordered by timestamp; ties
/// keep their input order.
class Trace {
public:
    Trace() = default;
    /// Throws SchemaViolation if an event breaks a header invariant or the
    /// timestamps decrease.
    Trace(std::vector<PacketEvent> events, TraceMeta meta);

    const std::vector<PacketEvent>& events() const noexcept { return events_; }
    const TraceMeta& meta() const noexcept { return meta_; }

    /// Meta value or `fallback` when absent.
    std::string meta_or(std::string_view key, std::string_view fallback = {}) const;

    friend bool operator==(const Trace&, const Trace&) = default;

private:
    std::vector<PacketEvent> events_;
    TraceMeta meta_;
};

void validate_event(const PacketEvent& e);

inline constexpr std::string_view kCanonicalHeader = "asnmtrace v1";

std::string write_canonical(const Trace& trace);
Trace read_canonical(std::string_view text);

}  // namespace asnm
