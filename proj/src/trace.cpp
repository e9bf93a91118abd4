#include "asnm/trace.hpp"

#include <charconv>
#include <sstream>

#include "asnm/error.hpp"

namespace asnm {

namespace {

constexpr std::string_view kFlagChars = "SAFRPU";

template <class T>
T parse_number(std::string_view tok, std::string_view what) {
    T value{};
    const auto* first = tok.data();
    const auto* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (tok.empty() || ec != std::errc{} || ptr != last) {
        throw Error(Errc::SchemaViolation,
                    "bad numeral for " + std::string(what) + ": '" + std::string(tok) + "'");
    }
    return value;
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && line[i] == ' ') ++i;
        if (i >= line.size()) break;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ') ++j;
        out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

}  // namespace

std::string format_address(const std::array<std::uint8_t, 4>& a) {
    return std::to_string(a[0]) + '.' + std::to_string(a[1]) + '.' + std::to_string(a[2]) + '.' +
           std::to_string(a[3]);
}

std::array<std::uint8_t, 4> parse_address(std::string_view text) {
    std::array<std::uint8_t, 4> out{};
    std::size_t pos = 0;
    for (int i = 0; i < 4; ++i) {
        const std::size_t dot = (i < 3) ? text.find('.', pos) : text.size();
        if (dot == std::string_view::npos) {
            throw Error(Errc::SchemaViolation, "bad IPv4 address: '" + std::string(text) + "'");
        }
        const auto octet = parse_number<unsigned>(text.substr(pos, dot - pos), "address octet");
        if (octet > 255) {
            throw Error(Errc::SchemaViolation, "bad IPv4 address: '" + std::string(text) + "'");
        }
        out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(octet);
        pos = dot + 1;
    }
    return out;
}

std::string TcpFlags::to_string() const {
    std::string s;
    for (std::size_t i = 0; i < kFlagChars.size(); ++i) {
        if (bits_ & (1u << i)) s.push_back(kFlagChars[i]);
    }
    return s.empty() ? std::string("-") : s;
}

TcpFlags TcpFlags::parse(std::string_view text) {
    if (text == "-") return TcpFlags{};
    std::uint8_t bits = 0;
    std::size_t last = 0;
    for (char c : text) {
        const auto idx = kFlagChars.find(c);
        if (idx == std::string_view::npos || (bits != 0 && idx <= last)) {
            throw Error(Errc::SchemaViolation, "bad flag string: '" + std::string(text) + "'");
        }
        bits = static_cast<std::uint8_t>(bits | (1u << idx));
        last = idx;
    }
    if (bits == 0) throw Error(Errc::SchemaViolation, "empty flag string");
    return TcpFlags(bits);
}

void validate_event(const PacketEvent& e) {
    if (e.ip_header_len < 20 || e.ip_header_len > 60) {
        throw Error(Errc::SchemaViolation, "ip_header_len out of [20,60]");
    }
    if (e.tcp_header_len < 20 || e.tcp_header_len > 60) {
        throw Error(Errc::SchemaViolation, "tcp_header_len out of [20,60]");
    }
}

Trace::Trace(std::vector<PacketEvent> events, TraceMeta meta)
    : events_(std::move(events)), meta_(std::move(meta)) {
    for (std::size_t i = 0; i < events_.size(); ++i) {
        validate_event(events_[i]);
        if (i > 0 && events_[i].timestamp_us < events_[i - 1].timestamp_us) {
            throw Error(Errc::SchemaViolation,
                        "timestamps decrease at event " + std::to_string(i));
        }
    }
}

std::string Trace::meta_or(std::string_view key, std::string_view fallback) const {
    auto it = meta_.find(key);
    return it == meta_.end() ? std::string(fallback) : it->second;
}

std::string write_canonical(const Trace& trace) {
    std::string out;
    out.reserve(64 + trace.events().size() * 72);
    out.append(kCanonicalHeader).push_back('\n');
    for (const auto& [k, v] : trace.meta()) {
        if (k.empty() || k.find_first_of("=\n") != std::string::npos ||
            v.find('\n') != std::string::npos) {
            throw Error(Errc::SchemaViolation, "meta entry not representable: '" + k + "'");
        }
        out.append(k).push_back('=');
        out.append(v).push_back('\n');
    }
    out.push_back('\n');
    for (const auto& e : trace.events()) {
        out += std::to_string(e.timestamp_us);
        out += ' ' + format_address(e.src.address) + ' ' + std::to_string(e.src.port);
        out += ' ' + format_address(e.dst.address) + ' ' + std::to_string(e.dst.port);
        out += ' ' + std::to_string(e.ip_header_len) + ' ' + std::to_string(e.tcp_header_len) +
               ' ' + std::to_string(e.payload_len);
        out += ' ' + e.flags.to_string();
        out += ' ' + std::to_string(e.seq) + ' ' + std::to_string(e.ack);
        out += e.corrupt ? " 1\n" : " 0\n";
    }
    return out;
}

Trace read_canonical(std::string_view text) {
    std::size_t pos = 0;
    std::size_t line_no = 0;
    auto next_line = [&](std::string_view& line) {
        if (pos >= text.size()) return false;
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        return true;
    };
    auto fail = [&](const std::string& msg) -> Error {
        return Error(Errc::SchemaViolation, "line " + std::to_string(line_no) + ": " + msg);
    };

    std::string_view line;
    if (!next_line(line) || line != kCanonicalHeader) {
        throw Error(Errc::SchemaViolation, "missing 'asnmtrace v1' header");
    }
    TraceMeta meta;
    while (next_line(line)) {
        if (line.empty()) break;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos || eq == 0) throw fail("malformed meta line");
        meta.emplace(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
    }
    std::vector<PacketEvent> events;
    while (next_line(line)) {
        if (line.empty() && pos >= text.size()) break;
        const auto tok = split_ws(line);
        if (tok.size() != 12) {
            throw fail("expected 12 fields, got " + std::to_string(tok.size()));
        }
        PacketEvent e;
        try {
            e.timestamp_us = parse_number<std::int64_t>(tok[0], "ts_us");
            e.src.address = parse_address(tok[1]);
            e.src.port = parse_number<std::uint16_t>(tok[2], "src_port");
            e.dst.address = parse_address(tok[3]);
            e.dst.port = parse_number<std::uint16_t>(tok[4], "dst_port");
            e.ip_header_len = parse_number<std::uint16_t>(tok[5], "iphl");
            e.tcp_header_len = parse_number<std::uint16_t>(tok[6], "tcphl");
            e.payload_len = parse_number<std::uint32_t>(tok[7], "plen");
            e.flags = TcpFlags::parse(tok[8]);
            e.seq = parse_number<std::uint32_t>(tok[9], "seq");
            e.ack = parse_number<std::uint32_t>(tok[10], "ack");
            if (tok[11] != "0" && tok[11] != "1") throw fail("corrupt must be 0 or 1");
            e.corrupt = tok[11] == "1";
        } catch (const Error& err) {
            throw fail(err.what());
        }
        events.push_back(e);
    }
    return Trace(std::move(events), std::move(meta));
}

}  // namespace asnm
