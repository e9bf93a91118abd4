#include "asnm/pcap.hpp"

#include <algorithm>
#include <string>

#include "asnm/error.hpp"

namespace asnm {

namespace {

constexpr std::uint32_t kMagicMicro = 0xa1b2c3d4;
constexpr std::uint32_t kMagicNano = 0xa1b23c4d;
constexpr std::uint32_t kMagicPcapng = 0x0a0d0d0a;
constexpr std::uint32_t kLinkEthernet = 1;
constexpr std::size_t kGlobalHeaderLen = 24;
constexpr std::size_t kRecordHeaderLen = 16;
constexpr std::size_t kEthernetLen = 14;

constexpr std::uint32_t bswap32(std::uint32_t v) {
    return (v >> 24) | ((v >> 8) & 0xff00) | ((v << 8) & 0xff0000) | (v << 24);
}

class Reader {
public:
    Reader(std::span<const std::uint8_t> bytes, bool swap) : bytes_(bytes), swap_(swap) {}

    std::uint32_t u32(std::size_t off) const {
        std::uint32_t v = static_cast<std::uint32_t>(bytes_[off]) |
                          static_cast<std::uint32_t>(bytes_[off + 1]) << 8 |
                          static_cast<std::uint32_t>(bytes_[off + 2]) << 16 |
                          static_cast<std::uint32_t>(bytes_[off + 3]) << 24;
        return swap_ ? bswap32(v) : v;
    }

private:
    std::span<const std::uint8_t> bytes_;
    bool swap_;
};

std::uint16_t be16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] << 8 | p[1]);
}
std::uint32_t be32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) << 24 | static_cast<std::uint32_t>(p[1]) << 16 |
           static_cast<std::uint32_t>(p[2]) << 8 | p[3];
}

void put_le32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_le16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put_be16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}
void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace

IngestResult ingest_pcap(std::span<const std::uint8_t> bytes, TraceMeta meta) {
    if (bytes.size() < kGlobalHeaderLen) {
        throw Error(Errc::MalformedCapture, "file shorter than pcap global header");
    }
    const std::uint32_t raw_magic = Reader(bytes, false).u32(0);
    bool swap = false;
    bool nano = false;
    if (raw_magic == kMagicMicro || raw_magic == kMagicNano) {
        nano = raw_magic == kMagicNano;
    } else if (bswap32(raw_magic) == kMagicMicro || bswap32(raw_magic) == kMagicNano) {
        swap = true;
        nano = bswap32(raw_magic) == kMagicNano;
    } else if (raw_magic == kMagicPcapng) {
        throw Error(Errc::UnsupportedCapture, "pcapng captures are not supported");
    } else {
        throw Error(Errc::MalformedCapture, "bad pcap magic");
    }
    const Reader rd(bytes, swap);
    if (rd.u32(20) != kLinkEthernet) {
        throw Error(Errc::UnsupportedCapture,
                    "link type " + std::to_string(rd.u32(20)) + " is not Ethernet");
    }

    IngestResult result;
    std::vector<PacketEvent> events;
    std::size_t off = kGlobalHeaderLen;
    std::size_t frame_no = 0;
    while (off < bytes.size()) {
        ++frame_no;
        const auto where = " (frame " + std::to_string(frame_no) + ")";
        if (bytes.size() - off < kRecordHeaderLen) {
            throw Error(Errc::MalformedCapture, "truncated record header" + where);
        }
        const std::uint32_t ts_sec = rd.u32(off);
        const std::uint32_t ts_frac = rd.u32(off + 4);
        const std::uint32_t incl_len = rd.u32(off + 8);
        off += kRecordHeaderLen;
        if (bytes.size() - off < incl_len) {
            throw Error(Errc::MalformedCapture, "truncated record body" + where);
        }
        const std::uint8_t* frame = bytes.data() + off;
        off += incl_len;

        if (incl_len < kEthernetLen) {
            throw Error(Errc::MalformedCapture, "frame shorter than Ethernet header" + where);
        }
        std::size_t l3 = kEthernetLen;
        std::uint16_t ethertype = be16(frame + 12);
        if (ethertype == 0x8100) {
            if (incl_len < kEthernetLen + 4) {
                throw Error(Errc::MalformedCapture, "truncated VLAN tag" + where);
            }
            ethertype = be16(frame + 16);
            l3 += 4;
        }
        if (ethertype == 0x86dd) {
            throw Error(Errc::UnsupportedCapture, "IPv6 frame" + where);
        }
        if (ethertype != 0x0800) {
            ++result.skipped;
            continue;
        }
        if (incl_len < l3 + 20) throw Error(Errc::MalformedCapture, "truncated IPv4 header" + where);
        const std::uint8_t* ip = frame + l3;
        if ((ip[0] >> 4) != 4) throw Error(Errc::MalformedCapture, "bad IP version" + where);
        const std::size_t ihl = static_cast<std::size_t>(ip[0] & 0x0f) * 4;
        const std::uint16_t ip_total = be16(ip + 2);
        const std::uint16_t frag = be16(ip + 6);
        if (ihl < 20 || ip_total < ihl) {
            throw Error(Errc::MalformedCapture, "bad IPv4 header length" + where);
        }
        if (ip[9] != 6 || (frag & 0x3fff) != 0) {
            ++result.skipped;
            continue;
        }
        if (incl_len < l3 + ihl + 20) {
            throw Error(Errc::MalformedCapture, "truncated TCP header" + where);
        }
        const std::uint8_t* tcp = ip + ihl;
        const std::size_t thl = static_cast<std::size_t>(tcp[12] >> 4) * 4;
        if (thl < 20 || ihl + thl > ip_total) {
            throw Error(Errc::MalformedCapture, "bad TCP header length" + where);
        }

        PacketEvent e;
        e.timestamp_us = static_cast<std::int64_t>(ts_sec) * 1'000'000 +
                         static_cast<std::int64_t>(nano ? ts_frac / 1000 : ts_frac);
        std::copy(ip + 12, ip + 16, e.src.address.begin());
        std::copy(ip + 16, ip + 20, e.dst.address.begin());
        e.src.port = be16(tcp);
        e.dst.port = be16(tcp + 2);
        e.seq = be32(tcp + 4);
        e.ack = be32(tcp + 8);
        const std::uint8_t f = tcp[13];
        TcpFlags flags;
        if (f & 0x01) flags.set(TcpFlags::FIN);
        if (f & 0x02) flags.set(TcpFlags::SYN);
        if (f & 0x04) flags.set(TcpFlags::RST);
        if (f & 0x08) flags.set(TcpFlags::PSH);
        if (f & 0x10) flags.set(TcpFlags::ACK);
        if (f & 0x20) flags.set(TcpFlags::URG);
        e.flags = flags;
        e.ip_header_len = static_cast<std::uint16_t>(ihl);
        e.tcp_header_len = static_cast<std::uint16_t>(thl);
        e.payload_len = static_cast<std::uint32_t>(ip_total - ihl - thl);
        if (!events.empty() && e.timestamp_us < events.back().timestamp_us) {
            throw Error(Errc::MalformedCapture, "frame timestamps go backwards" + where);
        }
        events.push_back(e);
    }
    if (events.empty()) throw Error(Errc::EmptyTrace, "capture contains no IPv4/TCP frames");
    result.trace = Trace(std::move(events), std::move(meta));
    return result;
}

std::vector<std::uint8_t> write_pcap(const Trace& trace) {
    std::vector<std::uint8_t> out;
    put_le32(out, kMagicMicro);
    put_le16(out, 2);
    put_le16(out, 4);
    put_le32(out, 0);
    put_le32(out, 0);
    put_le32(out, 65535);
    put_le32(out, kLinkEthernet);
    for (const auto& e : trace.events()) {
        const std::uint32_t ip_total = e.total_len();
        const std::uint32_t frame_len = static_cast<std::uint32_t>(kEthernetLen) + ip_total;
        put_le32(out, static_cast<std::uint32_t>(e.timestamp_us / 1'000'000));
        put_le32(out, static_cast<std::uint32_t>(e.timestamp_us % 1'000'000));
        put_le32(out, frame_len);
        put_le32(out, frame_len);
        for (int i = 0; i < 12; ++i) out.push_back(0);
        put_be16(out, 0x0800);
        out.push_back(static_cast<std::uint8_t>(0x40 | (e.ip_header_len / 4)));
        out.push_back(0);
        put_be16(out, static_cast<std::uint16_t>(ip_total));
        put_be32(out, 0x00004000);  // id 0, DF
        out.push_back(64);
        out.push_back(6);
        put_be16(out, 0);
        out.insert(out.end(), e.src.address.begin(), e.src.address.end());
        out.insert(out.end(), e.dst.address.begin(), e.dst.address.end());
        out.insert(out.end(), e.ip_header_len - 20u, 0);
        put_be16(out, e.src.port);
        put_be16(out, e.dst.port);
        put_be32(out, e.seq);
        put_be32(out, e.ack);
        out.push_back(static_cast<std::uint8_t>((e.tcp_header_len / 4) << 4));
        std::uint8_t f = 0;
        if (e.flags.has(TcpFlags::FIN)) f |= 0x01;
        if (e.flags.has(TcpFlags::SYN)) f |= 0x02;
        if (e.flags.has(TcpFlags::RST)) f |= 0x04;
        if (e.flags.has(TcpFlags::PSH)) f |= 0x08;
        if (e.flags.has(TcpFlags::ACK)) f |= 0x10;
        if (e.flags.has(TcpFlags::URG)) f |= 0x20;
        out.push_back(f);
        put_be16(out, 65535);
        put_be16(out, 0);
        put_be16(out, 0);
        out.insert(out.end(), e.tcp_header_len - 20u + e.payload_len, 0);
    }
    return out;
}

}  // namespace asnm
