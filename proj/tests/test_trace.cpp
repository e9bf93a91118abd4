#include <doctest.h>

#include <cstdint>
#include <vector>

#include "asnm/error.hpp"
#include "asnm/pcap.hpp"
#include "asnm/rng.hpp"
#include "asnm/trace.hpp"

using namespace asnm;

namespace {

// Builds capture files byte by byte, independently of write_pcap.
struct PcapBuilder {
    std::vector<std::uint8_t> bytes;

    PcapBuilder() {
        le32(0xa1b2c3d4);
        le16(2);
        le16(4);
        le32(0);
        le32(0);
        le32(65535);
        le32(1);  // Ethernet
    }

    void le32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void le16(std::uint16_t v) {
        bytes.push_back(static_cast<std::uint8_t>(v));
        bytes.push_back(static_cast<std::uint8_t>(v >> 8));
    }
    static void be16(std::vector<std::uint8_t>& f, std::uint16_t v) {
        f.push_back(static_cast<std::uint8_t>(v >> 8));
        f.push_back(static_cast<std::uint8_t>(v));
    }
    static void be32(std::vector<std::uint8_t>& f, std::uint32_t v) {
        for (int i = 3; i >= 0; --i) f.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    void record(const std::vector<std::uint8_t>& frame, std::uint32_t sec, std::uint32_t usec) {
        le32(sec);
        le32(usec);
        le32(static_cast<std::uint32_t>(frame.size()));
        le32(static_cast<std::uint32_t>(frame.size()));
        bytes.insert(bytes.end(), frame.begin(), frame.end());
    }

    // Ethernet + IPv4 (20 bytes) + transport header + payload, padded to 60.
    static std::vector<std::uint8_t> frame(std::uint8_t proto, std::uint16_t payload,
                                           std::uint8_t flags = 0x18) {
        std::vector<std::uint8_t> f(12, 0);
        be16(f, 0x0800);
        const std::uint16_t l4 = proto == 6 ? 20 : 8;
        f.push_back(0x45);
        f.push_back(0);
        be16(f, static_cast<std::uint16_t>(20 + l4 + payload));
        be16(f, 1);
        be16(f, 0x4000);
        f.push_back(64);
        f.push_back(proto);
        be16(f, 0);
        for (std::uint8_t b : {10, 0, 0, 1, 10, 0, 0, 2}) f.push_back(b);
        be16(f, 40000);
        be16(f, 80);
        if (proto == 6) {
            be32(f, 1000);
            be32(f, 2000);
            f.push_back(0x50);
            f.push_back(flags);
            be16(f, 8192);
            be16(f, 0);
            be16(f, 0);
        } else {
            be16(f, static_cast<std::uint16_t>(8 + payload));
            be16(f, 0);
        }
        f.insert(f.end(), payload, 0xab);
        while (f.size() < 60) f.push_back(0);
        return f;
    }
};

std::span<const std::uint8_t> view(const PcapBuilder& b) { return b.bytes; }

PacketEvent random_event(Rng& rng, std::int64_t ts) {
    PacketEvent e;
    e.timestamp_us = ts;
    e.src = {{10, static_cast<std::uint8_t>(rng.below(256)), 0, 1},
             static_cast<std::uint16_t>(1024 + rng.below(60000))};
    e.dst = {{192, 168, 1, static_cast<std::uint8_t>(rng.below(256))}, 80};
    e.tcp_header_len = static_cast<std::uint16_t>(20 + 4 * rng.below(11));
    e.payload_len = static_cast<std::uint32_t>(rng.below(1461));
    e.flags = TcpFlags(static_cast<std::uint8_t>(rng.below(64)));
    e.seq = static_cast<std::uint32_t>(rng.next_u64());
    e.ack = static_cast<std::uint32_t>(rng.next_u64());
    e.corrupt = rng.bernoulli(0.1);
    return e;
}

}  // namespace

TEST_CASE("pcap ingest keeps TCP frames and counts the rest as skipped") {
    PcapBuilder b;
    b.record(PcapBuilder::frame(6, 10), 1, 0);
    b.record(PcapBuilder::frame(17, 10), 1, 10);
    b.record(PcapBuilder::frame(6, 100), 1, 20);
    b.record(PcapBuilder::frame(17, 3), 1, 30);
    b.record(PcapBuilder::frame(6, 0, 0x02), 2, 0);
    const auto r = ingest_pcap(view(b));
    CHECK(r.trace.events().size() == 3);
    CHECK(r.skipped == 2);
    CHECK(r.trace.events()[2].timestamp_us == 2'000'000);
    CHECK(r.trace.events()[2].flags == TcpFlags(TcpFlags::SYN));
}

TEST_CASE("payload length comes from header arithmetic on the crafted frames") {
    PcapBuilder b;
    const auto f1 = PcapBuilder::frame(6, 20);
    const auto f2 = PcapBuilder::frame(6, 6);
    REQUIRE(f1.size() == 74);
    REQUIRE(f2.size() == 60);
    b.record(f1, 0, 0);
    b.record(f2, 0, 5);
    const auto r = ingest_pcap(view(b));
    REQUIRE(r.trace.events().size() == 2);
    CHECK(r.trace.events()[0].payload_len == 20);
    CHECK(r.trace.events()[1].payload_len == 6);
    CHECK(r.trace.events()[0].ip_header_len == 20);
    CHECK(r.trace.events()[0].tcp_header_len == 20);
    CHECK(r.trace.events()[0].src.port == 40000);
}

TEST_CASE("truncated last record is malformed") {
    PcapBuilder b;
    b.record(PcapBuilder::frame(6, 20), 0, 0);
    b.record(PcapBuilder::frame(6, 20), 0, 1);
    b.bytes.resize(b.bytes.size() - 7);
    try {
        (void)ingest_pcap(view(b));
        FAIL("expected MalformedCapture");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::MalformedCapture);
    }
}

TEST_CASE("capture errors by category") {
    SUBCASE("bad magic") {
        std::vector<std::uint8_t> junk(40, 0x11);
        try {
            (void)ingest_pcap(junk);
            FAIL("expected error");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::MalformedCapture);
        }
    }
    SUBCASE("no tcp") {
        PcapBuilder b;
        b.record(PcapBuilder::frame(17, 4), 0, 0);
        try {
            (void)ingest_pcap(view(b));
            FAIL("expected error");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::EmptyTrace);
        }
    }
    SUBCASE("pcapng") {
        std::vector<std::uint8_t> ng = {0x0a, 0x0d, 0x0d, 0x0a};
        ng.resize(64, 0);
        try {
            (void)ingest_pcap(ng);
            FAIL("expected error");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::UnsupportedCapture);
        }
    }
}

TEST_CASE("write_pcap output ingests back to the same events") {
    Rng rng(5);
    std::vector<PacketEvent> events;
    for (int i = 0; i < 50; ++i) {
        auto e = random_event(rng, 1000 * i);
        e.corrupt = false;
        events.push_back(e);
    }
    const Trace t(events, {});
    const auto back = ingest_pcap(write_pcap(t));
    CHECK(back.trace.events() == t.events());
    CHECK(back.skipped == 0);
}

TEST_CASE("canonical format round trips") {
    SUBCASE("empty trace is header only") {
        const Trace empty;
        const auto text = write_canonical(empty);
        CHECK(text.rfind(std::string(kCanonicalHeader), 0) == 0);
        CHECK(read_canonical(text) == empty);
    }
    SUBCASE("one event with every field set") {
        PacketEvent e;
        e.timestamp_us = 123456789;
        e.src = {{1, 2, 3, 4}, 5555};
        e.dst = {{5, 6, 7, 8}, 443};
        e.ip_header_len = 24;
        e.tcp_header_len = 32;
        e.payload_len = 1400;
        e.flags = TcpFlags(TcpFlags::ACK | TcpFlags::PSH | TcpFlags::URG);
        e.seq = 4000000000u;
        e.ack = 17;
        e.corrupt = true;
        const Trace t({e}, {{"label", "intrusion"}, {"service", "apache"}});
        CHECK(read_canonical(write_canonical(t)) == t);
    }
    SUBCASE("1000 random events re-serialize byte for byte") {
        Rng rng(99);
        std::vector<PacketEvent> events;
        std::int64_t ts = 0;
        for (int i = 0; i < 1000; ++i) {
            ts += static_cast<std::int64_t>(rng.below(5000));
            events.push_back(random_event(rng, ts));
        }
        const Trace t(events, {{"source", "random"}});
        const auto text = write_canonical(t);
        const auto back = read_canonical(text);
        CHECK(back == t);
        CHECK(write_canonical(back) == text);
    }
}

TEST_CASE("trace invariants are enforced") {
    PacketEvent a;
    a.timestamp_us = 10;
    PacketEvent b = a;
    b.timestamp_us = 5;
    CHECK_THROWS_AS(Trace({a, b}, {}), Error);
    PacketEvent bad = a;
    bad.tcp_header_len = 10;
    CHECK_THROWS_AS(Trace({bad}, {}), Error);
    CHECK_THROWS_AS(read_canonical("not a trace\n"), Error);
}

TEST_CASE("flag text uses the canonical order") {
    CHECK(TcpFlags(TcpFlags::ACK | TcpFlags::SYN).to_string() == "SA");
    CHECK(TcpFlags().to_string() == "-");
    CHECK(TcpFlags::parse("SAFRPU").bits() == 0x3f);
    CHECK(TcpFlags::parse("-") == TcpFlags());
}
