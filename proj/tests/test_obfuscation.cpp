#include <doctest.h>

#include <algorithm>
#include <set>

#include "asnm/error.hpp"
#include "asnm/obfuscation.hpp"
#include "support.hpp"

using namespace asnm;
using namespace support;

TEST_CASE("catalog rows") {
    const auto& c = catalog();
    REQUIRE(c.size() == 17);
    CHECK(c[0].id == "a");
    CHECK(c[0].delay.kind == DelayKind::Constant);
    CHECK(c[0].delay.base_ms == 1000);
    CHECK(c[0].loss_p == 0);
    CHECK(c[0].corrupt_p == 0);
    CHECK(c[0].dup_p == 0);
    CHECK(c[0].reorder_p == 0);
    CHECK(c[3].id == "d");
    CHECK(c[3].loss_p == 0.25);
    CHECK(c[16].id == "q");
    CHECK(c[16].delay.kind == DelayKind::Normal);
    CHECK(c[16].delay.base_ms == 6800);
    CHECK(c[16].delay.sigma_ms == 150);
    CHECK(c[16].delay.correlation == 0.25);
    CHECK(c[16].loss_p == 0.01);
    CHECK(c[16].corrupt_p == 0.01);
    CHECK(c[16].dup_p == 0.01);
    CHECK(c[16].reorder_p == 0.01);
    for (const char* id : {"k", "l", "m", "n"}) CHECK(catalog_spec(id).mtu.has_value());
    CHECK(catalog_spec("n").mtu == 250u);
}

TEST_CASE("technique groups") {
    CHECK(technique_groups().size() == 7);
    CHECK(technique_of("a") == "a,b,c");
    CHECK(technique_of("m") == "k,l,m,n");
    CHECK(technique_of("d") == "d");
    try {
        (void)catalog_spec("z");
        FAIL("expected InvalidObfuscationId");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::InvalidObfuscationId);
    }
}

TEST_CASE("constant delay shifts every timestamp") {
    std::vector<PacketEvent> events;
    for (int i = 0; i < 5; ++i) {
        PacketEvent e;
        e.timestamp_us = i * 10;
        e.src = kClient;
        e.dst = kServer;
        events.push_back(e);
    }
    const Trace t(events, {});
    const auto out = apply(catalog_spec("a"), t, 1, Directions::Both);
    REQUIRE(out.events().size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(out.events()[i].timestamp_us == t.events()[i].timestamp_us + 1'000'000);
    }
    CHECK(out.meta_or("obfuscation") == "a");
}

TEST_CASE("delay honours the direction selector") {
    const auto t = bulk_trace(40, 3);
    const auto out = apply(catalog_spec("a"), t, 1, Directions::ClientToServer);
    const auto f = fate_of(t, out);
    CHECK(f.survived == 10);  // the server-side events
}

TEST_CASE("loss drops about a quarter and retransmits each dropped payload event") {
    const auto t = bulk_trace(1001, 17);
    const auto out = apply(catalog_spec("d"), t, 42);
    const auto f = fate_of(t, out);
    const double dropped = 1.0 - static_cast<double>(f.survived) / static_cast<double>(f.originals);
    CHECK(dropped >= 0.22);
    CHECK(dropped <= 0.28);
    CHECK(f.retransmits == f.originals - f.survived);
    CHECK(out.events().size() == t.events().size());
}

TEST_CASE("corruption keeps the damaged copy and adds a retransmit") {
    const auto t = bulk_trace(2000, 4);
    const auto out = apply(catalog_spec("e"), t, 8);
    std::size_t corrupt = 0;
    for (const auto& e : out.events()) corrupt += e.corrupt;
    const auto f = fate_of(t, out);
    CHECK(f.retransmits == corrupt);
    CHECK(out.events().size() == t.events().size() + corrupt);
    CHECK(static_cast<double>(corrupt) / 2000.0 == doctest::Approx(0.25).epsilon(0.12));
}

TEST_CASE("duplication adds about five percent") {
    const auto t = bulk_trace(10000, 5);
    const auto out = apply(catalog_spec("h"), t, 9);
    const double dup = static_cast<double>(fate_of(t, out).extra) / 10000.0;
    CHECK(dup >= 0.04);
    CHECK(dup <= 0.06);
}

TEST_CASE("reorder leaves the selected fraction unshifted") {
    const auto t = bulk_trace(10000, 6);
    const auto out = apply(catalog_spec("i"), t, 10);
    const auto f = fate_of(t, out);
    const double unshifted = static_cast<double>(f.survived) / 10000.0;
    CHECK(unshifted >= 0.22);
    CHECK(unshifted <= 0.28);
    CHECK(out.events().size() == 10000);
}

TEST_CASE("MTU splitting") {
    SUBCASE("1460-byte payload at MTU 250 gives 7 segments") {
        PacketEvent e;
        e.src = kClient;
        e.dst = kServer;
        e.payload_len = 1460;
        e.flags = TcpFlags(TcpFlags::ACK | TcpFlags::PSH | TcpFlags::FIN);
        const auto out = apply(catalog_spec("n"), Trace({e}, {}), 1);
        REQUIRE(out.events().size() == 7);
        std::uint32_t sum = 0;
        for (const auto& s : out.events()) {
            CHECK(s.payload_len <= 210);
            CHECK(s.total_len() <= 250);
            sum += s.payload_len;
        }
        CHECK(sum == 1460);
        CHECK(out.events().back().flags.has(TcpFlags::FIN));
        CHECK_FALSE(out.events().front().flags.has(TcpFlags::FIN));
    }
    SUBCASE("headers that do not fit are infeasible") {
        PacketEvent e;
        e.src = kClient;
        e.dst = kServer;
        e.ip_header_len = 60;
        e.tcp_header_len = 60;
        e.payload_len = 400;
        ObfuscationSpec s;
        s.id = "tiny";
        s.mtu = 100;
        try {
            (void)apply(s, Trace({e}, {}), 1);
            FAIL("expected InfeasibleSpec");
        } catch (const Error& err) {
            CHECK(err.code() == Errc::InfeasibleSpec);
        }
    }
}

TEST_CASE("MTU operators conserve payload per direction") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto t = random_trace(seed);
        for (const char* id : {"k", "l", "m", "n"}) {
            const auto out = apply(catalog_spec(id), t, seed);
            CHECK(payload_by_direction(out) == payload_by_direction(t));
            const auto mtu = *catalog_spec(id).mtu;
            CHECK(std::all_of(out.events().begin(), out.events().end(),
                              [&](const PacketEvent& e) { return e.total_len() <= mtu; }));
        }
    }
}

TEST_CASE("apply_catalog covers every id plus the direct copy") {
    const auto t = random_trace(7);
    const auto r = apply_catalog(t, 11);
    CHECK(r.failures.empty());
    CHECK(r.traces.size() == 18);
    CHECK(r.traces.at("direct") == t);
    for (const auto& s : catalog()) CHECK(r.traces.count(s.id) == 1);
}

TEST_CASE("apply is a pure function of its arguments") {
    const auto t = random_trace(3);
    for (const auto& s : catalog()) {
        CHECK(apply(s, t, 99) == apply(s, t, 99));
    }
    CHECK_FALSE(apply(catalog_spec("o"), t, 1) == apply(catalog_spec("o"), t, 2));
}

TEST_CASE("correlated stream") {
    SUBCASE("decisions keep the marginal and reach the lag-1 correlation") {
        CorrelatedRng rng(123);
        std::vector<double> x;
        for (int i = 0; i < 100000; ++i) x.push_back(rng.chance(0.25, 0.5) ? 1.0 : 0.0);
        double mean = 0;
        for (double v : x) mean += v;
        CHECK(mean / 1e5 == doctest::Approx(0.25).epsilon(0.04));
        CHECK(lag1_autocorrelation(x) == doctest::Approx(0.5).epsilon(0.1));
    }
    SUBCASE("smoothed uniform has lag-1 correlation rho") {
        CorrelatedRng rng(7);
        std::vector<double> x;
        for (int i = 0; i < 100000; ++i) x.push_back(rng.next(0.5));
        CHECK(lag1_autocorrelation(x) == doctest::Approx(0.5).epsilon(0.1));
    }
    SUBCASE("rho 0 is uncorrelated") {
        CorrelatedRng rng(9);
        std::vector<double> x;
        for (int i = 0; i < 100000; ++i) x.push_back(rng.chance(0.3, 0.0) ? 1.0 : 0.0);
        CHECK(std::abs(lag1_autocorrelation(x)) < 0.02);
    }
}

TEST_CASE("spec documents") {
    const auto specs = specs_from_json(spec_to_json(catalog_spec("q")));
    REQUIRE(specs.size() == 1);
    CHECK(specs[0] == catalog_spec("q"));
    CHECK_THROWS_AS(specs_from_json(R"({"id":"x","loss_p":2})"), Error);
    CHECK_THROWS_AS(specs_from_json(R"({"id":"x","bogus":1})"), Error);
    const auto two = specs_from_json(R"([{"id":"x","dup_p":0.1},{"id":"y","mtu":600}])");
    CHECK(two.size() == 2);
    CHECK(two[1].mtu == 600u);
}
