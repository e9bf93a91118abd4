#include "asnm/obfuscation.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "asnm/error.hpp"

namespace asnm {

namespace {

using nlohmann::json;

constexpr std::int64_t kRetransmitUs = 1'000'000;
constexpr std::int64_t kSegmentSpacingUs = 100;

std::int64_t ms_to_us(double ms) { return std::llround(ms * 1000.0); }

std::string_view delay_kind_name(DelayKind k) {
    switch (k) {
        case DelayKind::None: return "none";
        case DelayKind::Constant: return "constant";
        case DelayKind::Normal: return "normal";
    }
    return "none";
}

DelayKind parse_delay_kind(const std::string& s) {
    if (s == "none") return DelayKind::None;
    if (s == "constant") return DelayKind::Constant;
    if (s == "normal") return DelayKind::Normal;
    throw Error(Errc::InvalidSpec, "unknown delay kind '" + s + "'");
}

ObfuscationSpec make(std::string id) {
    ObfuscationSpec s;
    s.id = std::move(id);
    return s;
}

std::vector<ObfuscationSpec> build_catalog() {
    std::vector<ObfuscationSpec> c;
    auto constant = [](double ms) { return DelayModel{DelayKind::Constant, ms, 0.0, 0.0}; };
    auto normal = [](double mu, double sigma, double corr) {
        return DelayModel{DelayKind::Normal, mu, sigma, corr};
    };

    auto a = make("a"); a.delay = constant(1000); c.push_back(a);
    auto b = make("b"); b.delay = constant(8000); c.push_back(b);
    auto cc = make("c"); cc.delay = normal(5000, 2500, 0.25); c.push_back(cc);
    auto d = make("d"); d.loss_p = 0.25; c.push_back(d);
    auto e = make("e"); e.corrupt_p = 0.25; c.push_back(e);
    auto f = make("f"); f.corrupt_p = 0.35; c.push_back(f);
    auto g = make("g"); g.corrupt_p = 0.35; g.corrupt_corr = 0.25; c.push_back(g);
    auto h = make("h"); h.dup_p = 0.05; c.push_back(h);
    auto i = make("i"); i.reorder_p = 0.25; i.reorder_gap_ms = 10; i.reorder_corr = 0.5; c.push_back(i);
    auto j = make("j"); j.reorder_p = 0.50; j.reorder_gap_ms = 10; j.reorder_corr = 0.5; c.push_back(j);
    auto k = make("k"); k.mtu = 1000; c.push_back(k);
    auto l = make("l"); l.mtu = 750; c.push_back(l);
    auto m = make("m"); m.mtu = 500; c.push_back(m);
    auto n = make("n"); n.mtu = 250; c.push_back(n);

    auto o = make("o");
    o.delay = normal(10, 20, 0.25);
    o.loss_p = o.corrupt_p = o.reorder_p = 0.23;
    o.reorder_gap_ms = 10;
    c.push_back(o);

    auto p = make("p");
    p.delay = normal(7750, 150, 0.25);
    p.loss_p = p.corrupt_p = p.dup_p = p.reorder_p = 0.001;
    p.reorder_gap_ms = 10;
    c.push_back(p);

    auto q = make("q");
    q.delay = normal(6800, 150, 0.25);
    q.loss_p = q.corrupt_p = q.dup_p = q.reorder_p = 0.01;
    q.reorder_gap_ms = 10;
    c.push_back(q);
    return c;
}

void check_fraction(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(Errc::InvalidSpec, std::string(name) + " must be in [0,1]");
    }
}

json to_json_obj(const ObfuscationSpec& s) {
    json j;
    j["id"] = s.id;
    j["delay"] = {{"kind", delay_kind_name(s.delay.kind)},
                  {"base_ms", s.delay.base_ms},
                  {"sigma_ms", s.delay.sigma_ms},
                  {"correlation", s.delay.correlation}};
    j["loss_p"] = s.loss_p;
    j["corrupt_p"] = s.corrupt_p;
    j["dup_p"] = s.dup_p;
    j["reorder_p"] = s.reorder_p;
    j["loss_corr"] = s.loss_corr;
    j["corrupt_corr"] = s.corrupt_corr;
    j["reorder_corr"] = s.reorder_corr;
    j["reorder_gap_ms"] = s.reorder_gap_ms;
    j["mtu"] = s.mtu ? json(*s.mtu) : json(nullptr);
    return j;
}

ObfuscationSpec from_json_obj(const json& j) {
    static const std::vector<std::string> known = {
        "id", "delay", "loss_p", "corrupt_p", "dup_p", "reorder_p", "loss_corr",
        "corrupt_corr", "reorder_corr", "reorder_gap_ms", "mtu"};
    if (!j.is_object()) throw Error(Errc::InvalidSpec, "spec must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw Error(Errc::InvalidSpec, "unknown field '" + key + "'");
        }
    }
    ObfuscationSpec s;
    try {
        s.id = j.at("id").get<std::string>();
        if (j.contains("delay")) {
            const auto& d = j.at("delay");
            for (const auto& [key, _] : d.items()) {
                if (key != "kind" && key != "base_ms" && key != "sigma_ms" && key != "correlation") {
                    throw Error(Errc::InvalidSpec, "unknown delay field '" + key + "'");
                }
            }
            s.delay.kind = parse_delay_kind(d.value("kind", std::string("none")));
            s.delay.base_ms = d.value("base_ms", 0.0);
            s.delay.sigma_ms = d.value("sigma_ms", 0.0);
            s.delay.correlation = d.value("correlation", 0.0);
        }
        s.loss_p = j.value("loss_p", 0.0);
        s.corrupt_p = j.value("corrupt_p", 0.0);
        s.dup_p = j.value("dup_p", 0.0);
        s.reorder_p = j.value("reorder_p", 0.0);
        s.loss_corr = j.value("loss_corr", 0.0);
        s.corrupt_corr = j.value("corrupt_corr", 0.0);
        s.reorder_corr = j.value("reorder_corr", 0.0);
        s.reorder_gap_ms = j.value("reorder_gap_ms", 0.0);
        if (j.contains("mtu") && !j.at("mtu").is_null()) s.mtu = j.at("mtu").get<std::uint32_t>();
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidSpec, e.what());
    }
    s.validate();
    return s;
}

struct Emitted {
    std::int64_t ts;
    PacketEvent event;
};

void split_for_mtu(const PacketEvent& e, std::uint32_t mtu, std::vector<PacketEvent>& out) {
    if (e.total_len() <= mtu) {
        out.push_back(e);
        return;
    }
    const std::uint32_t headers = static_cast<std::uint32_t>(e.ip_header_len) + e.tcp_header_len;
    if (mtu <= headers) {
        throw Error(Errc::InfeasibleSpec, "MTU " + std::to_string(mtu) +
                                              " cannot carry " + std::to_string(headers) +
                                              " header bytes");
    }
    const std::uint32_t chunk = mtu - headers;
    const std::uint32_t segments = (e.payload_len + chunk - 1) / chunk;
    std::uint32_t remaining = e.payload_len;
    std::uint32_t seq = e.seq;
    for (std::uint32_t s = 0; s < segments; ++s) {
        PacketEvent seg = e;
        seg.payload_len = std::min(chunk, remaining);
        seg.seq = seq;
        seg.timestamp_us = e.timestamp_us + static_cast<std::int64_t>(s) * kSegmentSpacingUs;
        if (s > 0) {
            seg.flags.clear(TcpFlags::SYN);
            seg.flags.clear(TcpFlags::PSH);
        }
        if (s + 1 < segments) {
            seg.flags.clear(TcpFlags::FIN);
            seg.flags.clear(TcpFlags::RST);
        }
        seq += seg.payload_len;
        remaining -= seg.payload_len;
        out.push_back(seg);
    }
}

bool retransmitted_when_lost(const PacketEvent& e) {
    return e.payload_len > 0 || e.flags.has(TcpFlags::SYN);
}

}  // namespace

void ObfuscationSpec::validate() const {
    if (id.empty() || id == "direct" ||
        !std::all_of(id.begin(), id.end(), [](char c) {
            return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
        })) {
        throw Error(Errc::InvalidSpec, "bad obfuscation id '" + id + "'");
    }
    check_fraction(loss_p, "loss_p");
    check_fraction(corrupt_p, "corrupt_p");
    check_fraction(dup_p, "dup_p");
    check_fraction(reorder_p, "reorder_p");
    check_fraction(loss_corr, "loss_corr");
    check_fraction(corrupt_corr, "corrupt_corr");
    check_fraction(reorder_corr, "reorder_corr");
    check_fraction(delay.correlation, "delay.correlation");
    if (delay.kind != DelayKind::Normal && delay.sigma_ms != 0.0) {
        throw Error(Errc::InvalidSpec, "sigma_ms must be 0 unless the delay is normal");
    }
    if (!(delay.base_ms >= 0.0) || !(delay.sigma_ms >= 0.0) || !(reorder_gap_ms >= 0.0)) {
        throw Error(Errc::InvalidSpec, "delays must be non-negative");
    }
    if (mtu && *mtu < 68) throw Error(Errc::InvalidSpec, "mtu must be >= 68");
}

std::string spec_to_json(const ObfuscationSpec& spec) { return to_json_obj(spec).dump(2); }

std::vector<ObfuscationSpec> specs_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidSpec, e.what());
    }
    std::vector<ObfuscationSpec> out;
    if (j.is_array()) {
        for (const auto& item : j) out.push_back(from_json_obj(item));
    } else {
        out.push_back(from_json_obj(j));
    }
    return out;
}

CorrelatedRng::CorrelatedRng(std::uint64_t seed) : rng_(seed) { last_ = rng_.uniform(); }

double CorrelatedRng::next(double rho) {
    const double u = rng_.uniform();
    last_ = rho * last_ + (1.0 - rho) * u;
    return last_;
}

bool CorrelatedRng::chance(double p, double rho) {
    const bool reuse = has_u_ && rho > 0.0 && rng_.uniform() < rho;
    const double u = reuse ? last_u_ : rng_.uniform();
    last_u_ = u;
    has_u_ = true;
    return u < p;
}

double CorrelatedRng::normal(double rho) {
    const double e = rng_.normal();
    last_z_ = has_z_ ? rho * last_z_ + std::sqrt(1.0 - rho * rho) * e : e;
    has_z_ = true;
    return last_z_;
}

const std::vector<ObfuscationSpec>& catalog() {
    static const std::vector<ObfuscationSpec> specs = build_catalog();
    return specs;
}

const ObfuscationSpec& catalog_spec(std::string_view id) {
    for (const auto& s : catalog()) {
        if (s.id == id) return s;
    }
    throw Error(Errc::InvalidObfuscationId, "unknown obfuscation id '" + std::string(id) + "'");
}

const std::vector<std::string>& technique_groups() {
    static const std::vector<std::string> groups = {"a,b,c", "d",     "e,f,g",  "h",
                                                    "i,j",   "k,l,m,n", "o,p,q"};
    return groups;
}

std::string technique_of(std::string_view id) {
    for (const auto& g : technique_groups()) {
        for (std::size_t i = 0; i < g.size(); i += 2) {
            if (id.size() == 1 && g[i] == id[0]) return g;
        }
    }
    throw Error(Errc::InvalidObfuscationId, "no technique group for '" + std::string(id) + "'");
}

Trace apply(const ObfuscationSpec& spec, const Trace& trace, std::uint64_t seed,
            Directions directions) {
    spec.validate();

    // Client of each endpoint pair, decided the same way as flow assembly.
    std::map<std::pair<Endpoint, Endpoint>, Endpoint> client_of;
    for (const auto& e : trace.events()) {
        const auto key = std::minmax(e.src, e.dst);
        if (client_of.count(key)) continue;
        const bool syn_ack = e.flags.has(TcpFlags::SYN) && e.flags.has(TcpFlags::ACK);
        client_of.emplace(key, syn_ack ? e.dst : e.src);
    }

    CorrelatedRng loss_rng(derive_seed(seed, 1));
    CorrelatedRng corrupt_rng(derive_seed(seed, 2));
    CorrelatedRng dup_rng(derive_seed(seed, 3));
    CorrelatedRng delay_rng(derive_seed(seed, 4));
    CorrelatedRng reorder_rng(derive_seed(seed, 5));

    const std::int64_t gap_us = ms_to_us(spec.reorder_gap_ms);
    std::vector<Emitted> out;
    out.reserve(trace.events().size() + trace.events().size() / 4);
    std::vector<PacketEvent> batch;
    std::vector<PacketEvent> expanded;

    for (const auto& original : trace.events()) {
        // Only delay is direction-limited; the other operators see every event.
        const bool delayed = directions == Directions::Both ||
                             client_of.at(std::minmax(original.src, original.dst)) == original.src;
        batch.clear();
        if (spec.loss_p > 0.0 && loss_rng.chance(spec.loss_p, spec.loss_corr)) {
            if (retransmitted_when_lost(original)) {
                PacketEvent retry = original;
                retry.timestamp_us += kRetransmitUs;
                batch.push_back(retry);
            }
        } else if (spec.corrupt_p > 0.0 && corrupt_rng.chance(spec.corrupt_p, spec.corrupt_corr)) {
            PacketEvent damaged = original;
            damaged.corrupt = true;
            batch.push_back(damaged);
            if (retransmitted_when_lost(original)) {
                PacketEvent retry = original;
                retry.timestamp_us += kRetransmitUs;
                batch.push_back(retry);
            }
        } else {
            batch.push_back(original);
        }

        if (spec.dup_p > 0.0) {
            const std::size_t n = batch.size();
            for (std::size_t i = 0; i < n; ++i) {
                if (dup_rng.chance(spec.dup_p, 0.0)) batch.push_back(batch[i]);
            }
        }

        expanded.clear();
        for (const auto& e : batch) {
            if (spec.mtu) {
                split_for_mtu(e, *spec.mtu, expanded);
            } else {
                expanded.push_back(e);
            }
        }

        for (auto& e : expanded) {
            std::int64_t delay_us = 0;
            switch (delayed ? spec.delay.kind : DelayKind::None) {
                case DelayKind::None: break;
                case DelayKind::Constant: delay_us = ms_to_us(spec.delay.base_ms); break;
                case DelayKind::Normal: {
                    const double ms = spec.delay.base_ms +
                                      spec.delay.sigma_ms * delay_rng.normal(spec.delay.correlation);
                    delay_us = ms_to_us(std::max(0.0, ms));
                    break;
                }
            }
            // Packets picked for reordering jump the queue: no delay, no gap.
            const bool jumps = spec.reorder_p > 0.0 &&
                               reorder_rng.chance(spec.reorder_p, spec.reorder_corr);
            if (!jumps) e.timestamp_us += delay_us + gap_us;
            out.push_back({e.timestamp_us, e});
        }
    }

    std::stable_sort(out.begin(), out.end(),
                     [](const Emitted& x, const Emitted& y) { return x.ts < y.ts; });
    std::vector<PacketEvent> events;
    events.reserve(out.size());
    for (auto& item : out) events.push_back(item.event);

    TraceMeta meta = trace.meta();
    meta[std::string(meta_key::obfuscation)] = spec.id;
    meta[std::string(meta_key::obfuscation_seed)] = std::to_string(seed);
    return Trace(std::move(events), std::move(meta));
}

std::uint64_t catalog_seed(std::uint64_t seed, std::string_view id) { return seed ^ fnv1a64(id); }

CatalogResult apply_catalog(const Trace& trace, std::uint64_t seed, Directions directions) {
    CatalogResult result;
    result.traces.emplace("direct", trace);
    for (const auto& spec : catalog()) {
        try {
            result.traces.emplace(spec.id, apply(spec, trace, catalog_seed(seed, spec.id), directions));
        } catch (const Error& e) {
            if (e.code() != Errc::InfeasibleSpec) throw;
            result.failures.emplace(spec.id, e.what());
        }
    }
    return result;
}

}  // namespace asnm
