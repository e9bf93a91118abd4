#include "asnm/synthgen.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "asnm/error.hpp"
#include "asnm/flow.hpp"
#include "asnm/rng.hpp"

namespace asnm {

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(Errc::InvalidConfig, what); }

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) invalid(std::string(name) + " must be > 0");
}

void require_rate(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) invalid(std::string(name) + " must be in [0, 1]");
}

}  // namespace

void ClassGenerator::validate() const {
    require_positive(packets_median, "packets_median");
    if (!(packets_spread >= 0.0)) invalid("packets_spread must be >= 0");
    require_rate(out_fraction, "out_fraction");
    require_positive(out_size_mean, "out_size_mean");
    require_positive(out_size_sigma, "out_size_sigma");
    require_positive(in_size_mean, "in_size_mean");
    require_positive(in_size_sigma, "in_size_sigma");
    require_positive(iat_ms_mean, "iat_ms_mean");
    require_positive(response_ms, "response_ms");
    require_rate(psh_rate, "psh_rate");
    require_rate(fin_rate, "fin_rate");
    require_rate(urg_rate, "urg_rate");
    require_rate(tcp_options_rate, "tcp_options_rate");
    if (session_median < 1) invalid("session_median must be >= 1");
    require_positive(session_gap_ms, "session_gap_ms");
}

void ScenarioSpec::validate() const {
    legitimate.validate();
    attack.validate();
    dictionary.validate();
    if (!(exploit_jitter >= 0.0 && exploit_jitter < 1.0)) invalid("exploit_jitter must be in [0, 1)");
    if (services.size() > 250) invalid("at most 250 services");
    for (const auto& s : services) {
        if (s.name.empty()) invalid("service name must not be empty");
        require_positive(s.size_scale, "size_scale");
        for (const auto& a : s.attacks) {
            if (a.exploit.empty() || a.exploit == "dictionary") invalid("bad exploit name");
        }
    }
}

ScenarioSpec ScenarioSpec::standard(std::uint64_t seed) {
    ScenarioSpec s;
    s.seed = seed;

    auto& l = s.legitimate;
    l.packets_median = 14;
    l.packets_spread = 0.8;
    l.packets_min = 2;
    l.out_fraction = 0.4;
    l.out_size_mean = 260;
    l.out_size_sigma = 180;
    l.in_size_mean = 1000;
    l.in_size_sigma = 350;
    l.iat_ms_mean = 60;
    l.response_ms = 8;
    l.psh_rate = 0.5;
    l.fin_rate = 0.95;
    l.tcp_options_rate = 0.8;
    l.session_median = 2;
    l.session_gap_ms = 4000;

    auto& a = s.attack;
    a.packets_median = 18;
    a.packets_spread = 0.15;
    a.packets_min = 6;
    a.out_fraction = 0.6;
    a.out_size_mean = 1200;
    a.out_size_sigma = 150;
    a.in_size_mean = 300;
    a.in_size_sigma = 80;
    a.iat_ms_mean = 25;
    a.response_ms = 2;
    a.psh_rate = 0.9;
    a.fin_rate = 0.95;
    a.tcp_options_rate = 0.8;
    a.session_median = 1;
    a.session_gap_ms = 1000;

    auto& d = s.dictionary;
    d.packets_median = 4;
    d.packets_spread = 0.2;
    d.packets_min = 2;
    d.out_fraction = 0.5;
    d.out_size_mean = 60;
    d.out_size_sigma = 15;
    d.in_size_mean = 80;
    d.in_size_sigma = 20;
    d.iat_ms_mean = 3;
    d.response_ms = 2;
    d.psh_rate = 1.0;
    d.fin_rate = 1.0;
    d.tcp_options_rate = 0.8;
    d.session_median = 8;
    d.session_gap_ms = 400;

    s.exploit_jitter = 0.1;
    // Per-service proportions of a typical small capture, scaled down tenfold.
    s.services = {
        {"apache", 8080, 57, 3, 1.4, {{"tomcat-manager-upload", 6}}},
        {"distcc", 3632, 10, 0, 0.6, {{"distcc-exec", 1}}},
        {"mssql", 1433, 37, 2, 0.8, {{"mssql-xp-cmdshell", 3}}},
        {"postgresql", 5432, 58, 2, 0.9, {{"postgres-udf-payload", 1}}},
        {"samba", 445, 464, 0, 1.0, {{"samba-usermap-script", 2}}},
        {"server", 139, 334, 0, 1.1, {{"ms08-067-netapi", 3}}},
        {"other", 443, 65, 0, 1.2, {}},
    };
    return s;
}

// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

template <class T>
void opt(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

ClassGenerator class_from(const json& j, ClassGenerator g) {
    static const char* known[] = {"packets_median", "packets_spread", "packets_min", "out_fraction",
                                  "out_size_mean", "out_size_sigma", "in_size_mean", "in_size_sigma",
                                  "iat_ms_mean", "response_ms", "handshake", "endshake", "psh_rate",
                                  "fin_rate", "urg_rate", "tcp_options_rate", "session_median",
                                  "session_gap_ms"};
    for (const auto& [k, v] : j.items()) {
        if (std::none_of(std::begin(known), std::end(known), [&](const char* n) { return k == n; })) {
            invalid("unknown generator field '" + k + "'");
        }
    }
    opt(j, "packets_median", g.packets_median);
    opt(j, "packets_spread", g.packets_spread);
    opt(j, "packets_min", g.packets_min);
    opt(j, "out_fraction", g.out_fraction);
    opt(j, "out_size_mean", g.out_size_mean);
    opt(j, "out_size_sigma", g.out_size_sigma);
    opt(j, "in_size_mean", g.in_size_mean);
    opt(j, "in_size_sigma", g.in_size_sigma);
    opt(j, "iat_ms_mean", g.iat_ms_mean);
    opt(j, "response_ms", g.response_ms);
    opt(j, "handshake", g.handshake);
    opt(j, "endshake", g.endshake);
    opt(j, "psh_rate", g.psh_rate);
    opt(j, "fin_rate", g.fin_rate);
    opt(j, "urg_rate", g.urg_rate);
    opt(j, "tcp_options_rate", g.tcp_options_rate);
    opt(j, "session_median", g.session_median);
    opt(j, "session_gap_ms", g.session_gap_ms);
    return g;
}

json class_to(const ClassGenerator& g) {
    return {{"packets_median", g.packets_median}, {"packets_spread", g.packets_spread},
            {"packets_min", g.packets_min},       {"out_fraction", g.out_fraction},
            {"out_size_mean", g.out_size_mean},   {"out_size_sigma", g.out_size_sigma},
            {"in_size_mean", g.in_size_mean},     {"in_size_sigma", g.in_size_sigma},
            {"iat_ms_mean", g.iat_ms_mean},       {"response_ms", g.response_ms},
            {"handshake", g.handshake},           {"endshake", g.endshake},
            {"psh_rate", g.psh_rate},             {"fin_rate", g.fin_rate},
            {"urg_rate", g.urg_rate},             {"tcp_options_rate", g.tcp_options_rate},
            {"session_median", g.session_median}, {"session_gap_ms", g.session_gap_ms}};
}

}  // namespace

ScenarioSpec scenario_from_json(std::string_view text) {
    try {
        const json j = json::parse(text);
        if (!j.is_object()) invalid("scenario must be a JSON object");
        ScenarioSpec base = j.contains("seed") ? ScenarioSpec::standard(j.at("seed").get<std::uint64_t>())
                                               : ScenarioSpec::standard(1);
        for (const auto& [k, v] : j.items()) {
            if (k != "seed" && k != "legitimate" && k != "attack" && k != "dictionary" &&
                k != "exploit_jitter" && k != "services") {
                invalid("unknown scenario field '" + k + "'");
            }
        }
        if (j.contains("legitimate")) base.legitimate = class_from(j.at("legitimate"), base.legitimate);
        if (j.contains("attack")) base.attack = class_from(j.at("attack"), base.attack);
        if (j.contains("dictionary")) base.dictionary = class_from(j.at("dictionary"), base.dictionary);
        opt(j, "exploit_jitter", base.exploit_jitter);
        if (j.contains("services")) {
            base.services.clear();
            for (const auto& sj : j.at("services")) {
                ServiceSpec s;
                s.name = sj.at("name").get<std::string>();
                opt(sj, "port", s.port);
                opt(sj, "legitimate", s.legitimate);
                opt(sj, "dictionary", s.dictionary);
                opt(sj, "size_scale", s.size_scale);
                if (sj.contains("attacks")) {
                    for (const auto& aj : sj.at("attacks")) {
                        s.attacks.push_back({aj.at("exploit").get<std::string>(),
                                             aj.value("count", std::uint32_t{1})});
                    }
                }
                base.services.push_back(std::move(s));
            }
        }
        base.validate();
        return base;
    } catch (const json::exception& e) {
        invalid(std::string("scenario: ") + e.what());
    }
}

std::string scenario_to_json(const ScenarioSpec& spec) {
    json services = json::array();
    for (const auto& s : spec.services) {
        json attacks = json::array();
        for (const auto& a : s.attacks) attacks.push_back({{"exploit", a.exploit}, {"count", a.count}});
        services.push_back({{"name", s.name},
                            {"port", s.port},
                            {"legitimate", s.legitimate},
                            {"dictionary", s.dictionary},
                            {"size_scale", s.size_scale},
                            {"attacks", attacks}});
    }
    json j = {{"seed", spec.seed},
              {"legitimate", class_to(spec.legitimate)},
              {"attack", class_to(spec.attack)},
              {"dictionary", class_to(spec.dictionary)},
              {"exploit_jitter", spec.exploit_jitter},
              {"services", services}};
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::int64_t kEpochUs = 1'500'000'000'000'000;
constexpr std::int64_t kTraceSpacingUs = 3'600'000'000;  // one hour per trace
constexpr std::uint32_t kMaxPayload = 1448;

std::int64_t ms_to_us(double ms) { return std::max<std::int64_t>(1, std::llround(ms * 1000.0)); }

class ConnectionWriter {
public:
    ConnectionWriter(Endpoint client, Endpoint server, std::uint16_t tcp_hdr, Rng& rng,
                     std::vector<PacketEvent>& out)
        : client_(client), server_(server), tcp_hdr_(tcp_hdr), out_(out) {
        seq_c_ = static_cast<std::uint32_t>(rng.next_u64());
        seq_s_ = static_cast<std::uint32_t>(rng.next_u64());
    }

    void emit(std::int64_t t, bool from_client, std::uint32_t payload, TcpFlags flags,
              std::uint16_t hdr = 0) {
        PacketEvent e;
        e.timestamp_us = t;
        e.src = from_client ? client_ : server_;
        e.dst = from_client ? server_ : client_;
        e.ip_header_len = 20;
        e.tcp_header_len = hdr ? hdr : tcp_hdr_;
        e.payload_len = payload;
        e.flags = flags;
        auto& seq = from_client ? seq_c_ : seq_s_;
        auto& peer = from_client ? seq_s_ : seq_c_;
        e.seq = seq;
        e.ack = flags.has(TcpFlags::ACK) ? peer : 0;
        seq += payload + (flags.has(TcpFlags::SYN) ? 1 : 0) + (flags.has(TcpFlags::FIN) ? 1 : 0);
        out_.push_back(e);
    }

private:
    Endpoint client_, server_;
    std::uint16_t tcp_hdr_;
    std::uint32_t seq_c_ = 0, seq_s_ = 0;
    std::vector<PacketEvent>& out_;
};

std::uint32_t draw_size(Rng& rng, double mean, double sigma) {
    const double v = std::round(rng.normal(mean, sigma));
    return static_cast<std::uint32_t>(std::clamp(v, 1.0, static_cast<double>(kMaxPayload)));
}

double exponential(Rng& rng, double mean) {
    double u = rng.uniform();
    while (u <= 0.0) u = rng.uniform();
    return -mean * std::log(u);
}

/// Writes one connection starting at `t`; returns the time of its last packet.
std::int64_t write_connection(const ClassGenerator& g, Endpoint client, Endpoint server,
                              std::int64_t t, Rng& rng, std::vector<PacketEvent>& out) {
    const bool options = rng.bernoulli(g.tcp_options_rate);
    const std::uint16_t hdr = options ? 32 : 20;
    ConnectionWriter w(client, server, hdr, rng, out);
    const double rtt_ms = rng.uniform(0.2, 2.0);
    using F = TcpFlags;

    if (g.handshake) {
        w.emit(t, true, 0, F::SYN, options ? 40 : 24);
        t += ms_to_us(rtt_ms / 2);
        w.emit(t, false, 0, F::SYN | F::ACK, options ? 40 : 24);
        t += ms_to_us(rtt_ms / 2);
        w.emit(t, true, 0, F::ACK);
    }

    const double n_real = g.packets_median * std::exp(g.packets_spread * rng.normal());
    const auto n = std::max<std::uint32_t>(g.packets_min, static_cast<std::uint32_t>(std::lround(n_real)));
    bool server_spoke = false;
    for (std::uint32_t k = 0; k < n; ++k) {
        const bool from_client = k == 0 || !rng.bernoulli(1.0 - g.out_fraction);
        if (k > 0) {
            const double gap = !from_client && !server_spoke ? g.response_ms : exponential(rng, g.iat_ms_mean);
            t += ms_to_us(gap);
        } else if (g.handshake) {
            t += ms_to_us(rtt_ms / 4);
        }
        server_spoke = server_spoke || !from_client;
        const auto size = from_client ? draw_size(rng, g.out_size_mean, g.out_size_sigma)
                                      : draw_size(rng, g.in_size_mean, g.in_size_sigma);
        TcpFlags flags = F::ACK;
        if (rng.bernoulli(g.psh_rate)) flags.set(F::PSH);
        if (rng.bernoulli(g.urg_rate)) flags.set(F::URG);
        w.emit(t, from_client, size, flags);
    }

    if (g.endshake) {
        const bool client_fin = rng.bernoulli(g.fin_rate);
        const bool server_fin = rng.bernoulli(g.fin_rate);
        if (client_fin) {
            t += ms_to_us(exponential(rng, g.iat_ms_mean));
            w.emit(t, true, 0, F::FIN | F::ACK);
        }
        if (server_fin) {
            t += ms_to_us(rtt_ms / 2);
            w.emit(t, false, 0, F::FIN | F::ACK);
        }
        if (client_fin || server_fin) {
            t += ms_to_us(rtt_ms / 2);
            w.emit(t, !server_fin, 0, F::ACK);
        } else {
            t += ms_to_us(rtt_ms);
            w.emit(t, true, 0, F::RST | F::ACK);
        }
    }
    return t;
}

ClassGenerator scaled(ClassGenerator g, double size, double count, double time) {
    g.out_size_mean *= size;
    g.out_size_sigma *= size;
    g.in_size_mean *= size;
    g.in_size_sigma *= size;
    g.packets_median *= count;
    g.iat_ms_mean *= time;
    g.response_ms *= time;
    return g;
}

std::uint32_t session_length(Rng& rng, std::uint32_t median) {
    if (median <= 1) return 1;
    const double v = static_cast<double>(median) * std::exp(0.5 * rng.normal());
    return std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::lround(v)));
}

struct TraceBuilder {
    std::uint64_t seed;
    std::size_t index = 0;

    Rng rng_for(std::string_view what, std::size_t n) const {
        return Rng(derive_seed(derive_seed(seed, fnv1a64(what)), n));
    }
    std::int64_t next_start() { return kEpochUs + static_cast<std::int64_t>(index++) * kTraceSpacingUs; }
};

Endpoint client_endpoint(std::uint8_t net, Rng& rng) {
    return {{10, net, static_cast<std::uint8_t>(1 + rng.below(250)), static_cast<std::uint8_t>(1 + rng.below(250))},
            static_cast<std::uint16_t>(32768 + rng.below(28000))};
}

TraceMeta meta_for(const ServiceSpec& svc, Label label, const std::string& exploit) {
    TraceMeta m;
    m[std::string(meta_key::service)] = svc.name;
    m[std::string(meta_key::label)] = label == Label::Intrusion ? "intrusion" : "legitimate";
    m[std::string(meta_key::exploit)] = exploit;
    m[std::string(meta_key::source)] = "synth";
    return m;
}

}  // namespace

std::vector<Trace> generate(const ScenarioSpec& spec) {
    spec.validate();
    std::vector<Trace> traces;
    TraceBuilder tb{spec.seed};
    for (std::size_t si = 0; si < spec.services.size(); ++si) {
        const auto& svc = spec.services[si];
        const Endpoint server{{192, 168, 10, static_cast<std::uint8_t>(si + 1)}, svc.port};
        const std::string key = "svc:" + svc.name;

        // Legitimate sessions: each session draws its own size and pace.
        std::uint32_t made = 0;
        for (std::size_t n = 0; made < svc.legitimate; ++n) {
            Rng rng = tb.rng_for(key + ":legit", n);
            const auto len = std::min(session_length(rng, spec.legitimate.session_median),
                                      svc.legitimate - made);
            const auto g = scaled(spec.legitimate, svc.size_scale * std::exp(0.3 * rng.normal()),
                                  std::exp(0.2 * rng.normal()), std::exp(0.4 * rng.normal()));
            Endpoint client = client_endpoint(1, rng);
            std::vector<PacketEvent> events;
            std::int64_t t = tb.next_start();
            for (std::uint32_t c = 0; c < len; ++c) {
                client.port = static_cast<std::uint16_t>(client.port + 1);
                t = write_connection(g, client, server, t, rng, events);
                t += ms_to_us(exponential(rng, g.session_gap_ms));
            }
            made += len;
            traces.emplace_back(std::move(events), meta_for(svc, Label::Legitimate, ""));
        }

        // Dictionary bursts: short repeated logins from one client.
        for (std::uint32_t b = 0; b < svc.dictionary; ++b) {
            Rng rng = tb.rng_for(key + ":dict", b);
            const auto len = session_length(rng, spec.dictionary.session_median);
            Endpoint client = client_endpoint(2, rng);
            std::vector<PacketEvent> events;
            std::int64_t t = tb.next_start();
            for (std::uint32_t c = 0; c < len; ++c) {
                client.port = static_cast<std::uint16_t>(client.port + 1);
                t = write_connection(spec.dictionary, client, server, t, rng, events);
                t += ms_to_us(exponential(rng, spec.dictionary.session_gap_ms));
            }
            traces.emplace_back(std::move(events), meta_for(svc, Label::Legitimate, "dictionary"));
        }

        // Attacks: each exploit has a fixed profile; executions jitter around it.
        for (const auto& atk : svc.attacks) {
            Rng prof = tb.rng_for("exploit:" + atk.exploit, 0);
            const auto base = scaled(spec.attack, prof.uniform(0.7, 1.3), prof.uniform(0.7, 1.3),
                                     prof.uniform(0.7, 1.3));
            for (std::uint32_t k = 0; k < atk.count; ++k) {
                Rng rng = tb.rng_for("exploit:" + atk.exploit + ":run", k);
                const double j = spec.exploit_jitter;
                auto jitter = [&] { return std::max(0.05, 1.0 + j * rng.normal()); };
                const auto g = scaled(base, jitter(), jitter(), jitter());
                std::vector<PacketEvent> events;
                write_connection(g, client_endpoint(3, rng), server, tb.next_start(), rng, events);
                traces.emplace_back(std::move(events), meta_for(svc, Label::Intrusion, atk.exploit));
            }
        }
    }
    return traces;
}

}  // namespace asnm
