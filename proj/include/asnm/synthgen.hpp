#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "asnm/trace.hpp"

namespace asnm {

/// Statistics of one traffic class. Sizes are payload bytes, times in ms.
struct ClassGenerator {
    double packets_median = 12.0;  ///< data packets, log-normal
    double packets_spread = 0.5;   ///< sigma of log(packets)
    std::uint32_t packets_min = 1;
    double out_fraction = 0.5;  ///< share of data packets sent by the client
    double out_size_mean = 300.0;
    double out_size_sigma = 150.0;
    double in_size_mean = 800.0;
    double in_size_sigma = 400.0;
    double iat_ms_mean = 40.0;     ///< exponential gaps between data packets
    double response_ms = 5.0;      ///< server think time before its first reply
    bool handshake = true;
    bool endshake = true;
    double psh_rate = 0.5;
    double fin_rate = 1.0;         ///< chance each side closes with FIN when endshake is on
    double urg_rate = 0.0;
    double tcp_options_rate = 1.0; ///< chance a connection uses 32-byte TCP headers
    std::uint32_t session_median = 1;  ///< connections per trace (same client and service)
    double session_gap_ms = 2000.0;

    void validate() const;
};

struct AttackSpec {
    std::string exploit;
    std::uint32_t count = 1;
};

struct ServiceSpec {
    std::string name;
    std::uint16_t port = 80;
    std::uint32_t legitimate = 0;  ///< connections
    std::uint32_t dictionary = 0;  ///< dictionary-attack bursts, labelled legitimate
    double size_scale = 1.0;       ///< multiplies the legitimate size statistics
    std::vector<AttackSpec> attacks;
};

struct ScenarioSpec {
    std::uint64_t seed = 1;
    ClassGenerator legitimate;
    ClassGenerator attack;
    ClassGenerator dictionary;
    double exploit_jitter = 0.1;  ///< relative spread between executions of one exploit
    std::vector<ServiceSpec> services;

    void validate() const;
    /// Desk-scale scenario: about 16 direct attacks and 1080 legitimate connections.
    static ScenarioSpec standard(std::uint64_t seed);
};

/// Throws InvalidConfig on bad documents. Omitted fields keep defaults.
ScenarioSpec scenario_from_json(std::string_view text);
std::string scenario_to_json(const ScenarioSpec& spec);

/// Deterministic traces with service, label, exploit and source meta. Attack
/// traces hold one connection; legitimate traces hold a client session.
std::vector<Trace> generate(const ScenarioSpec& spec);

}  // namespace asnm
