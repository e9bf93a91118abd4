#include "asnm/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "asnm/error.hpp"
#include "asnm/numeric.hpp"

namespace asnm {

FeatureSchema::FeatureSchema(std::string version, std::vector<FeatureDescriptor> features)
    : version_(std::move(version)), features_(std::move(features)) {
    for (std::size_t i = 0; i < features_.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (features_[i].name == features_[j].name) {
                throw Error(Errc::SchemaViolation, "duplicate feature " + features_[i].name);
            }
        }
    }
}

const FeatureSchema& FeatureSchema::standard() {
    using K = FeatureKind;
    static const FeatureSchema schema("asnm21/v1", {
        {"SigPktLenOut", K::Real},
        {"MeanPktLenIn", K::Real},
        {"CntOfOldFlows", K::Integer},
        {"CntOfNewFlows", K::Integer},
        {"ModTCPHdrLen", K::Integer},
        {"UrgCntIn", K::Integer},
        {"FinCntIn", K::Integer},
        {"PshCntIn", K::Integer},
        {"FourGonModulIn[1]", K::Real},
        {"FourGonModulOut[1]", K::Real},
        {"FourGonAngleOut[1]", K::Real},
        {"FourGonAngleN[9]", K::Real},
        {"FourGonAngleN[1]", K::Real},
        {"FourGonModulN[0]", K::Real},
        {"PolyInd13ordOut[13]", K::Real},
        {"PolyInd3ordOut[3]", K::Real},
        {"GaussProds8All[1]", K::Real},
        {"GaussProds8Out[7]", K::Real},
        {"InPktLen1s10i[5]", K::Integer},
        {"OutPktLen32s10i[3]", K::Integer},
        {"OutPktLen4s10i[2]", K::Integer},
    });
    return schema;
}

std::vector<std::string> FeatureSchema::names() const {
    std::vector<std::string> out;
    out.reserve(features_.size());
    for (const auto& f : features_) out.push_back(f.name);
    return out;
}

std::size_t FeatureSchema::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < features_.size(); ++i) {
        if (features_[i].name == name) return i;
    }
    throw Error(Errc::SchemaViolation, "unknown feature '" + std::string(name) + "'");
}

LengthStats length_stats(std::span<const PacketEvent> packets) {
    if (packets.empty()) return {};
    double sum = 0.0;
    for (const auto& p : packets) sum += p.total_len();
    const double mean = sum / static_cast<double>(packets.size());
    double ss = 0.0;
    for (const auto& p : packets) {
        const double d = p.total_len() - mean;
        ss += d * d;
    }
    return {mean, std::sqrt(ss / static_cast<double>(packets.size()))};
}

FlagCounts flag_counts(std::span<const PacketEvent> packets) {
    FlagCounts c;
    for (const auto& p : packets) {
        c.urg += p.flags.has(TcpFlags::URG);
        c.fin += p.flags.has(TcpFlags::FIN);
        c.psh += p.flags.has(TcpFlags::PSH);
    }
    return c;
}

std::uint16_t mode_tcp_header_len(const TcpConnection& conn) {
    std::map<std::uint16_t, std::size_t> freq;
    for (const auto& p : conn.packets_client) ++freq[p.tcp_header_len];
    for (const auto& p : conn.packets_server) ++freq[p.tcp_header_len];
    std::uint16_t best = 0;
    std::size_t best_count = 0;
    for (const auto& [len, count] : freq) {  // ascending, so ties keep the smaller length
        if (count > best_count) {
            best = len;
            best_count = count;
        }
    }
    return best;
}

std::uint64_t interval_sums(std::span<const PacketEvent> packets, std::int64_t start_us,
                            double window_s, int interval_index) {
    if (interval_index < 0 || interval_index >= 10) {
        throw Error(Errc::InvalidConfig, "interval index must be in [0,10)");
    }
    const std::int64_t window_us = std::llround(window_s * 1e6);
    std::uint64_t total = 0;
    for (const auto& p : packets) {
        const std::int64_t off = p.timestamp_us - start_us;
        if (off < 0 || off > window_us) continue;
        const std::int64_t bucket = std::min<std::int64_t>(9, off * 10 / window_us);
        if (bucket == interval_index) total += p.total_len();
    }
    return total;
}

std::pair<std::size_t, std::size_t> context_counts(const TcpConnection& conn,
                                                   const ContextIndex& ctx) {
    return {flows_before(ctx, conn, kContextWindowS), flows_after(ctx, conn, kContextWindowS)};
}

std::vector<double> size_series(std::span<const PacketEvent> packets) {
    std::vector<double> out;
    out.reserve(packets.size());
    for (const auto& p : packets) out.push_back(p.total_len());
    return out;
}

std::vector<double> signed_size_series(const TcpConnection& conn) {
    std::vector<double> out;
    out.reserve(conn.packet_count());
    for (const auto& [dir, p] : conn.chronological()) {
        const double len = p->total_len();
        out.push_back(dir == Direction::Outbound ? len : -len);
    }
    return out;
}

std::vector<double> merged_size_series(const TcpConnection& conn) {
    std::vector<double> out;
    out.reserve(conn.packet_count());
    for (const auto& [dir, p] : conn.chronological()) out.push_back(p->total_len());
    return out;
}

FeatureVector extract(const TcpConnection& conn, const ContextIndex& ctx) {
    const auto& out_pkts = conn.packets_client;
    const auto& in_pkts = conn.packets_server;
    const auto out_sizes = size_series(out_pkts);
    const auto in_sizes = size_series(in_pkts);
    const auto signed_sizes = signed_size_series(conn);
    const auto all_sizes = merged_size_series(conn);

    const auto [old_flows, new_flows] = context_counts(conn, ctx);
    const FlagCounts in_flags = flag_counts(in_pkts);
    const Gonio in1 = fft_gonio(in_sizes, 1);
    const Gonio out1 = fft_gonio(out_sizes, 1);
    const Gonio n9 = fft_gonio(signed_sizes, 9);
    const Gonio n1 = fft_gonio(signed_sizes, 1);
    const Gonio n0 = fft_gonio(signed_sizes, 0);

    FeatureVector fv;
    fv.values = {
        length_stats(out_pkts).stddev,
        length_stats(in_pkts).mean,
        static_cast<double>(old_flows),
        static_cast<double>(new_flows),
        static_cast<double>(mode_tcp_header_len(conn)),
        static_cast<double>(in_flags.urg),
        static_cast<double>(in_flags.fin),
        static_cast<double>(in_flags.psh),
        in1.module,
        out1.module,
        out1.angle,
        n9.angle,
        n1.angle,
        n0.module,
        poly_fit_index(out_sizes, 13, 13),
        poly_fit_index(out_sizes, 3, 3),
        gauss_products_8(all_sizes)[1],
        gauss_products_8(out_sizes)[7],
        static_cast<double>(interval_sums(in_pkts, conn.start_us, 1.0, 5)),
        static_cast<double>(interval_sums(out_pkts, conn.start_us, 32.0, 3)),
        static_cast<double>(interval_sums(out_pkts, conn.start_us, 4.0, 2)),
    };
    fv.label = conn.label;
    fv.service = conn.service;
    fv.exploit = conn.exploit;
    fv.obfuscation_id = conn.obfuscation_id;
    return fv;
}

std::vector<FeatureVector> extract_dataset(const std::vector<TcpConnection>& connections,
                                           const ContextIndex& ctx) {
    std::vector<FeatureVector> out;
    out.reserve(connections.size());
    for (const auto& c : connections) out.push_back(extract(c, ctx));
    return out;
}

}  // namespace asnm
