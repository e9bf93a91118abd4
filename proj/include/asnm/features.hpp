#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "asnm/flow.hpp"

namespace asnm {

enum class FeatureKind { Real, Integer };

struct FeatureDescriptor {
    std::string name;
    FeatureKind kind;
};

class FeatureSchema {
public:
    FeatureSchema(std::string version, std::vector<FeatureDescriptor> features);

    /// The 21 connection-level features used by the experiments.
    static const FeatureSchema& standard();

    const std::string& version() const noexcept { return version_; }
    const std::vector<FeatureDescriptor>& features() const noexcept { return features_; }
    std::size_t size() const noexcept { return features_.size(); }
    std::vector<std::string> names() const;
    /// Throws SchemaViolation for unknown names.
    std::size_t index_of(std::string_view name) const;

private:
    std::string version_;
    std::vector<FeatureDescriptor> features_;
};

struct FeatureVector {
    std::vector<double> values;
    Label label = Label::Legitimate;
    std::string service;
    std::string exploit;
    std::string obfuscation_id = "direct";
};

/// Window for the context flow counts.
inline constexpr double kContextWindowS = 300.0;

struct LengthStats {
    double mean = 0.0;
    double stddev = 0.0;  ///< population standard deviation
};

struct FlagCounts {
    std::size_t urg = 0;
    std::size_t fin = 0;
    std::size_t psh = 0;
};

LengthStats length_stats(std::span<const PacketEvent> packets);
FlagCounts flag_counts(std::span<const PacketEvent> packets);
/// Most frequent TCP header length; ties go to the smaller value; empty gives 0.
std::uint16_t mode_tcp_header_len(const TcpConnection& conn);

/// Total lengths of `packets` falling into sub-interval `interval_index` of
/// [start, start + window] split into ten equal parts. Sub-intervals are
/// right-open except the last, which is closed.
std::uint64_t interval_sums(std::span<const PacketEvent> packets, std::int64_t start_us,
                            double window_s, int interval_index);

/// (CntOfOldFlows, CntOfNewFlows) with the 5 minute window.
std::pair<std::size_t, std::size_t> context_counts(const TcpConnection& conn,
                                                   const ContextIndex& ctx);

/// Packet sizes in order.
std::vector<double> size_series(std::span<const PacketEvent> packets);
/// All packets in capture order, outbound positive and inbound negative.
std::vector<double> signed_size_series(const TcpConnection& conn);
/// All packets in capture order, unsigned.
std::vector<double> merged_size_series(const TcpConnection& conn);

/// Feature vector of one connection aligned to FeatureSchema::standard().
FeatureVector extract(const TcpConnection& conn, const ContextIndex& ctx);

std::vector<FeatureVector> extract_dataset(const std::vector<TcpConnection>& connections,
                                           const ContextIndex& ctx);

}  // namespace asnm
