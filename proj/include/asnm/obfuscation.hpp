#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "asnm/rng.hpp"
#include "asnm/trace.hpp"

namespace asnm {

enum class DelayKind { None, Constant, Normal };

struct DelayModel {
    DelayKind kind = DelayKind::None;
    double base_ms = 0.0;
    double sigma_ms = 0.0;
    double correlation = 0.0;

    friend bool operator==(const DelayModel&, const DelayModel&) = default;
};

/// One parameterised non-payload obfuscation operator.
struct ObfuscationSpec {
    std::string id;
    DelayModel delay;
    double loss_p = 0.0;
    double corrupt_p = 0.0;
    double dup_p = 0.0;
    double reorder_p = 0.0;
    double loss_corr = 0.0;
    double corrupt_corr = 0.0;
    double reorder_corr = 0.0;
    double reorder_gap_ms = 0.0;
    std::optional<std::uint32_t> mtu;

    /// Throws InvalidSpec when a field is out of range.
    void validate() const;

    friend bool operator==(const ObfuscationSpec&, const ObfuscationSpec&) = default;
};

std::string spec_to_json(const ObfuscationSpec& spec);
/// Accepts a single spec object or an array of them. Unknown fields are
/// rejected with InvalidSpec.
std::vector<ObfuscationSpec> specs_from_json(std::string_view text);

/// Random stream whose consecutive draws can be correlated.
///
/// next() is the exponential smoothing recurrence
///     x_n = rho * x_{n-1} + (1 - rho) * u_n.
/// It shrinks the spread of x_n when rho > 0, so impairment decisions go
/// through chance(), which keeps P(true) = p for every rho and gives the
/// decision sequence a lag-1 correlation of rho.
class CorrelatedRng {
public:
    explicit CorrelatedRng(std::uint64_t seed);

    double next(double rho);
    bool chance(double p, double rho);
    /// Stationary AR(1) standard normal with lag-1 correlation rho.
    double normal(double rho);

    double last() const noexcept { return last_; }

private:
    Rng rng_;
    double last_;
    double last_u_ = 0.0;
    double last_z_ = 0.0;
    bool has_u_ = false;
    bool has_z_ = false;
};

/// Rows (a)..(q) of the experimental catalog, in order.
const std::vector<ObfuscationSpec>& catalog();
/// Throws InvalidObfuscationId for ids outside a..q.
const ObfuscationSpec& catalog_spec(std::string_view id);

/// Technique group of a catalog id, e.g. "k" -> "k,l,m,n".
std::string technique_of(std::string_view id);
/// The seven technique groups in catalog order.
const std::vector<std::string>& technique_groups();

enum class Directions { ClientToServer, Both };

/// Applies an operator to a trace. Pure function of its arguments.
/// Throws InfeasibleSpec when the MTU cannot carry an event's headers.
/// `directions` limits the delay operator only; the others see every event.
Trace apply(const ObfuscationSpec& spec, const Trace& trace, std::uint64_t seed,
            Directions directions = Directions::ClientToServer);

std::uint64_t catalog_seed(std::uint64_t seed, std::string_view id);

struct CatalogResult {
    std::map<std::string, Trace> traces;       ///< includes "direct" = input
    std::map<std::string, std::string> failures;  ///< id -> error message
};

CatalogResult apply_catalog(const Trace& trace, std::uint64_t seed,
                            Directions directions = Directions::ClientToServer);

}  // namespace asnm
