#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "asnm/classifiers.hpp"

namespace asnm {

namespace {

constexpr std::size_t kMinLeaf = 2;
constexpr std::size_t kMinSplit = 4;

double entropy(double a, double b) {
    const double n = a + b;
    double h = 0.0;
    if (a > 0) h -= a / n * std::log2(a / n);
    if (b > 0) h -= b / n * std::log2(b / n);
    return h;
}

struct Candidate {
    int feature;
    double threshold;
    double gain;
    double ratio;
};

class Builder {
public:
    Builder(const HyperParams& p, const Samples& data) : p_(p), data_(data) {}

    DecisionTreeModel build() {
        std::vector<std::size_t> idx(data_.size());
        std::iota(idx.begin(), idx.end(), 0);
        grow(idx, 0);
        return std::move(model_);
    }

private:
    int grow(const std::vector<std::size_t>& idx, int depth) {
        const int id = static_cast<int>(model_.nodes.size());
        model_.nodes.emplace_back();
        double n_intr = 0;
        for (auto i : idx) n_intr += data_.y[i] == Label::Intrusion;
        const double n = static_cast<double>(idx.size());
        {
            auto& node = model_.nodes[static_cast<std::size_t>(id)];
            node.intrusion_fraction = n_intr / n;
            node.label = n_intr >= n - n_intr ? Label::Intrusion : Label::Legitimate;
        }
        if (n_intr == 0 || n_intr == n || depth >= p_.max_depth || idx.size() < kMinSplit) return id;

        const auto best = choose(idx, n_intr);
        if (!best || best->ratio < p_.min_gain || best->gain <= 0.0) return id;

        std::vector<std::size_t> left, right;
        const auto f = static_cast<std::size_t>(best->feature);
        for (auto i : idx) (data_.x[i][f] <= best->threshold ? left : right).push_back(i);
        const int l = grow(left, depth + 1);
        const int r = grow(right, depth + 1);
        auto& node = model_.nodes[static_cast<std::size_t>(id)];
        node.feature = best->feature;
        node.threshold = best->threshold;
        node.left = l;
        node.right = r;
        return id;
    }

    // Each feature proposes its highest-gain threshold (earliest on ties).
    // Among proposals whose gain is at least the average proposal gain, the
    // highest gain ratio wins; earlier features win ties. Ranking single
    // thresholds by ratio instead would favour peeling off tiny slices.
    std::optional<Candidate> choose(const std::vector<std::size_t>& idx, double n_intr) const {
        const double n = static_cast<double>(idx.size());
        const double h_parent = entropy(n_intr, n - n_intr);
        std::vector<Candidate> cands;
        std::vector<std::size_t> order(idx);
        for (std::size_t f = 0; f < data_.dims(); ++f) {
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return data_.x[a][f] < data_.x[b][f];
            });
            std::optional<Candidate> top;
            double left_i = 0;
            for (std::size_t k = 0; k + 1 < order.size(); ++k) {
                left_i += data_.y[order[k]] == Label::Intrusion;
                const double a = data_.x[order[k]][f];
                const double b = data_.x[order[k + 1]][f];
                if (!(a < b)) continue;
                const double nl = static_cast<double>(k + 1);
                const double nr = n - nl;
                if (k + 1 < kMinLeaf || order.size() - (k + 1) < kMinLeaf) continue;
                const double gain = h_parent - nl / n * entropy(left_i, nl - left_i) -
                                    nr / n * entropy(n_intr - left_i, nr - (n_intr - left_i));
                if (top && gain <= top->gain) continue;
                double mid = a + (b - a) / 2.0;
                if (!(mid < b)) mid = a;
                top = Candidate{static_cast<int>(f), mid, gain, gain / entropy(nl, nr)};
            }
            if (top) cands.push_back(*top);
        }
        if (cands.empty()) return std::nullopt;
        double avg = 0.0;
        for (const auto& c : cands) avg += c.gain;
        avg /= static_cast<double>(cands.size());
        const Candidate* best = nullptr;
        for (const auto& c : cands) {
            if (c.gain + 1e-12 < avg) continue;
            if (!best || c.ratio > best->ratio) best = &c;
        }
        return *best;
    }

    const HyperParams& p_;
    const Samples& data_;
    DecisionTreeModel model_;
};

}  // namespace

DecisionTreeModel train_decision_tree(const HyperParams& p, const Samples& data) {
    return Builder(p, data).build();
}

const TreeNode& tree_leaf(const DecisionTreeModel& m, std::span<const double> x) {
    const TreeNode* node = &m.nodes.front();
    while (node->feature >= 0) {
        const bool left = x[static_cast<std::size_t>(node->feature)] <= node->threshold;
        node = &m.nodes[static_cast<std::size_t>(left ? node->left : node->right)];
    }
    return *node;
}

int DecisionTreeModel::depth() const {
    if (nodes.empty()) return 0;
    int deepest = 0;
    std::vector<std::pair<int, int>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [id, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        const auto& node = nodes[static_cast<std::size_t>(id)];
        if (node.feature >= 0) {
            stack.push_back({node.left, d + 1});
            stack.push_back({node.right, d + 1});
        }
    }
    return deepest;
}

}  // namespace asnm
