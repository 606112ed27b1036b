#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "qfc/model.hpp"

namespace qfc {

// Measurement record y_1..y_k as outcome indices.
using History = std::vector<OutcomeIndex>;

struct PolicyNode {
    std::optional<ControlIndex> control; // empty at the horizon
    double value = 0.0;
    std::vector<double> comparands;      // value of each control at this node
    std::vector<double> branch_probs;    // per outcome under the chosen control
    HermitianMatrix state;               // filter state at the node
};

// Depth-M decision tree keyed by measurement-history prefix. Only
// positive-probability branches have nodes.
class PolicyTree {
public:
    PolicyTree() = default;
    PolicyTree(std::size_t horizon, std::size_t num_controls, std::size_t num_outcomes,
               std::map<History, PolicyNode> nodes)
        : horizon_(horizon), num_controls_(num_controls), num_outcomes_(num_outcomes), nodes_(std::move(nodes)) {}

    [[nodiscard]] std::size_t horizon() const { return horizon_; }
    [[nodiscard]] std::size_t num_controls() const { return num_controls_; }
    [[nodiscard]] std::size_t num_outcomes() const { return num_outcomes_; }
    [[nodiscard]] const std::map<History, PolicyNode>& nodes() const { return nodes_; }
    [[nodiscard]] const PolicyNode& root() const { return at({}); }
    [[nodiscard]] double root_value() const { return root().value; }

    [[nodiscard]] const PolicyNode* find(const History& h) const {
        auto it = nodes_.find(h);
        return it == nodes_.end() ? nullptr : &it->second;
    }

    [[nodiscard]] const PolicyNode& at(const History& h) const {
        if (const auto* n = find(h))
            return *n;
        throw UnknownLabel("PolicyTree: history is not a node of the tree");
    }

private:
    std::size_t horizon_ = 0;
    std::size_t num_controls_ = 0;
    std::size_t num_outcomes_ = 0;
    std::map<History, PolicyNode> nodes_;
};

// Stored control at a history prefix. Throws UnknownLabel when the prefix
// has zero probability under the tree's model or is at the horizon.
inline ControlIndex extract_control(const PolicyTree& tree, const History& history) {
    const auto& node = tree.at(history);
    if (!node.control)
        throw UnknownLabel("extract_control: history reaches the horizon, no control stored");
    return *node.control;
}

// ============================================================================
// Controller
// ============================================================================
// A causal map from measurement history to control. Every variant reads only
// the history prefix, so causality holds by construction.
class Controller {
public:
    struct Tree {
        PolicyTree tree;
    };
    struct Table {
        std::map<History, ControlIndex> controls;
    };
    struct Constant {
        ControlIndex control = 0;
    };
    struct Random {
        std::uint64_t seed = 0;
        std::size_t num_controls = 1;
    };

    static Controller from_tree(PolicyTree tree) { return Controller(Tree{std::move(tree)}); }
    static Controller table(std::map<History, ControlIndex> controls) { return Controller(Table{std::move(controls)}); }
    static Controller constant(ControlIndex u) { return Controller(Constant{u}); }
    static Controller random(std::uint64_t seed, std::size_t num_controls) {
        if (num_controls == 0)
            throw InvariantViolation("Controller::random: no controls");
        return Controller(Random{seed, num_controls});
    }
    // Open loop: control at time k is sequence[k] regardless of outcomes.
    static Controller open_loop(std::vector<ControlIndex> sequence) {
        return Controller(OpenLoop{std::move(sequence)});
    }

    // Control for the given history, or nothing when the controller does not
    // define one (an unreachable tree branch or a missing table entry).
    [[nodiscard]] std::optional<ControlIndex> control(const History& h) const {
        return std::visit(
            [&](const auto& c) -> std::optional<ControlIndex> { return lookup(c, h); }, repr_);
    }

    [[nodiscard]] const PolicyTree* tree() const {
        const auto* t = std::get_if<Tree>(&repr_);
        return t ? &t->tree : nullptr;
    }

private:
    struct OpenLoop {
        std::vector<ControlIndex> sequence;
    };
    using Repr = std::variant<Tree, Table, Constant, Random, OpenLoop>;

    explicit Controller(Repr r) : repr_(std::move(r)) {}

    static std::optional<ControlIndex> lookup(const Tree& t, const History& h) {
        const auto* n = t.tree.find(h);
        if (!n)
            return std::nullopt;
        return n->control;
    }
    static std::optional<ControlIndex> lookup(const Table& t, const History& h) {
        auto it = t.controls.find(h);
        if (it == t.controls.end())
            return std::nullopt;
        return it->second;
    }
    static std::optional<ControlIndex> lookup(const Constant& c, const History&) { return c.control; }
    static std::optional<ControlIndex> lookup(const OpenLoop& o, const History& h) {
        if (h.size() >= o.sequence.size())
            return std::nullopt;
        return o.sequence[h.size()];
    }
    static std::optional<ControlIndex> lookup(const Random& r, const History& h) {
        // FNV-style fold of the history into the seed, finished with splitmix64.
        std::uint64_t x = r.seed ^ 0xcbf29ce484222325ULL;
        x = (x ^ h.size()) * 0x100000001b3ULL;
        for (auto y : h)
            x = (x ^ (static_cast<std::uint64_t>(y) + 1)) * 0x100000001b3ULL;
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        x ^= x >> 31;
        return static_cast<ControlIndex>(x % r.num_controls);
    }

    Repr repr_;
};

} // namespace qfc
