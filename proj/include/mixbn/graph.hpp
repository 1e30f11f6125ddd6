#ifndef MIXBN_GRAPH_HPP
#define MIXBN_GRAPH_HPP

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace mixbn {

struct Edge {
    std::string parent;
    std::string child;

    friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Directed acyclic graph over named variables. Values are immutable: every
// edge operation returns a new graph. Node order is the declaration order and
// drives all downstream tie-breaking.
class Dag {
public:
    Dag() = default;
    explicit Dag(std::vector<std::string> nodes);
    // Throws CycleError if the edges contain a cycle, InputError on unknown
    // nodes, self-loops or duplicates.
    Dag(std::vector<std::string> nodes, const std::vector<Edge>& edges);

    const std::vector<std::string>& nodes() const { return nodes_; }
    std::size_t size() const { return nodes_.size(); }
    bool has_node(std::string_view name) const;
    std::size_t index_of(std::string_view name) const;

    bool has_edge(std::string_view parent, std::string_view child) const;
    bool has_edge(std::size_t parent, std::size_t child) const;
    std::size_t edge_count() const;
    // Sorted by (parent index, child index).
    std::vector<Edge> edges() const;

    Dag add_edge(std::string_view parent, std::string_view child) const;
    Dag remove_edge(std::string_view parent, std::string_view child) const;
    Dag reverse_edge(std::string_view parent, std::string_view child) const;

    // Parents in declaration order.
    std::vector<std::string> parents(std::string_view node) const;
    const std::vector<std::size_t>& parent_indices(std::size_t node) const { return parents_.at(node); }
    std::vector<std::size_t> child_indices(std::size_t node) const;

    // Kahn's algorithm; ready nodes are taken in declaration order.
    std::vector<std::string> topological_order() const;
    std::vector<std::size_t> topological_indices() const;

    // True if a directed path from -> ... -> to exists (from == to counts).
    bool reachable(std::size_t from, std::size_t to) const;

    friend bool operator==(const Dag&, const Dag&) = default;

private:
    std::vector<std::string> nodes_;
    std::vector<std::vector<std::size_t>> parents_;  // sorted ascending

    void insert_edge(std::size_t parent, std::size_t child);
    void erase_edge(std::size_t parent, std::size_t child);
};

// Expert-supplied edges. When removable is false the edges are kept in every
// learned structure.
struct EdgeConstraints {
    std::vector<Edge> required;
    bool removable = false;
};

// Throws InputError on unknown nodes and CycleError if the required edges are
// cyclic on their own.
void validate_constraints(const EdgeConstraints& constraints, const std::vector<std::string>& nodes);

}  // namespace mixbn

#endif  // MIXBN_GRAPH_HPP
