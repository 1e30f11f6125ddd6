#include "mixbn/graph.hpp"

#include "mixbn/error.hpp"

#include <algorithm>
#include <set>

namespace mixbn {

Dag::Dag(std::vector<std::string> nodes) : nodes_(std::move(nodes)), parents_(nodes_.size()) {
    std::set<std::string_view> seen;
    for (const auto& n : nodes_)
        if (!seen.insert(n).second) throw InputError("duplicate node '" + n + "'");
}

Dag::Dag(std::vector<std::string> nodes, const std::vector<Edge>& edges) : Dag(std::move(nodes)) {
    for (const auto& e : edges) {
        const auto p = index_of(e.parent);
        const auto c = index_of(e.child);
        if (p == c) throw InputError("self-loop on '" + e.parent + "'");
        if (has_edge(p, c)) throw InputError("duplicate edge " + e.parent + " -> " + e.child);
        insert_edge(p, c);
    }
    if (topological_indices().size() != nodes_.size()) throw CycleError("edge set contains a directed cycle");
}

bool Dag::has_node(std::string_view name) const {
    return std::find(nodes_.begin(), nodes_.end(), name) != nodes_.end();
}

std::size_t Dag::index_of(std::string_view name) const {
    auto it = std::find(nodes_.begin(), nodes_.end(), name);
    if (it == nodes_.end()) throw InputError("unknown node '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - nodes_.begin());
}

bool Dag::has_edge(std::size_t parent, std::size_t child) const {
    const auto& ps = parents_.at(child);
    return std::binary_search(ps.begin(), ps.end(), parent);
}

bool Dag::has_edge(std::string_view parent, std::string_view child) const {
    return has_edge(index_of(parent), index_of(child));
}

std::size_t Dag::edge_count() const {
    std::size_t n = 0;
    for (const auto& ps : parents_) n += ps.size();
    return n;
}

std::vector<Edge> Dag::edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> idx;
    for (std::size_t c = 0; c < parents_.size(); ++c)
        for (auto p : parents_[c]) idx.emplace_back(p, c);
    std::sort(idx.begin(), idx.end());
    std::vector<Edge> out;
    out.reserve(idx.size());
    for (auto [p, c] : idx) out.push_back({nodes_[p], nodes_[c]});
    return out;
}

void Dag::insert_edge(std::size_t parent, std::size_t child) {
    auto& ps = parents_[child];
    ps.insert(std::lower_bound(ps.begin(), ps.end(), parent), parent);
}

void Dag::erase_edge(std::size_t parent, std::size_t child) {
    auto& ps = parents_[child];
    ps.erase(std::lower_bound(ps.begin(), ps.end(), parent));
}

bool Dag::reachable(std::size_t from, std::size_t to) const {
    if (from == to) return true;
    // Walk backwards from `to` through parent lists.
    std::vector<char> visited(nodes_.size(), 0);
    std::vector<std::size_t> stack{to};
    visited[to] = 1;
    while (!stack.empty()) {
        const auto v = stack.back();
        stack.pop_back();
        for (auto p : parents_[v]) {
            if (p == from) return true;
            if (!visited[p]) {
                visited[p] = 1;
                stack.push_back(p);
            }
        }
    }
    return false;
}

Dag Dag::add_edge(std::string_view parent, std::string_view child) const {
    const auto p = index_of(parent);
    const auto c = index_of(child);
    if (p == c) throw InputError("self-loop on '" + std::string(parent) + "'");
    if (has_edge(p, c)) throw InputError("edge " + std::string(parent) + " -> " + std::string(child) + " exists");
    if (reachable(c, p))
        throw CycleError("edge " + std::string(parent) + " -> " + std::string(child) + " would create a cycle");
    Dag g = *this;
    g.insert_edge(p, c);
    return g;
}

Dag Dag::remove_edge(std::string_view parent, std::string_view child) const {
    const auto p = index_of(parent);
    const auto c = index_of(child);
    if (!has_edge(p, c)) throw InputError("no edge " + std::string(parent) + " -> " + std::string(child));
    Dag g = *this;
    g.erase_edge(p, c);
    return g;
}

Dag Dag::reverse_edge(std::string_view parent, std::string_view child) const {
    const auto p = index_of(parent);
    const auto c = index_of(child);
    if (!has_edge(p, c)) throw InputError("no edge " + std::string(parent) + " -> " + std::string(child));
    Dag g = *this;
    g.erase_edge(p, c);
    if (g.reachable(p, c))
        throw CycleError("reversing " + std::string(parent) + " -> " + std::string(child) + " would create a cycle");
    g.insert_edge(c, p);
    return g;
}

std::vector<std::string> Dag::parents(std::string_view node) const {
    std::vector<std::string> out;
    for (auto p : parents_[index_of(node)]) out.push_back(nodes_[p]);
    return out;
}

std::vector<std::size_t> Dag::child_indices(std::size_t node) const {
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < parents_.size(); ++c)
        if (has_edge(node, c)) out.push_back(c);
    return out;
}

std::vector<std::size_t> Dag::topological_indices() const {
    const auto n = nodes_.size();
    std::vector<std::size_t> indegree(n);
    std::vector<std::vector<std::size_t>> children(n);
    for (std::size_t c = 0; c < n; ++c) {
        indegree[c] = parents_[c].size();
        for (auto p : parents_[c]) children[p].push_back(c);
    }
    std::set<std::size_t> ready;
    for (std::size_t v = 0; v < n; ++v)
        if (indegree[v] == 0) ready.insert(v);
    std::vector<std::size_t> order;
    order.reserve(n);
    while (!ready.empty()) {
        const auto v = *ready.begin();
        ready.erase(ready.begin());
        order.push_back(v);
        for (auto c : children[v])
            if (--indegree[c] == 0) ready.insert(c);
    }
    return order;
}

std::vector<std::string> Dag::topological_order() const {
    const auto idx = topological_indices();
    if (idx.size() != nodes_.size()) throw InvariantError("graph contains a cycle");
    std::vector<std::string> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(nodes_[i]);
    return out;
}

namespace {

// Returns one directed cycle as a node path (first node repeated at the end).
std::vector<std::string> find_cycle(const std::vector<std::string>& nodes, const std::vector<Edge>& edges) {
    const auto n = nodes.size();
    auto idx = [&](const std::string& name) {
        return static_cast<std::size_t>(std::find(nodes.begin(), nodes.end(), name) - nodes.begin());
    };
    std::vector<std::vector<std::size_t>> out(n);
    for (const auto& e : edges) out[idx(e.parent)].push_back(idx(e.child));

    std::vector<int> state(n, 0);  // 0 new, 1 on stack, 2 done
    std::vector<std::size_t> stack;
    std::vector<std::string> cycle;
    auto dfs = [&](auto&& self, std::size_t v) -> bool {
        state[v] = 1;
        stack.push_back(v);
        for (auto w : out[v]) {
            if (state[w] == 1) {
                auto it = std::find(stack.begin(), stack.end(), w);
                for (; it != stack.end(); ++it) cycle.push_back(nodes[*it]);
                cycle.push_back(nodes[w]);
                return true;
            }
            if (state[w] == 0 && self(self, w)) return true;
        }
        stack.pop_back();
        state[v] = 2;
        return false;
    };
    for (std::size_t v = 0; v < n; ++v)
        if (state[v] == 0 && dfs(dfs, v)) break;
    return cycle;
}

}  // namespace

void validate_constraints(const EdgeConstraints& constraints, const std::vector<std::string>& nodes) {
    // The Dag constructor checks node names, self-loops, duplicates and cycles.
    try {
        Dag(nodes, constraints.required);
    } catch (const CycleError&) {
        std::string path;
        for (const auto& name : find_cycle(nodes, constraints.required)) path += (path.empty() ? "" : " -> ") + name;
        throw CycleError("required edges form a directed cycle: " + path);
    }
}

}  // namespace mixbn
