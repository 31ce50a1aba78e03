#include "kgdial/undirected_graph.hpp"

#include "kgdial/graph.hpp"

#include <algorithm>

namespace kgdial {

UndirectedGraph::UndirectedGraph(std::size_t node_count, std::span<const Edge> edges) {
    loops_.assign(node_count, 0.0);
    std::vector<Edge> directed;
    directed.reserve(edges.size() * 2);
    for (const Edge& e : edges) {
        if (e.u == e.v) {
            loops_[e.u] += 2.0 * e.weight;
            continue;
        }
        directed.push_back(e);
        directed.push_back(Edge{e.v, e.u, e.weight});
    }
    std::sort(directed.begin(), directed.end(),
              [](const Edge& a, const Edge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });

    offsets_.assign(node_count + 1, 0);
    for (std::size_t i = 0; i < directed.size();) {
        std::size_t j = i;
        double w = 0.0;
        while (j < directed.size() && directed[j].u == directed[i].u && directed[j].v == directed[i].v)
            w += directed[j++].weight;
        targets_.push_back(directed[i].v);
        weights_.push_back(w);
        ++offsets_[directed[i].u + 1];
        i = j;
    }
    for (std::size_t u = 0; u < node_count; ++u)
        offsets_[u + 1] += offsets_[u];

    strength_.assign(node_count, 0.0);
    for (std::uint32_t u = 0; u < node_count; ++u) {
        double s = loops_[u];
        for (double w : weights(u))
            s += w;
        strength_[u] = s;
        total_ += s;
    }
}

std::vector<UndirectedGraph::Edge> UndirectedGraph::edges() const {
    std::vector<Edge> out;
    for (std::uint32_t u = 0; u < node_count(); ++u) {
        const auto nb = neighbors(u);
        const auto ws = weights(u);
        for (std::size_t k = 0; k < nb.size(); ++k)
            if (u < nb[k])
                out.push_back(Edge{u, nb[k], ws[k]});
    }
    return out;
}

UndirectedGraph erase_labels(const KnowledgeGraph& g) {
    std::vector<UndirectedGraph::Edge> edges;
    edges.reserve(g.triple_count());
    for (const Triple& t : g.triples()) {
        if (t.is_self_loop())
            continue;
        const auto [u, v] = std::minmax(t.head.value, t.tail.value);
        edges.push_back({u, v, 1.0});
    }
    std::sort(edges.begin(), edges.end(),
              [](const auto& a, const auto& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
    edges.erase(std::unique(edges.begin(), edges.end(),
                            [](const auto& a, const auto& b) { return a.u == b.u && a.v == b.v; }),
                edges.end());
    return UndirectedGraph(g.entity_count(), edges);
}

} // namespace kgdial
