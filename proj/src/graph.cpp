#include "kgdial/graph.hpp"

#include "kgdial/error.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

namespace kgdial {

std::uint32_t KnowledgeGraph::Builder::intern(std::unordered_map<std::string, std::uint32_t>& index,
                                              std::vector<std::string>& labels,
                                              std::string_view label) {
    auto [it, inserted] = index.try_emplace(std::string(label), static_cast<std::uint32_t>(labels.size()));
    if (inserted)
        labels.emplace_back(label);
    return it->second;
}

bool KnowledgeGraph::Builder::add(std::string_view head, std::string_view relation, std::string_view tail) {
    if (head.empty() || relation.empty() || tail.empty())
        throw Error("empty label in triple");
    const Triple t{EntityId{intern(entity_index_, entity_labels_, head)},
                   RelationId{intern(relation_index_, relation_labels_, relation)},
                   EntityId{intern(entity_index_, entity_labels_, tail)}};
    if (!seen_.insert(t).second) {
        ++duplicates_;
        return false;
    }
    triples_.push_back(t);
    return true;
}

KnowledgeGraph KnowledgeGraph::Builder::build() && {
    KnowledgeGraph g;
    g.entity_labels_ = std::move(entity_labels_);
    g.relation_labels_ = std::move(relation_labels_);
    g.entity_index_ = std::move(entity_index_);
    g.relation_index_ = std::move(relation_index_);
    g.triples_ = std::move(triples_);
    g.triple_set_ = std::move(seen_);

    const std::size_t n = g.entity_labels_.size();
    g.out_offsets_.assign(n + 1, 0);
    g.in_offsets_.assign(n + 1, 0);
    std::size_t self_loops = 0;
    for (const Triple& t : g.triples_) {
        ++g.out_offsets_[t.head.value + 1];
        ++g.in_offsets_[t.tail.value + 1];
        if (t.is_self_loop())
            ++self_loops;
    }
    for (std::size_t i = 0; i < n; ++i) {
        g.out_offsets_[i + 1] += g.out_offsets_[i];
        g.in_offsets_[i + 1] += g.in_offsets_[i];
    }
    g.out_adj_.resize(g.triples_.size());
    g.in_adj_.resize(g.triples_.size());
    std::vector<std::size_t> out_fill(g.out_offsets_.begin(), g.out_offsets_.end() - 1);
    std::vector<std::size_t> in_fill(g.in_offsets_.begin(), g.in_offsets_.end() - 1);
    for (const Triple& t : g.triples_) {
        g.out_adj_[out_fill[t.head.value]++] = Neighbor{t.relation, t.tail};
        g.in_adj_[in_fill[t.tail.value]++] = Neighbor{t.relation, t.head};
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::sort(g.out_adj_.begin() + static_cast<std::ptrdiff_t>(g.out_offsets_[i]),
                  g.out_adj_.begin() + static_cast<std::ptrdiff_t>(g.out_offsets_[i + 1]));
        std::sort(g.in_adj_.begin() + static_cast<std::ptrdiff_t>(g.in_offsets_[i]),
                  g.in_adj_.begin() + static_cast<std::ptrdiff_t>(g.in_offsets_[i + 1]));
    }

    g.stats_ = GraphStats{n, g.relation_labels_.size(), g.triples_.size(), self_loops, duplicates_};
    if (self_loops > 0)
        spdlog::warn("knowledge graph contains {} self-loop triple(s)", self_loops);
    return g;
}

const std::string& KnowledgeGraph::label(EntityId e) const {
    check(e);
    return entity_labels_[e.value];
}

const std::string& KnowledgeGraph::label(RelationId r) const {
    if (r.value >= relation_labels_.size())
        throw Error("unknown relation id " + std::to_string(r.value));
    return relation_labels_[r.value];
}

std::optional<EntityId> KnowledgeGraph::find_entity(std::string_view label) const {
    auto it = entity_index_.find(std::string(label));
    if (it == entity_index_.end())
        return std::nullopt;
    return EntityId{it->second};
}

std::optional<RelationId> KnowledgeGraph::find_relation(std::string_view label) const {
    auto it = relation_index_.find(std::string(label));
    if (it == relation_index_.end())
        return std::nullopt;
    return RelationId{it->second};
}

EntityId KnowledgeGraph::entity(std::string_view label) const {
    if (auto e = find_entity(label))
        return *e;
    throw Error("unknown entity '" + std::string(label) + "'");
}

RelationId KnowledgeGraph::relation(std::string_view label) const {
    if (auto r = find_relation(label))
        return *r;
    throw Error("unknown relation '" + std::string(label) + "'");
}

bool KnowledgeGraph::contains(const Triple& t) const { return triple_set_.contains(t); }

void KnowledgeGraph::check(EntityId e) const {
    if (!contains(e))
        throw Error("unknown entity id " + std::to_string(e.value));
}

std::span<const Neighbor> KnowledgeGraph::out_neighbors(EntityId e) const {
    check(e);
    return std::span<const Neighbor>(out_adj_).subspan(out_offsets_[e.value],
                                                        out_offsets_[e.value + 1] - out_offsets_[e.value]);
}

std::span<const Neighbor> KnowledgeGraph::in_neighbors(EntityId e) const {
    check(e);
    return std::span<const Neighbor>(in_adj_).subspan(in_offsets_[e.value],
                                                       in_offsets_[e.value + 1] - in_offsets_[e.value]);
}

std::vector<Neighbor> KnowledgeGraph::neighbors(EntityId e, Direction direction) const {
    const auto out = out_neighbors(e);
    const auto in = in_neighbors(e);
    switch (direction) {
    case Direction::out:
        return {out.begin(), out.end()};
    case Direction::in:
        return {in.begin(), in.end()};
    case Direction::both:
        break;
    }
    std::vector<Neighbor> merged;
    merged.reserve(out.size() + in.size());
    std::merge(out.begin(), out.end(), in.begin(), in.end(), std::back_inserter(merged));
    return merged;
}

std::size_t KnowledgeGraph::degree(EntityId e) const {
    check(e);
    return (out_offsets_[e.value + 1] - out_offsets_[e.value]) + (in_offsets_[e.value + 1] - in_offsets_[e.value]);
}

bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b) {
    return a.entity_labels_ == b.entity_labels_ && a.relation_labels_ == b.relation_labels_ &&
           a.triples_ == b.triples_;
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find('\t', start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

bool is_blank(std::string_view line) {
    return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

} // namespace

KnowledgeGraph read_graph(std::istream& in, TripleFormat format, const std::string& source_name) {
    KnowledgeGraph::Builder builder;
    std::string line;
    std::size_t line_no = 0;
    std::size_t records = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view(line);
        if (!view.empty() && view.back() == '\r')
            view.remove_suffix(1);
        if (is_blank(view))
            continue;

        std::string head, relation, tail;
        if (format == TripleFormat::tsv) {
            const auto fields = split_tabs(view);
            if (fields.size() != 3)
                throw ParseError(source_name, line_no,
                                 "expected 3 tab-separated fields, found " + std::to_string(fields.size()));
            head = fields[0];
            relation = fields[1];
            tail = fields[2];
        } else {
            nlohmann::json record;
            try {
                record = nlohmann::json::parse(view);
            } catch (const nlohmann::json::parse_error& e) {
                throw ParseError(source_name, line_no, std::string("invalid JSON: ") + e.what());
            }
            if (!record.is_object() || record.size() != 3)
                throw ParseError(source_name, line_no, "expected an object with keys head, relation, tail");
            for (const char* key : {"head", "relation", "tail"})
                if (!record.contains(key) || !record[key].is_string())
                    throw ParseError(source_name, line_no, std::string("missing string field '") + key + "'");
            head = record["head"].get<std::string>();
            relation = record["relation"].get<std::string>();
            tail = record["tail"].get<std::string>();
        }
        if (head.empty() || relation.empty() || tail.empty())
            throw ParseError(source_name, line_no, "empty field");
        builder.add(head, relation, tail);
        ++records;
    }
    if (records == 0)
        throw ParseError(source_name, 0, "empty graph source");
    return std::move(builder).build();
}

KnowledgeGraph load_graph(const std::filesystem::path& source, TripleFormat format) {
    std::ifstream in(source);
    if (!in)
        throw Error("cannot open graph source " + source.string());
    return read_graph(in, format, source.string());
}

TripleFormat parse_triple_format(std::string_view name) {
    if (name == "tsv")
        return TripleFormat::tsv;
    if (name == "jsonl")
        return TripleFormat::jsonl;
    throw ConfigError("unknown triple format '" + std::string(name) + "' (expected tsv or jsonl)");
}

void write_graph_tsv(const KnowledgeGraph& g, std::ostream& out) {
    for (const Triple& t : g.triples())
        out << g.label(t.head) << '\t' << g.label(t.relation) << '\t' << g.label(t.tail) << '\n';
}

Subgraph induced_subgraph(const KnowledgeGraph& g, std::span<const Triple> triples) {
    Subgraph sub(g);
    sub.triples_.assign(triples.begin(), triples.end());
    for (const Triple& t : sub.triples_)
        if (!g.contains(t))
            throw Error("triple (" + std::to_string(t.head.value) + "," + std::to_string(t.relation.value) + "," +
                        std::to_string(t.tail.value) + ") is not part of the graph");
    std::sort(sub.triples_.begin(), sub.triples_.end());
    sub.triples_.erase(std::unique(sub.triples_.begin(), sub.triples_.end()), sub.triples_.end());
    sub.entities_.reserve(sub.triples_.size() * 2);
    for (const Triple& t : sub.triples_) {
        sub.entities_.push_back(t.head);
        sub.entities_.push_back(t.tail);
    }
    std::sort(sub.entities_.begin(), sub.entities_.end());
    sub.entities_.erase(std::unique(sub.entities_.begin(), sub.entities_.end()), sub.entities_.end());
    return sub;
}

double jaccard_similarity(const Subgraph& a, const Subgraph& b) {
    if (&a.parent() != &b.parent())
        throw Error("jaccard_similarity: subgraphs belong to different graphs");
    const auto ta = a.triples();
    const auto tb = b.triples();
    if (ta.empty() && tb.empty())
        return 0.0;
    std::size_t common = 0;
    auto ia = ta.begin();
    auto ib = tb.begin();
    while (ia != ta.end() && ib != tb.end()) {
        if (*ia < *ib)
            ++ia;
        else if (*ib < *ia)
            ++ib;
        else {
            ++common;
            ++ia;
            ++ib;
        }
    }
    return static_cast<double>(common) / static_cast<double>(ta.size() + tb.size() - common);
}

} // namespace kgdial
