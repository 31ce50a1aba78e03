#include "fixtures.hpp"

#include "kgdial/provider.hpp"

#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace fixtures {

namespace {

const char* const kBlockNames[] = {"cardio", "neuro", "derma", "gastro", "pulmo", "onco"};
const char* const kBlockRelations[][3] = {
    {"treats", "causes", "indicates"},   {"affects", "inhibits", "signals"}, {"irritates", "soothes", "marks"},
    {"digests", "blocks", "triggers"},   {"dilates", "narrows", "clears"}, {"suppresses", "feeds", "spreads"},
};

} // namespace

Planted planted_partition(std::size_t blocks, std::size_t size, double p_in, double p_out, std::uint64_t seed) {
    Planted out;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_int_distribution<int> rel(0, 2);
    auto label = [&](std::size_t v) {
        return std::string(kBlockNames[(v / size) % 6]) + "_" + std::to_string(v / size / 6) + std::to_string(v % size);
    };
    const std::size_t n = blocks * size;
    for (std::size_t v = 0; v < n; ++v)
        out.blocks.emplace_back(label(v), static_cast<std::uint32_t>(v / size));
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = u + 1; v < n; ++v) {
            const bool inside = u / size == v / size;
            const double draw = coin(rng);
            const int r = rel(rng);
            if (draw >= (inside ? p_in : p_out))
                continue;
            out.triples.push_back({label(u), inside ? kBlockRelations[(u / size) % 6][r] : "related_to", label(v)});
        }
    }
    return out;
}

kgdial::KnowledgeGraph build(const std::vector<LabeledTriple>& triples) {
    kgdial::KnowledgeGraph::Builder b;
    for (const auto& t : triples)
        b.add(t.head, t.relation, t.tail);
    return std::move(b).build();
}

std::vector<std::uint32_t> planted_labels(const kgdial::KnowledgeGraph& g, const Planted& p) {
    std::vector<std::uint32_t> labels(g.entity_count(), 0);
    for (const auto& [name, block] : p.blocks)
        if (auto e = g.find_entity(name))
            labels[e->value] = block;
    return labels;
}

void write_tsv(const std::filesystem::path& path, const std::vector<LabeledTriple>& triples) {
    std::ofstream out(path);
    for (const auto& t : triples)
        out << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
}

kgdial::UndirectedGraph barbell() {
    std::vector<kgdial::UndirectedGraph::Edge> edges;
    for (std::uint32_t base : {0u, 3u})
        for (std::uint32_t i = 0; i < 3; ++i)
            for (std::uint32_t j = i + 1; j < 3; ++j)
                edges.push_back({base + i, base + j, 1.0});
    edges.push_back({2, 3, 1.0});
    return kgdial::UndirectedGraph(6, edges);
}

std::vector<SmallGraph> small_graphs() {
    std::vector<SmallGraph> out;
    for (std::uint64_t seed = 0; seed < 120; ++seed) {
        const std::size_t n = 3 + seed % 6;
        const double p = 0.25 + 0.05 * static_cast<double>(seed % 8);
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        std::vector<kgdial::UndirectedGraph::Edge> edges;
        for (std::uint32_t u = 0; u < n; ++u)
            for (std::uint32_t v = u + 1; v < n; ++v)
                if (coin(rng) < p)
                    edges.push_back({u, v, seed % 2 == 1 ? 0.1 + coin(rng) : 1.0});
        if (!edges.empty())
            out.push_back({seed, kgdial::UndirectedGraph(n, edges)});
    }
    return out;
}

std::set<std::uint64_t> known_local_optima() { return {71}; }

TempDir::TempDir(const std::string& tag) {
    static std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("kgdial-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

kgdial::Dialogue make_dialogue(const kgdial::KnowledgeGraph& g, std::string id,
                               const std::vector<kgdial::Triple>& triples) {
    kgdial::Dialogue d(g);
    d.id = std::move(id);
    kgdial::History history;
    for (std::size_t i = 0; i < triples.size(); ++i) {
        const auto& t = triples[i];
        kgdial::WalkStep step;
        step.turn = i + 1;
        step.current = t.head;
        step.relation = t.relation;
        step.next = t.tail;
        step.triple = t;
        const auto edge = kgdial::path_edge(g, step);
        kgdial::DialogueTurn turn;
        turn.index = i + 1;
        turn.question_plan = step;
        turn.question = kgdial::mock_generate(kgdial::make_request(kgdial::Role::question, "(none)", {edge}), 0, 200);
        turn.answer = kgdial::mock_generate(kgdial::make_request(kgdial::Role::answer, "(none)", {edge}), 0, 200);
        turn.answer_entities = {t.tail};
        d.turns.push_back(std::move(turn));
    }
    d.subgraph = kgdial::induced_subgraph(g, triples);
    return d;
}

double adjusted_rand(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, double> joint;
    std::map<std::uint32_t, double> ra, rb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++joint[{a[i], b[i]}];
        ++ra[a[i]];
        ++rb[b[i]];
    }
    auto c2 = [](double x) { return x * (x - 1.0) / 2.0; };
    double index = 0, sa = 0, sb = 0;
    for (const auto& [k, v] : joint)
        index += c2(v);
    for (const auto& [k, v] : ra)
        sa += c2(v);
    for (const auto& [k, v] : rb)
        sb += c2(v);
    const double expected = sa * sb / c2(static_cast<double>(a.size()));
    const double max_index = (sa + sb) / 2.0;
    if (max_index == expected)
        return 1.0;
    return (index - expected) / (max_index - expected);
}

} // namespace fixtures
