#include "kgdial/serialize.hpp"

#include "kgdial/error.hpp"

#include <fstream>

namespace kgdial::json {

nlohmann::json triple(const KnowledgeGraph& g, const Triple& t) {
    return nlohmann::json::array({g.label(t.head), g.label(t.relation), g.label(t.tail)});
}

Triple triple(const KnowledgeGraph& g, const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 3)
        throw Error("triple must be a [head, relation, tail] array");
    const Triple t{g.entity(j[0].get<std::string>()), g.relation(j[1].get<std::string>()),
                   g.entity(j[2].get<std::string>())};
    if (!g.contains(t))
        throw Error("triple not in graph: " + j.dump());
    return t;
}

nlohmann::json step(const KnowledgeGraph& g, const WalkStep& s) {
    nlohmann::json expansions = nlohmann::json::array();
    for (const Expansion& x : s.expansions)
        expansions.push_back({{"entity", g.label(x.entity)},
                              {"relation", g.label(x.relation)},
                              {"similarity", x.similarity},
                              {"triple", triple(g, x.triple)}});
    return {{"turn", s.turn},
            {"current", g.label(s.current)},
            {"relation", g.label(s.relation)},
            {"next", g.label(s.next)},
            {"weight", s.weight},
            {"triple", triple(g, s.triple)},
            {"expansions", expansions}};
}

WalkStep step(const KnowledgeGraph& g, const nlohmann::json& j) {
    WalkStep s;
    s.turn = j.at("turn").get<std::size_t>();
    s.current = g.entity(j.at("current").get<std::string>());
    s.relation = g.relation(j.at("relation").get<std::string>());
    s.next = g.entity(j.at("next").get<std::string>());
    s.weight = j.at("weight").get<double>();
    s.triple = triple(g, j.at("triple"));
    for (const auto& x : j.at("expansions"))
        s.expansions.push_back({g.entity(x.at("entity").get<std::string>()),
                                g.relation(x.at("relation").get<std::string>()), x.at("similarity").get<double>(),
                                triple(g, x.at("triple"))});
    return s;
}

void for_each_record(const std::filesystem::path& path,
                     const std::function<void(const nlohmann::json&, std::size_t)>& on_record) {
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        try {
            on_record(nlohmann::json::parse(line), line_no);
        } catch (const ParseError&) {
            throw;
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string(), line_no, e.what());
        } catch (const Error& e) {
            throw ParseError(path.string(), line_no, e.what());
        }
    }
}

} // namespace kgdial::json
