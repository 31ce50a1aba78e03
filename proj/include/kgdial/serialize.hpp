#pragma once

// JSON helpers shared by the line-delimited artifact formats.

#include "kgdial/graph.hpp"
#include "kgdial/walker.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace kgdial::json {

nlohmann::json triple(const KnowledgeGraph& g, const Triple& t);
/// Throws kgdial::Error for unknown labels or a triple absent from `g`.
Triple triple(const KnowledgeGraph& g, const nlohmann::json& j);

nlohmann::json step(const KnowledgeGraph& g, const WalkStep& s);
WalkStep step(const KnowledgeGraph& g, const nlohmann::json& j);

/// Calls `on_record(json, line_no)` for every non-blank line. JSON and
/// kgdial errors are rethrown as ParseError with the line number.
void for_each_record(const std::filesystem::path& path,
                     const std::function<void(const nlohmann::json&, std::size_t)>& on_record);

} // namespace kgdial::json
