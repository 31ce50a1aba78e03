#pragma once

#include "kgdial/kernels.hpp"

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace kgdial {

inline constexpr double kBleuEpsilon = 1e-9;

/// Corpus BLEU up to `max_order` (1..4) with uniform weights. Zero
/// precisions are floored at kBleuEpsilon; an order with no candidate
/// n-gram anywhere scores 1 when the references have none either.
double bleu(std::span<const kernels::Tokens> candidates, std::span<const kernels::Tokens> references,
            int max_order, Execution exec = Execution::parallel);

/// Mean per-pair LCS F1.
double rouge_l(std::span<const kernels::Tokens> candidates, std::span<const kernels::Tokens> references,
               Execution exec = Execution::parallel);

struct MetricReport {
    std::array<double, 4> bleu{};
    double rouge_l = 0.0;
    std::size_t n_pairs = 0;
};

/// Tokenizes with word_tokens and computes all five scores.
MetricReport evaluate_pairs(std::span<const std::string> candidates, std::span<const std::string> references,
                            Execution exec = Execution::parallel);

/// `outputs`: JSONL {"dialogue_id", "turn", "answer"}; `test_split`: a
/// dialogue JSONL file. Every test turn needs an output; missing keys are
/// listed in the thrown Error.
MetricReport evaluate_run(const std::filesystem::path& outputs, const std::filesystem::path& test_split);

/// "BLEU-1 BLEU-2 BLEU-3 BLEU-4 ROUGE-L" header and one row.
std::string format_report(const MetricReport& report);

} // namespace kgdial
