#include "kgdial/metrics.hpp"

#include "kgdial/error.hpp"
#include "kgdial/serialize.hpp"
#include "kgdial/tokenize.hpp"

#include <cmath>
#include <map>

#include <fmt/format.h>

namespace kgdial {

namespace {

void check_corpus(std::size_t candidates, std::size_t references) {
    if (candidates == 0)
        throw Error("empty corpus");
    if (candidates != references)
        throw Error(fmt::format("corpus size mismatch: {} candidates, {} references", candidates, references));
}

} // namespace

double bleu(std::span<const kernels::Tokens> candidates, std::span<const kernels::Tokens> references, int max_order,
            Execution exec) {
    check_corpus(candidates.size(), references.size());
    if (max_order < 1 || max_order > 4)
        throw Error("BLEU order must be in 1..4");
    std::vector<kernels::NgramCounts> per_pair(candidates.size());
    if (exec == Execution::parallel)
        kernels::ngram_counts_omp(candidates, references, per_pair);
    else
        kernels::ngram_counts_serial(candidates, references, per_pair);

    kernels::NgramCounts total;
    for (const auto& c : per_pair) {
        for (std::size_t n = 0; n < 4; ++n) {
            total.matched[n] += c.matched[n];
            total.candidate_total[n] += c.candidate_total[n];
            total.reference_total[n] += c.reference_total[n];
        }
        total.candidate_length += c.candidate_length;
        total.reference_length += c.reference_length;
    }

    double log_sum = 0.0;
    for (int n = 0; n < max_order; ++n) {
        double p;
        if (total.candidate_total[n] == 0)
            p = total.reference_total[n] == 0 ? 1.0 : kBleuEpsilon;
        else
            p = std::max(static_cast<double>(total.matched[n]) / static_cast<double>(total.candidate_total[n]),
                         kBleuEpsilon);
        log_sum += std::log(p);
    }
    const double c = static_cast<double>(total.candidate_length);
    const double r = static_cast<double>(total.reference_length);
    double bp = 1.0;
    if (c < r)
        bp = c == 0.0 ? 0.0 : std::exp(1.0 - r / c);
    return bp * std::exp(log_sum / max_order);
}

double rouge_l(std::span<const kernels::Tokens> candidates, std::span<const kernels::Tokens> references,
               Execution exec) {
    check_corpus(candidates.size(), references.size());
    std::vector<double> scores(candidates.size());
    if (exec == Execution::parallel)
        kernels::lcs_f1_omp(candidates, references, scores);
    else
        kernels::lcs_f1_serial(candidates, references, scores);
    double sum = 0.0;
    for (double s : scores)
        sum += s;
    return sum / static_cast<double>(scores.size());
}

MetricReport evaluate_pairs(std::span<const std::string> candidates, std::span<const std::string> references,
                            Execution exec) {
    check_corpus(candidates.size(), references.size());
    std::vector<kernels::Tokens> cand(candidates.size()), ref(references.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        cand[i] = word_tokens(candidates[i]);
        ref[i] = word_tokens(references[i]);
    }
    MetricReport report;
    for (int n = 1; n <= 4; ++n)
        report.bleu[static_cast<std::size_t>(n - 1)] = bleu(cand, ref, n, exec);
    report.rouge_l = rouge_l(cand, ref, exec);
    report.n_pairs = candidates.size();
    return report;
}

MetricReport evaluate_run(const std::filesystem::path& outputs, const std::filesystem::path& test_split) {
    using Key = std::pair<std::string, std::size_t>;
    std::map<Key, std::string> produced;
    json::for_each_record(outputs, [&](const nlohmann::json& j, std::size_t) {
        produced[{j.at("dialogue_id").get<std::string>(), j.at("turn").get<std::size_t>()}] =
            j.at("answer").get<std::string>();
    });

    std::vector<std::string> candidates, references, missing;
    json::for_each_record(test_split, [&](const nlohmann::json& j, std::size_t) {
        const auto id = j.at("id").get<std::string>();
        for (const auto& turn : j.at("turns")) {
            const auto index = turn.at("index").get<std::size_t>();
            auto it = produced.find({id, index});
            if (it == produced.end()) {
                missing.push_back(fmt::format("({}, {})", id, index));
                continue;
            }
            candidates.push_back(it->second);
            references.push_back(turn.at("answer").get<std::string>());
        }
    });
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing)
            list += (list.empty() ? "" : ", ") + m;
        throw Error(fmt::format("model outputs missing {} turn(s): {}", missing.size(), list));
    }
    return evaluate_pairs(candidates, references);
}

std::string format_report(const MetricReport& r) {
    return fmt::format("{:>8} {:>8} {:>8} {:>8} {:>8}\n{:>8.3f} {:>8.3f} {:>8.3f} {:>8.3f} {:>8.3f}\n", "BLEU-1",
                       "BLEU-2", "BLEU-3", "BLEU-4", "ROUGE-L", r.bleu[0], r.bleu[1], r.bleu[2], r.bleu[3], r.rouge_l);
}

} // namespace kgdial
