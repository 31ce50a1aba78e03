#include "kgdial/kernels.hpp"

#include <algorithm>
#include <unordered_map>

namespace kgdial::kernels {

namespace {

using NgramMap = std::unordered_map<std::string, std::uint64_t>;

NgramMap count_ngrams(const Tokens& tokens, std::size_t order) {
    NgramMap counts;
    if (tokens.size() < order)
        return counts;
    std::string key;
    for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
        key.clear();
        for (std::size_t k = 0; k < order; ++k) {
            if (k)
                key.push_back('\x1f');
            key += tokens[i + k];
        }
        ++counts[key];
    }
    return counts;
}

NgramCounts pair_counts(const Tokens& candidate, const Tokens& reference) {
    NgramCounts c;
    c.candidate_length = candidate.size();
    c.reference_length = reference.size();
    for (std::size_t n = 1; n <= 4; ++n) {
        const auto cand = count_ngrams(candidate, n);
        const auto ref = count_ngrams(reference, n);
        std::uint64_t matched = 0;
        for (const auto& [gram, count] : cand) {
            auto it = ref.find(gram);
            if (it != ref.end())
                matched += std::min(count, it->second);
        }
        c.matched[n - 1] = matched;
        c.candidate_total[n - 1] = candidate.size() >= n ? candidate.size() - n + 1 : 0;
        c.reference_total[n - 1] = reference.size() >= n ? reference.size() - n + 1 : 0;
    }
    return c;
}

double lcs_f1(const Tokens& candidate, const Tokens& reference) {
    if (candidate.empty() && reference.empty())
        return 1.0;
    if (candidate.empty() || reference.empty())
        return 0.0;
    const auto lcs = static_cast<double>(lcs_length(candidate, reference));
    if (lcs == 0.0)
        return 0.0;
    const double precision = lcs / static_cast<double>(candidate.size());
    const double recall = lcs / static_cast<double>(reference.size());
    return 2.0 * precision * recall / (precision + recall);
}

} // namespace

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

void ngram_counts_serial(std::span<const Tokens> candidates, std::span<const Tokens> references,
                         std::span<NgramCounts> out) {
    for (std::size_t i = 0; i < candidates.size(); ++i)
        out[i] = pair_counts(candidates[i], references[i]);
}

void ngram_counts_omp(std::span<const Tokens> candidates, std::span<const Tokens> references,
                      std::span<NgramCounts> out) {
    const auto n = static_cast<std::int64_t>(candidates.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        out[k] = pair_counts(candidates[k], references[k]);
    }
}

void lcs_f1_serial(std::span<const Tokens> candidates, std::span<const Tokens> references,
                   std::span<double> out) {
    for (std::size_t i = 0; i < candidates.size(); ++i)
        out[i] = lcs_f1(candidates[i], references[i]);
}

void lcs_f1_omp(std::span<const Tokens> candidates, std::span<const Tokens> references, std::span<double> out) {
    const auto n = static_cast<std::int64_t>(candidates.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        out[k] = lcs_f1(candidates[k], references[k]);
    }
}

} // namespace kgdial::kernels
