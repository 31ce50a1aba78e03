#include "kgdial/kernels.hpp"

#include <omp.h>

namespace kgdial::kernels {

namespace {

inline bool better(const BestMatch& a, const BestMatch& b) {
    if (a.index < 0)
        return false;
    if (b.index < 0)
        return true;
    return a.similarity > b.similarity || (a.similarity == b.similarity && a.index < b.index);
}

inline std::size_t intersection_size(const TripleSet& a, const TripleSet& b) {
    std::size_t common = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
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
    return common;
}

inline double jaccard(const TripleSet& a, const TripleSet& b) {
    if (a.empty() && b.empty())
        return 0.0;
    const std::size_t common = intersection_size(a, b);
    return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

} // namespace

BestMatch best_cosine_serial(std::span<const double> query, const EmbeddingTable& pool) {
    BestMatch best;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const BestMatch candidate{static_cast<std::ptrdiff_t>(i), cosine(query, pool.row(i))};
        if (better(candidate, best))
            best = candidate;
    }
    return best;
}

BestMatch best_cosine_omp(std::span<const double> query, const EmbeddingTable& pool) {
    const auto n = static_cast<std::int64_t>(pool.size());
    if (n < 2048)
        return best_cosine_serial(query, pool);
    BestMatch best;
#pragma omp parallel
    {
        BestMatch local;
#pragma omp for schedule(static) nowait
        for (std::int64_t i = 0; i < n; ++i) {
            const BestMatch candidate{static_cast<std::ptrdiff_t>(i),
                                      cosine(query, pool.row(static_cast<std::size_t>(i)))};
            if (better(candidate, local))
                local = candidate;
        }
#pragma omp critical(kgdial_best_cosine)
        if (better(local, best))
            best = local;
    }
    return best;
}

void jaccard_pairs_serial(std::span<const TripleSet> sets, std::span<const IndexPair> pairs,
                          std::span<double> out) {
    for (std::size_t i = 0; i < pairs.size(); ++i)
        out[i] = jaccard(sets[pairs[i].first], sets[pairs[i].second]);
}

void jaccard_pairs_omp(std::span<const TripleSet> sets, std::span<const IndexPair> pairs,
                       std::span<double> out) {
    const auto n = static_cast<std::int64_t>(pairs.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t i = 0; i < n; ++i) {
        const auto& p = pairs[static_cast<std::size_t>(i)];
        out[static_cast<std::size_t>(i)] = jaccard(sets[p.first], sets[p.second]);
    }
}

} // namespace kgdial::kernels
