// Classical Brown clustering baseline: bigram counts, the count-based
// cluster mutual-information objective, the windowed greedy merge
// heuristic, and a brute-force oracle for tiny vocabularies.

#ifndef MIMAX_BROWN_HPP
#define MIMAX_BROWN_HPP

#include <cstdint>
#include <vector>

#include "mimax/corpus.hpp"

namespace mimax::brown {

// Dense square count table over consecutive within-sentence pairs. The
// same shape serves both the word level (size = |V|) and the cluster
// level. Marginals are the row/column sums.
struct BigramTable {
    std::size_t size = 0;
    std::vector<std::int64_t> counts;  // size x size, row = left element
    std::vector<std::int64_t> left;    // row sums
    std::vector<std::int64_t> right;   // column sums
    std::int64_t total = 0;

    explicit BigramTable(std::size_t n = 0)
        : size(n), counts(n * n, 0), left(n, 0), right(n, 0) {}

    std::int64_t at(std::size_t a, std::size_t b) const { return counts[a * size + b]; }
    void add(std::size_t a, std::size_t b, std::int64_t c) {
        counts[a * size + b] += c;
        left[a] += c;
        right[b] += c;
        total += c;
    }
};

// Total map word id -> label in [0, m).
struct Clustering {
    std::vector<std::int32_t> assign;
    std::int32_t num_clusters = 0;
};

// Word-level counts; pairs never cross sentence boundaries.
BigramTable bigram_counts(const std::vector<corpus::Sentence> &sentences,
                          const corpus::Vocab &vocab);

// sum_{c,c'} #(c,c')/N log2( #(c,c') N / (#(c) #(c')) ) over the cluster
// aggregation of the word table; #(c)/#(c') are the left/right cluster
// marginals and empty cells contribute zero.
double brown_objective(const Clustering &clustering, const BigramTable &table);

// Windowed merge heuristic: seed the m most frequent words as singletons,
// then admit remaining words by frequency, merging the best pair of the
// m+1 active clusters after each admission. Ties break toward the
// smallest (i, j) pair of active positions.
Clustering brown_cluster(const BigramTable &table, const corpus::Vocab &vocab, std::int32_t m);

// Number of ways to partition n items into at most m nonempty blocks.
double partition_count(std::size_t n, std::int32_t m);

struct BruteForceResult {
    Clustering clustering;
    double objective = 0.0;
};

// Exhaustive maximization over all clusterings into at most m blocks.
// Refuses instances with more than max_partitions candidate partitions.
BruteForceResult brute_force_clustering(const BigramTable &table, const corpus::Vocab &vocab,
                                        std::int32_t m, double max_partitions = 1e6);

// One "word<TAB>cluster" line per vocabulary entry, in id order.
void save_clustering(const Clustering &clustering, const corpus::Vocab &vocab,
                     const std::string &path);

}  // namespace mimax::brown

#endif  // MIMAX_BROWN_HPP
