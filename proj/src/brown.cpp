#include "mimax/brown.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "mimax/errors.hpp"

namespace mimax::brown {

namespace {

// MI in bits of a count table cell against marginals.
inline double mi_term(std::int64_t cell, std::int64_t left, std::int64_t right,
                      std::int64_t total) {
    if (cell <= 0) return 0.0;
    const double n = static_cast<double>(cell);
    const double ratio = n * static_cast<double>(total) /
                         (static_cast<double>(left) * static_cast<double>(right));
    return n / static_cast<double>(total) * std::log2(ratio);
}

double table_mi(const BigramTable &table) {
    double mi = 0.0;
    for (std::size_t a = 0; a < table.size; ++a)
        for (std::size_t b = 0; b < table.size; ++b)
            mi += mi_term(table.at(a, b), table.left[a], table.right[b], table.total);
    return mi;
}

}  // namespace

BigramTable bigram_counts(const std::vector<corpus::Sentence> &sentences,
                          const corpus::Vocab &vocab) {
    if (sentences.empty()) throw ValidationError("corpus is empty");
    BigramTable table(vocab.size());
    for (const corpus::Sentence &sent : sentences) {
        for (std::size_t t = 1; t < sent.size(); ++t) {
            const auto a = static_cast<std::size_t>(vocab.id_of(sent[t - 1]));
            const auto b = static_cast<std::size_t>(vocab.id_of(sent[t]));
            table.add(a, b, 1);
        }
    }
    return table;
}

double brown_objective(const Clustering &clustering, const BigramTable &table) {
    if (clustering.assign.size() != table.size)
        throw ValidationError("clustering covers " + std::to_string(clustering.assign.size()) +
                              " words, table has " + std::to_string(table.size));
    const auto c = static_cast<std::size_t>(clustering.num_clusters);
    BigramTable agg(c);
    for (std::size_t a = 0; a < table.size; ++a) {
        const auto ca = static_cast<std::size_t>(clustering.assign[a]);
        for (std::size_t b = 0; b < table.size; ++b) {
            const std::int64_t n = table.at(a, b);
            if (n != 0) agg.add(ca, static_cast<std::size_t>(clustering.assign[b]), n);
        }
    }
    return table_mi(agg);
}

namespace {

// Greedy merge state: members per active cluster and the aggregated
// cluster bigram table over the admitted words.
struct MergeState {
    const BigramTable &words;
    std::vector<std::vector<std::int32_t>> members;
    std::vector<std::int32_t> admitted;
    BigramTable table{0};

    explicit MergeState(const BigramTable &word_table) : words(word_table) {}

    void rebuild_table() {
        table = BigramTable(members.size());
        std::vector<std::int32_t> cluster_of(words.size, -1);
        for (std::size_t c = 0; c < members.size(); ++c)
            for (std::int32_t w : members[c]) cluster_of[static_cast<std::size_t>(w)] =
                static_cast<std::int32_t>(c);
        for (std::int32_t a : admitted) {
            const auto ca = static_cast<std::size_t>(cluster_of[static_cast<std::size_t>(a)]);
            for (std::int32_t b : admitted) {
                const std::int64_t n = words.at(static_cast<std::size_t>(a),
                                                static_cast<std::size_t>(b));
                if (n != 0)
                    table.add(ca, static_cast<std::size_t>(cluster_of[static_cast<std::size_t>(b)]), n);
            }
        }
    }

    void admit(std::int32_t word) {
        members.push_back({word});
        admitted.push_back(word);
        rebuild_table();
    }

    // Objective after folding cluster j into cluster i, without mutating.
    double merged_mi(std::size_t i, std::size_t j) const {
        double mi = 0.0;
        for (std::size_t a = 0; a < table.size; ++a) {
            if (a == j) continue;
            const std::int64_t la = table.left[a] + (a == i ? table.left[j] : 0);
            for (std::size_t b = 0; b < table.size; ++b) {
                if (b == j) continue;
                const std::int64_t rb = table.right[b] + (b == i ? table.right[j] : 0);
                std::int64_t n = table.at(a, b);
                if (a == i) n += table.at(j, b);
                if (b == i) n += table.at(a, j);
                if (a == i && b == i) n += table.at(j, j);
                mi += mi_term(n, la, rb, table.total);
            }
        }
        return mi;
    }

    void merge(std::size_t i, std::size_t j) {
        members[i].insert(members[i].end(), members[j].begin(), members[j].end());
        members.erase(members.begin() + static_cast<std::ptrdiff_t>(j));
        rebuild_table();
    }

    // Best pair by highest post-merge objective; ties to the smallest
    // (i, j) scan position.
    std::pair<std::size_t, std::size_t> best_merge() const {
        std::size_t best_i = 0, best_j = 1;
        double best = -1.0;
        bool first = true;
        for (std::size_t i = 0; i + 1 < members.size(); ++i) {
            for (std::size_t j = i + 1; j < members.size(); ++j) {
                const double mi = merged_mi(i, j);
                if (first || mi > best) {
                    best = mi;
                    best_i = i;
                    best_j = j;
                    first = false;
                }
            }
        }
        return {best_i, best_j};
    }
};

}  // namespace

Clustering brown_cluster(const BigramTable &table, const corpus::Vocab &vocab, std::int32_t m) {
    if (m < 1) throw ValidationError("cluster count m must be >= 1");
    if (table.size != vocab.size())
        throw ValidationError("bigram table size does not match the vocabulary");

    std::vector<std::int32_t> order(vocab.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
        return vocab.word_counts[static_cast<std::size_t>(a)] >
               vocab.word_counts[static_cast<std::size_t>(b)];
    });

    MergeState state(table);
    const std::size_t seeds = std::min<std::size_t>(static_cast<std::size_t>(m), order.size());
    for (std::size_t r = 0; r < seeds; ++r) state.admit(order[r]);
    for (std::size_t r = seeds; r < order.size(); ++r) {
        state.admit(order[r]);
        const auto [i, j] = state.best_merge();
        state.merge(i, j);
    }

    Clustering clustering;
    clustering.assign.assign(vocab.size(), 0);
    clustering.num_clusters = static_cast<std::int32_t>(state.members.size());
    for (std::size_t c = 0; c < state.members.size(); ++c)
        for (std::int32_t w : state.members[c])
            clustering.assign[static_cast<std::size_t>(w)] = static_cast<std::int32_t>(c);
    return clustering;
}

double partition_count(std::size_t n, std::int32_t m) {
    if (n == 0) return 1.0;
    const std::size_t cap = std::min<std::size_t>(static_cast<std::size_t>(m), n);
    // Stirling numbers of the second kind, S(r, k).
    std::vector<std::vector<double>> stirling(n + 1, std::vector<double>(cap + 1, 0.0));
    stirling[0][0] = 1.0;
    for (std::size_t r = 1; r <= n; ++r)
        for (std::size_t k = 1; k <= cap; ++k)
            stirling[r][k] = static_cast<double>(k) * stirling[r - 1][k] + stirling[r - 1][k - 1];
    double count = 0.0;
    for (std::size_t k = 1; k <= cap; ++k) count += stirling[n][k];
    return count;
}

BruteForceResult brute_force_clustering(const BigramTable &table, const corpus::Vocab &vocab,
                                        std::int32_t m, double max_partitions) {
    if (m < 1) throw ValidationError("cluster count m must be >= 1");
    if (table.size != vocab.size())
        throw ValidationError("bigram table size does not match the vocabulary");
    std::vector<std::size_t> relevant;
    for (std::size_t w = 0; w < table.size; ++w)
        if (table.left[w] + table.right[w] > 0) relevant.push_back(w);
    const std::size_t n = relevant.size();
    const double count = partition_count(n, m);
    if (count > max_partitions)
        throw ValidationError("brute-force refused: " + std::to_string(count) +
                              " partitions exceed the limit of " + std::to_string(max_partitions));

    // Nonzero word-level cells among relevant words.
    struct Cell {
        std::size_t a, b;
        std::int64_t n;
    };
    std::vector<Cell> cells;
    for (std::size_t ia = 0; ia < n; ++ia)
        for (std::size_t ib = 0; ib < n; ++ib) {
            const std::int64_t v = table.at(relevant[ia], relevant[ib]);
            if (v != 0) cells.push_back({ia, ib, v});
        }

    const auto cap = static_cast<std::int32_t>(std::min<std::size_t>(
        static_cast<std::size_t>(m), n == 0 ? 1 : n));
    std::vector<std::int32_t> labels(n, 0);
    std::vector<std::int64_t> agg(static_cast<std::size_t>(m) * static_cast<std::size_t>(m));
    std::vector<std::int64_t> left(static_cast<std::size_t>(m));
    std::vector<std::int64_t> right(static_cast<std::size_t>(m));

    BruteForceResult best;
    best.objective = -1.0;
    auto evaluate = [&]() {
        std::fill(agg.begin(), agg.end(), 0);
        std::fill(left.begin(), left.end(), 0);
        std::fill(right.begin(), right.end(), 0);
        for (const Cell &cell : cells) {
            const auto ca = static_cast<std::size_t>(labels[cell.a]);
            const auto cb = static_cast<std::size_t>(labels[cell.b]);
            agg[ca * static_cast<std::size_t>(m) + cb] += cell.n;
            left[ca] += cell.n;
            right[cb] += cell.n;
        }
        double mi = 0.0;
        for (std::size_t a = 0; a < static_cast<std::size_t>(m); ++a)
            for (std::size_t b = 0; b < static_cast<std::size_t>(m); ++b)
                mi += mi_term(agg[a * static_cast<std::size_t>(m) + b], left[a], right[b],
                              table.total);
        if (mi > best.objective) {
            best.objective = mi;
            best.clustering.assign.assign(table.size, 0);
            best.clustering.num_clusters = m;
            for (std::size_t i = 0; i < n; ++i)
                best.clustering.assign[relevant[i]] = labels[i];
        }
    };

    // Restricted growth strings: labels[i] <= 1 + max(labels[0..i-1]), < cap.
    auto enumerate = [&](auto &&self, std::size_t i, std::int32_t used) -> void {
        if (i == n) {
            evaluate();
            return;
        }
        const std::int32_t top = std::min(used + 1, cap);
        for (std::int32_t label = 0; label < top; ++label) {
            labels[i] = label;
            self(self, i + 1, std::max(used, label + 1));
        }
    };
    if (n == 0) {
        best.objective = 0.0;
        best.clustering.assign.assign(table.size, 0);
        best.clustering.num_clusters = m;
    } else {
        enumerate(enumerate, 0, 0);
    }
    return best;
}

void save_clustering(const Clustering &clustering, const corpus::Vocab &vocab,
                     const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write clustering file: " + path);
    for (std::size_t w = 0; w < vocab.size(); ++w)
        out << vocab.id_to_word[w] << "\t" << clustering.assign[w] << "\n";
}

}  // namespace mimax::brown
