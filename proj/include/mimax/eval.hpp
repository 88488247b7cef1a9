// Unsupervised tagging evaluation: many-to-one mapping accuracy and the
// V-measure, both from a token-level contingency table.

#ifndef MIMAX_EVAL_HPP
#define MIMAX_EVAL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "mimax/corpus.hpp"
#include "mimax/model.hpp"

namespace mimax::eval {

// counts[label][tag] over evaluated tokens.
struct Contingency {
    std::size_t num_labels = 0;
    std::size_t num_tags = 0;
    std::vector<std::int64_t> counts;
    std::int64_t total = 0;

    std::int64_t at(std::size_t z, std::size_t t) const { return counts[z * num_tags + t]; }
};

// Sizes are inferred from the sequences when passed as zero.
Contingency contingency(const std::vector<int> &induced, const std::vector<int> &gold,
                        std::size_t num_labels = 0, std::size_t num_tags = 0);

// Map each induced label to its most frequent gold tag (ties toward the
// lower tag id); several labels may share a tag.
std::vector<int> m2o_mapping(const Contingency &c);
double many_to_one(const Contingency &c);

// Rosenberg-Hirschberg V-measure with beta = 1, entropies in bits.
// Conventions: homogeneity 1 when H(gold) = 0, completeness 1 when
// H(induced) = 0, V = 0 when both degenerate.
double v_measure(const Contingency &c);

struct Report {
    double m2o = 0.0;
    double v = 0.0;
    std::int64_t n_tokens = 0;
    int num_labels = 0;
    int num_gold_tags = 0;
    std::vector<int> mapping;            // label -> tag id
    std::vector<std::string> tag_names;  // tag id -> name
};

// Induce one label per token (type-level: argmax_z q(z|y) depends only on
// the word), build the contingency over all tokens, report both metrics.
Report evaluate_model(const model::ModelParams &params, const corpus::Vocab &vocab,
                      const std::vector<corpus::TaggedSentence> &labeled);

std::string report_json(const Report &report);

}  // namespace mimax::eval

#endif  // MIMAX_EVAL_HPP
