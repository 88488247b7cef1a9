// Shared helpers for building tiny random models, corpora, and batches.

#ifndef MIMAX_TESTS_TEST_UTIL_HPP
#define MIMAX_TESTS_TEST_UTIL_HPP

#include <string>
#include <vector>

#include "mimax/corpus.hpp"
#include "mimax/model.hpp"
#include "mimax/objectives.hpp"
#include "mimax/rng.hpp"

namespace testutil {

// A small vocabulary of pronounceable-ish distinct words.
inline std::vector<mimax::corpus::Sentence> random_sentences(mimax::Rng &rng,
                                                             std::size_t num_words,
                                                             std::size_t num_tokens) {
    std::vector<std::string> words(num_words);
    const char *syllables[] = {"ka", "lo", "mi", "ta", "re", "zu", "ne", "po"};
    for (std::size_t w = 0; w < num_words; ++w)
        words[w] = std::string(syllables[w % 8]) + syllables[(w / 8) % 8] + std::to_string(w);

    std::vector<mimax::corpus::Sentence> sentences;
    mimax::corpus::Sentence current;
    for (std::size_t t = 0; t < num_tokens; ++t) {
        current.push_back(words[mimax::uniform_index(rng, num_words)]);
        if (current.size() >= 5 && mimax::uniform_unit(rng) < 0.25) {
            sentences.push_back(current);
            current.clear();
        }
    }
    if (!current.empty()) sentences.push_back(current);
    return sentences;
}

struct TinySetup {
    std::vector<mimax::corpus::Sentence> sentences;
    mimax::corpus::Vocab vocab;
    std::vector<mimax::corpus::ContextWordPair> pairs;
    mimax::model::ModelParams params;
};

// d=6, H=1, m=labels, |V|~num_words: the scale used by the gradient and
// bias checks.
inline TinySetup tiny_setup(std::uint64_t seed, std::size_t num_words = 20,
                            std::size_t num_tokens = 60, int labels = 3, int dim = 6,
                            int window = 1) {
    mimax::Rng rng(seed);
    TinySetup setup;
    setup.sentences = random_sentences(rng, num_words, num_tokens);
    setup.vocab = mimax::corpus::build_vocab(setup.sentences, 1);
    setup.pairs = mimax::corpus::extract_pairs(setup.sentences, setup.vocab, window);
    mimax::model::Hyper hyper;
    hyper.dim = dim;
    hyper.window = window;
    hyper.labels = labels;
    hyper.vocab_size = static_cast<int>(setup.vocab.size());
    hyper.char_count = static_cast<int>(setup.vocab.char_count());
    setup.params = mimax::model::init_params(hyper, rng());
    return setup;
}

inline double objective_value(const mimax::model::ModelParams &params,
                              const mimax::corpus::Batch &batch,
                              const mimax::corpus::Vocab &vocab,
                              mimax::objectives::Objective objective) {
    const mimax::objectives::BatchForward fwd =
        mimax::objectives::batch_forward(params, batch, vocab);
    return objective == mimax::objectives::Objective::variational
               ? mimax::objectives::variational_objective(fwd)
               : mimax::objectives::gen_brown_objective(fwd);
}

// Flat parameter access for finite differences.
inline std::vector<mimax::Matrix *> param_arrays(mimax::model::ModelParams &params) {
    std::vector<mimax::Matrix *> arrays;
    mimax::model::for_each_array(
        params, [&](const std::string &, mimax::Matrix &m) { arrays.push_back(&m); });
    return arrays;
}

inline std::size_t param_count(const mimax::model::ModelParams &params) {
    std::size_t total = 0;
    mimax::model::for_each_array(
        params, [&](const std::string &, const mimax::Matrix &m) { total += m.size(); });
    return total;
}

inline double get_flat(mimax::model::ModelParams &params, std::size_t index) {
    for (mimax::Matrix *m : param_arrays(params)) {
        if (index < m->size()) return m->a[index];
        index -= m->size();
    }
    return 0.0;
}

inline void add_flat(mimax::model::ModelParams &params, std::size_t index, double delta) {
    for (mimax::Matrix *m : param_arrays(params)) {
        if (index < m->size()) {
            m->a[index] += delta;
            return;
        }
        index -= m->size();
    }
}

// Central finite difference of the batch objective along one coordinate.
inline double finite_difference(const mimax::model::ModelParams &params,
                                const mimax::corpus::Batch &batch,
                                const mimax::corpus::Vocab &vocab,
                                mimax::objectives::Objective objective, std::size_t index,
                                double step = 1e-5) {
    mimax::model::ModelParams work = params;
    add_flat(work, index, step);
    const double plus = objective_value(work, batch, vocab, objective);
    add_flat(work, index, -2.0 * step);
    const double minus = objective_value(work, batch, vocab, objective);
    return (plus - minus) / (2.0 * step);
}

}  // namespace testutil

#endif  // MIMAX_TESTS_TEST_UTIL_HPP
