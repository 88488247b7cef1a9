// Synthetic tagged corpus from a hidden Markov chain with diagonally
// dominant transitions and block-sparse emissions: each state owns a
// disjoint slice of the vocabulary and emits inside it with probability
// in_block_mass. A desk-scale stand-in for licensed treebanks.

#ifndef MIMAX_SYNTH_HPP
#define MIMAX_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "mimax/corpus.hpp"

namespace mimax::synth {

struct SynthConfig {
    int states = 5;
    int vocab = 150;
    std::int64_t tokens = 30000;
    std::uint64_t seed = 0;
    double self_transition = 0.6;
    double in_block_mass = 0.95;
    int min_sentence_len = 8;
    int max_sentence_len = 25;
};

// Sentences of (token, tag) pairs; token count is exactly config.tokens.
std::vector<corpus::TaggedSentence> generate(const SynthConfig &config);

// prefix + ".labeled" (format B) and prefix + ".txt" (format A).
void write_files(const std::vector<corpus::TaggedSentence> &sentences,
                 const std::string &prefix);

}  // namespace mimax::synth

#endif  // MIMAX_SYNTH_HPP
