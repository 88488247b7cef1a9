#include "mimax/synth.hpp"

#include <fstream>

#include "mimax/errors.hpp"
#include "mimax/rng.hpp"

namespace mimax::synth {

std::vector<corpus::TaggedSentence> generate(const SynthConfig &config) {
    if (config.states < 1 || config.vocab < config.states || config.tokens < 1)
        throw ValidationError("synth needs states >= 1, vocab >= states, tokens >= 1");
    if (config.min_sentence_len < 1 || config.max_sentence_len < config.min_sentence_len)
        throw ValidationError("synth sentence length bounds are inconsistent");
    if (config.self_transition < 0.0 || config.self_transition > 1.0 ||
        config.in_block_mass <= 0.0 || config.in_block_mass > 1.0)
        throw ValidationError("synth probabilities must lie in [0, 1]");

    const auto states = static_cast<std::size_t>(config.states);
    const auto vocab = static_cast<std::size_t>(config.vocab);
    const std::size_t block = (vocab + states - 1) / states;

    // Zero-padded names keep the block id visible in the token surface.
    int width = 1;
    for (std::size_t v = vocab - 1; v >= 10; v /= 10) ++width;
    std::vector<std::string> words(vocab);
    for (std::size_t w = 0; w < vocab; ++w) {
        std::string digits = std::to_string(w);
        words[w] = "w" + std::string(static_cast<std::size_t>(width) - digits.size(), '0') + digits;
    }
    std::vector<std::string> tags(states);
    for (std::size_t s = 0; s < states; ++s) tags[s] = "T" + std::to_string(s);

    // Emission weights per state: in_block_mass spread over the state's
    // block, the rest over everything else.
    std::vector<std::vector<double>> emission(states, std::vector<double>(vocab, 0.0));
    for (std::size_t s = 0; s < states; ++s) {
        const std::size_t lo = s * block;
        const std::size_t hi = std::min(lo + block, vocab);
        const std::size_t inside = hi - lo;
        const std::size_t outside = vocab - inside;
        for (std::size_t w = 0; w < vocab; ++w) {
            const bool in = w >= lo && w < hi;
            emission[s][w] = in ? config.in_block_mass / static_cast<double>(inside)
                               : (outside == 0 ? 0.0
                                               : (1.0 - config.in_block_mass) /
                                                     static_cast<double>(outside));
        }
    }
    std::vector<std::vector<double>> transition(states, std::vector<double>(states, 0.0));
    for (std::size_t s = 0; s < states; ++s) {
        for (std::size_t t = 0; t < states; ++t) {
            transition[s][t] = states == 1 ? 1.0
                               : (s == t ? config.self_transition
                                         : (1.0 - config.self_transition) /
                                               static_cast<double>(states - 1));
        }
    }

    Rng rng(config.seed);
    std::vector<corpus::TaggedSentence> sentences;
    std::int64_t emitted = 0;
    while (emitted < config.tokens) {
        const std::int64_t want =
            config.min_sentence_len +
            static_cast<std::int64_t>(uniform_index(
                rng, static_cast<std::uint64_t>(config.max_sentence_len -
                                                config.min_sentence_len + 1)));
        const std::int64_t len = std::min(want, config.tokens - emitted);
        corpus::TaggedSentence sent;
        // Each sentence restarts the chain from a uniform state.
        std::size_t state = static_cast<std::size_t>(uniform_index(rng, states));
        for (std::int64_t t = 0; t < len; ++t) {
            if (t > 0) state = weighted_index(rng, transition[state]);
            const std::size_t word = weighted_index(rng, emission[state]);
            sent.push_back({words[word], tags[state]});
        }
        emitted += len;
        sentences.push_back(std::move(sent));
    }
    return sentences;
}

void write_files(const std::vector<corpus::TaggedSentence> &sentences,
                 const std::string &prefix) {
    std::ofstream labeled(prefix + ".labeled", std::ios::binary);
    std::ofstream plain(prefix + ".txt", std::ios::binary);
    if (!labeled || !plain)
        throw FormatError("cannot write synth output files with prefix: " + prefix);
    for (std::size_t s = 0; s < sentences.size(); ++s) {
        if (s > 0) labeled << "\n";
        for (std::size_t t = 0; t < sentences[s].size(); ++t) {
            labeled << sentences[s][t].token << "\t" << sentences[s][t].tag << "\n";
            plain << (t > 0 ? " " : "") << sentences[s][t].token;
        }
        plain << "\n";
    }
}

}  // namespace mimax::synth
