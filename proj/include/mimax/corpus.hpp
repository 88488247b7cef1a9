// Corpus ingestion: vocabulary construction, fixed-window context
// extraction, and minibatch partitioning. The empirical data distribution
// is the uniform distribution over the extracted context-word pairs.

#ifndef MIMAX_CORPUS_HPP
#define MIMAX_CORPUS_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace mimax::corpus {

using Sentence = std::vector<std::string>;

struct TaggedToken {
    std::string token;
    std::string tag;
};

using TaggedSentence = std::vector<TaggedToken>;

// Bidirectional word<->id and char<->id maps with frequency counts.
// Ids 0..2 are reserved for <bos>, <eos>, <unk>; corpus words follow in
// descending frequency order (ties by first occurrence). The character
// inventory is derived from the kept words (sorted code points, id 0
// reserved for unknown characters) so it can be rebuilt from the word list.
struct Vocab {
    static constexpr std::int32_t kBos = 0;
    static constexpr std::int32_t kEos = 1;
    static constexpr std::int32_t kUnk = 2;
    static constexpr std::int32_t kUnkChar = 0;

    std::vector<std::string> id_to_word;
    std::unordered_map<std::string, std::int32_t> word_to_id;
    std::vector<std::int64_t> word_counts;
    std::unordered_map<char32_t, std::int32_t> char_to_id;
    std::vector<char32_t> id_to_char;
    // Character id sequence per word id, precomputed for the encoder.
    std::vector<std::vector<std::int32_t>> char_seqs;

    std::size_t size() const { return id_to_word.size(); }
    std::size_t char_count() const { return id_to_char.size(); }

    // Token lookup with the <unk> fallback.
    std::int32_t id_of(const std::string &token) const {
        auto it = word_to_id.find(token);
        return it == word_to_id.end() ? kUnk : it->second;
    }
};

// One observed sample: 2H context word ids (H left then H right, surface
// order) plus the target word id. gold_tag is -1 when unlabeled and is
// never used in training.
struct ContextWordPair {
    std::vector<std::int32_t> context;
    std::int32_t word = 0;
    std::int32_t gold_tag = -1;
};

struct Batch {
    std::vector<ContextWordPair> pairs;
    std::size_t index = 0;
};

// Decode UTF-8 into code points; bytes that do not form a valid sequence
// are passed through as their own code points.
std::vector<char32_t> decode_utf8(const std::string &s);

// Build the vocabulary. Words with count < min_count map to <unk>.
Vocab build_vocab(const std::vector<Sentence> &sentences, std::int64_t min_count = 1);

// Rebuild the derived character tables from id_to_word/word_counts.
void rebuild_char_tables(Vocab &vocab);

// One pair per token occurrence; windows that cross the sentence edge are
// padded with <bos> on the left and <eos> on the right.
std::vector<ContextWordPair> extract_pairs(const std::vector<Sentence> &sentences,
                                           const Vocab &vocab, int window);
std::vector<ContextWordPair> extract_pairs(const std::vector<TaggedSentence> &sentences,
                                           const Vocab &vocab, int window,
                                           const std::unordered_map<std::string, std::int32_t> &tag_ids);

// Seeded shuffle, then chunks of size batch_size (the last may be smaller).
std::vector<Batch> minibatches(const std::vector<ContextWordPair> &pairs,
                               std::size_t batch_size, std::uint64_t seed);

// One batch per nonempty sentence (ablation baseline).
std::vector<Batch> sentence_batches(const std::vector<Sentence> &sentences,
                                    const Vocab &vocab, int window);

// Format A: UTF-8 text, one sentence per line, single-space separated.
std::vector<Sentence> read_format_a(const std::string &path);

// Format B: "token<TAB>tag" lines, blank line between sentences.
std::vector<TaggedSentence> read_format_b(const std::string &path);

std::vector<Sentence> strip_tags(const std::vector<TaggedSentence> &sentences);

// Vocab file: header line "mimax-vocab v1", then "word<TAB>count" in id order.
void save_vocab(const Vocab &vocab, const std::string &path);
Vocab load_vocab(const std::string &path);
std::string vocab_to_string(const Vocab &vocab);
Vocab vocab_from_string(const std::string &text);

}  // namespace mimax::corpus

#endif  // MIMAX_CORPUS_HPP
