#include "mimax/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "mimax/errors.hpp"
#include "mimax/rng.hpp"

namespace mimax::corpus {

namespace {

const char *kReservedWords[3] = {"<bos>", "<eos>", "<unk>"};
const char *kVocabHeader = "mimax-vocab v1";

}  // namespace

std::vector<char32_t> decode_utf8(const std::string &s) {
    std::vector<char32_t> out;
    std::size_t i = 0;
    const std::size_t n = s.size();
    while (i < n) {
        const unsigned char b0 = static_cast<unsigned char>(s[i]);
        std::size_t len;
        char32_t cp;
        if (b0 < 0x80) {
            len = 1;
            cp = b0;
        } else if ((b0 >> 5) == 0x6) {
            len = 2;
            cp = b0 & 0x1F;
        } else if ((b0 >> 4) == 0xE) {
            len = 3;
            cp = b0 & 0x0F;
        } else if ((b0 >> 3) == 0x1E) {
            len = 4;
            cp = b0 & 0x07;
        } else {
            out.push_back(b0);  // stray continuation or invalid lead byte
            ++i;
            continue;
        }
        if (i + len > n) {
            out.push_back(b0);
            ++i;
            continue;
        }
        bool ok = true;
        for (std::size_t k = 1; k < len; ++k) {
            const unsigned char bk = static_cast<unsigned char>(s[i + k]);
            if ((bk >> 6) != 0x2) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (bk & 0x3F);
        }
        if (!ok) {
            out.push_back(b0);
            ++i;
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

void rebuild_char_tables(Vocab &vocab) {
    std::set<char32_t> chars;
    for (std::size_t id = 3; id < vocab.id_to_word.size(); ++id)
        for (char32_t c : decode_utf8(vocab.id_to_word[id])) chars.insert(c);

    vocab.char_to_id.clear();
    vocab.id_to_char.clear();
    vocab.id_to_char.push_back(U'\0');  // unknown-character slot
    for (char32_t c : chars) {
        vocab.char_to_id[c] = static_cast<std::int32_t>(vocab.id_to_char.size());
        vocab.id_to_char.push_back(c);
    }

    vocab.char_seqs.assign(vocab.id_to_word.size(), {});
    for (std::size_t id = 0; id < vocab.id_to_word.size(); ++id) {
        for (char32_t c : decode_utf8(vocab.id_to_word[id])) {
            auto it = vocab.char_to_id.find(c);
            vocab.char_seqs[id].push_back(it == vocab.char_to_id.end() ? Vocab::kUnkChar
                                                                       : it->second);
        }
    }
}

Vocab build_vocab(const std::vector<Sentence> &sentences, std::int64_t min_count) {
    if (min_count < 1) throw ValidationError("min_count must be >= 1");
    std::unordered_map<std::string, std::int64_t> counts;
    std::unordered_map<std::string, std::size_t> first_seen;
    std::size_t position = 0;
    std::size_t total = 0;
    for (const Sentence &sent : sentences) {
        for (const std::string &tok : sent) {
            auto [it, inserted] = counts.try_emplace(tok, 0);
            it->second += 1;
            if (inserted) first_seen[tok] = position;
            ++position;
            ++total;
        }
    }
    if (total == 0) throw ValidationError("corpus has no tokens");

    std::vector<const std::string *> kept;
    std::int64_t dropped = 0;
    for (const auto &[tok, count] : counts) {
        if (count >= min_count)
            kept.push_back(&tok);
        else
            dropped += count;
    }
    std::sort(kept.begin(), kept.end(), [&](const std::string *a, const std::string *b) {
        const std::int64_t ca = counts[*a], cb = counts[*b];
        if (ca != cb) return ca > cb;
        return first_seen[*a] < first_seen[*b];
    });

    Vocab vocab;
    for (const char *w : kReservedWords) vocab.id_to_word.emplace_back(w);
    vocab.word_counts = {0, 0, dropped};
    for (const std::string *w : kept) {
        vocab.word_to_id[*w] = static_cast<std::int32_t>(vocab.id_to_word.size());
        vocab.id_to_word.push_back(*w);
        vocab.word_counts.push_back(counts[*w]);
    }
    for (std::int32_t r = 0; r < 3; ++r) vocab.word_to_id[kReservedWords[r]] = r;
    rebuild_char_tables(vocab);
    return vocab;
}

namespace {

template <class SentenceT, class TokenId, class GoldTag>
std::vector<ContextWordPair> extract_pairs_impl(const std::vector<SentenceT> &sentences,
                                                int window, TokenId token_id, GoldTag gold_tag) {
    if (window < 1) throw ValidationError("context width H must be >= 1");
    const std::size_t h = static_cast<std::size_t>(window);
    std::vector<ContextWordPair> pairs;
    std::vector<std::int32_t> ids;
    for (const SentenceT &sent : sentences) {
        ids.clear();
        for (const auto &tok : sent) ids.push_back(token_id(tok));
        const std::size_t len = ids.size();
        for (std::size_t t = 0; t < len; ++t) {
            ContextWordPair pair;
            pair.context.resize(2 * h);
            for (std::size_t j = 0; j < h; ++j) {
                const std::size_t back = h - j;
                pair.context[j] = t >= back ? ids[t - back] : Vocab::kBos;
                const std::size_t fwd = t + 1 + j;
                pair.context[h + j] = fwd < len ? ids[fwd] : Vocab::kEos;
            }
            pair.word = ids[t];
            pair.gold_tag = gold_tag(sent[t]);
            pairs.push_back(std::move(pair));
        }
    }
    return pairs;
}

}  // namespace

std::vector<ContextWordPair> extract_pairs(const std::vector<Sentence> &sentences,
                                           const Vocab &vocab, int window) {
    return extract_pairs_impl(
        sentences, window, [&](const std::string &tok) { return vocab.id_of(tok); },
        [](const std::string &) { return -1; });
}

std::vector<ContextWordPair> extract_pairs(const std::vector<TaggedSentence> &sentences,
                                           const Vocab &vocab, int window,
                                           const std::unordered_map<std::string, std::int32_t> &tag_ids) {
    return extract_pairs_impl(
        sentences, window, [&](const TaggedToken &tok) { return vocab.id_of(tok.token); },
        [&](const TaggedToken &tok) {
            auto it = tag_ids.find(tok.tag);
            return it == tag_ids.end() ? -1 : it->second;
        });
}

std::vector<Batch> minibatches(const std::vector<ContextWordPair> &pairs,
                               std::size_t batch_size, std::uint64_t seed) {
    if (pairs.empty()) throw ValidationError("cannot batch an empty pair list");
    if (batch_size < 1) throw ValidationError("batch size must be >= 1");
    Rng rng(seed);
    const std::vector<std::size_t> perm = random_permutation(rng, pairs.size());
    std::vector<Batch> batches;
    for (std::size_t start = 0; start < pairs.size(); start += batch_size) {
        Batch batch;
        batch.index = batches.size();
        const std::size_t end = std::min(start + batch_size, pairs.size());
        batch.pairs.reserve(end - start);
        for (std::size_t i = start; i < end; ++i) batch.pairs.push_back(pairs[perm[i]]);
        batches.push_back(std::move(batch));
    }
    return batches;
}

std::vector<Batch> sentence_batches(const std::vector<Sentence> &sentences,
                                    const Vocab &vocab, int window) {
    std::vector<Batch> batches;
    for (const Sentence &sent : sentences) {
        if (sent.empty()) continue;
        Batch batch;
        batch.index = batches.size();
        batch.pairs = extract_pairs(std::vector<Sentence>{sent}, vocab, window);
        batches.push_back(std::move(batch));
    }
    return batches;
}

std::vector<Sentence> read_format_a(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open corpus file: " + path);
    std::vector<Sentence> sentences;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        Sentence sent;
        std::size_t start = 0;
        while (start <= line.size()) {
            std::size_t end = line.find(' ', start);
            if (end == std::string::npos) end = line.size();
            if (end > start) sent.emplace_back(line.substr(start, end - start));
            start = end + 1;
        }
        if (!sent.empty()) sentences.push_back(std::move(sent));
    }
    return sentences;
}

std::vector<TaggedSentence> read_format_b(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open labeled file: " + path);
    std::vector<TaggedSentence> sentences;
    TaggedSentence current;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            if (!current.empty()) sentences.push_back(std::move(current));
            current.clear();
            continue;
        }
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size())
            throw FormatError(path + ":" + std::to_string(line_no) +
                              ": expected \"token<TAB>tag\"");
        current.push_back({line.substr(0, tab), line.substr(tab + 1)});
    }
    if (!current.empty()) sentences.push_back(std::move(current));
    return sentences;
}

std::vector<Sentence> strip_tags(const std::vector<TaggedSentence> &sentences) {
    std::vector<Sentence> out;
    out.reserve(sentences.size());
    for (const TaggedSentence &sent : sentences) {
        Sentence s;
        s.reserve(sent.size());
        for (const TaggedToken &tok : sent) s.push_back(tok.token);
        out.push_back(std::move(s));
    }
    return out;
}

std::string vocab_to_string(const Vocab &vocab) {
    std::ostringstream out;
    out << kVocabHeader << "\n";
    for (std::size_t id = 0; id < vocab.id_to_word.size(); ++id)
        out << vocab.id_to_word[id] << "\t" << vocab.word_counts[id] << "\n";
    return out.str();
}

Vocab vocab_from_string(const std::string &text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kVocabHeader)
        throw FormatError("bad vocab header: expected \"" + std::string(kVocabHeader) + "\"");
    Vocab vocab;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::size_t tab = line.rfind('\t');
        if (tab == std::string::npos)
            throw FormatError("vocab line " + std::to_string(line_no) + ": missing tab");
        const std::string word = line.substr(0, tab);
        std::int64_t count;
        try {
            count = std::stoll(line.substr(tab + 1));
        } catch (const std::exception &) {
            throw FormatError("vocab line " + std::to_string(line_no) + ": bad count");
        }
        const auto id = static_cast<std::int32_t>(vocab.id_to_word.size());
        vocab.id_to_word.push_back(word);
        vocab.word_counts.push_back(count);
        vocab.word_to_id[word] = id;
    }
    if (vocab.id_to_word.size() < 3)
        throw FormatError("vocab file is missing the reserved entries");
    for (std::int32_t r = 0; r < 3; ++r) {
        if (vocab.id_to_word[r] != kReservedWords[r])
            throw FormatError("vocab id " + std::to_string(r) + " must be " +
                              kReservedWords[r]);
        vocab.word_to_id[kReservedWords[r]] = r;
    }
    rebuild_char_tables(vocab);
    return vocab;
}

void save_vocab(const Vocab &vocab, const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write vocab file: " + path);
    out << vocab_to_string(vocab);
}

Vocab load_vocab(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open vocab file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return vocab_from_string(buf.str());
}

}  // namespace mimax::corpus
