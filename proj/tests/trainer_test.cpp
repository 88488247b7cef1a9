#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "mimax/errors.hpp"
#include "mimax/trainer.hpp"
#include "test_util.hpp"

using namespace mimax;
using namespace mimax::trainer;

namespace {

std::vector<corpus::Sentence> small_corpus() {
    Rng rng(31);
    return testutil::random_sentences(rng, 12, 120);
}

TrainConfig small_config() {
    TrainConfig config;
    config.dim = 6;
    config.window = 1;
    config.labels = 3;
    config.batch_size = 16;
    config.epochs = 2;
    config.restarts = 2;
    config.seed = 5;
    return config;
}

std::string temp_path(const std::string &name) {
    return std::string("/tmp/mimax_trainer_test_") + name;
}

}  // namespace

TEST_CASE("training is deterministic") {
    const auto sentences = small_corpus();
    const corpus::Vocab vocab = corpus::build_vocab(sentences, 1);
    const TrainConfig config = small_config();
    const TrainResult a = train(config, sentences, vocab);
    const TrainResult b = train(config, sentences, vocab);
    CHECK(a.best_restart == b.best_restart);
    CHECK(model::same_values(a.best_params, b.best_params));
    REQUIRE(a.logs.size() == b.logs.size());
    for (std::size_t r = 0; r < a.logs.size(); ++r) {
        CHECK(a.logs[r].final_objective == b.logs[r].final_objective);
        REQUIRE(a.logs[r].epochs.size() == b.logs[r].epochs.size());
        for (std::size_t e = 0; e < a.logs[r].epochs.size(); ++e)
            CHECK(a.logs[r].epochs[e].objective == b.logs[r].epochs[e].objective);
    }
}

TEST_CASE("parallel restarts match serial restarts") {
    const auto sentences = small_corpus();
    const corpus::Vocab vocab = corpus::build_vocab(sentences, 1);
    TrainConfig config = small_config();
    const TrainResult serial = train(config, sentences, vocab);
    config.workers = 2;
    const TrainResult parallel = train(config, sentences, vocab);
    CHECK(serial.best_restart == parallel.best_restart);
    CHECK(model::same_values(serial.best_params, parallel.best_params));
}

TEST_CASE("a single-restart run reproduces that restart") {
    const auto sentences = small_corpus();
    const corpus::Vocab vocab = corpus::build_vocab(sentences, 1);
    TrainConfig config = small_config();
    config.keep_restart_params = true;
    const TrainResult multi = train(config, sentences, vocab);

    TrainConfig single = config;
    single.restarts = 1;
    single.seed = config.seed + 1;  // restart index 1
    const TrainResult repro = train(single, sentences, vocab);
    CHECK(model::same_values(repro.best_params, multi.restart_params[1]));
}

TEST_CASE("epoch zero logs the pre-training objective") {
    const auto sentences = small_corpus();
    const corpus::Vocab vocab = corpus::build_vocab(sentences, 1);
    TrainConfig config = small_config();
    config.epochs = 0;
    config.restarts = 1;
    const TrainResult result = train(config, sentences, vocab);
    REQUIRE(result.logs[0].epochs.size() == 1);
    CHECK(result.logs[0].epochs[0].epoch == 0);
    CHECK(result.logs[0].final_objective == result.logs[0].epochs[0].objective);
}

TEST_CASE("training improves the variational objective on this corpus") {
    const auto sentences = small_corpus();
    const corpus::Vocab vocab = corpus::build_vocab(sentences, 1);
    TrainConfig config = small_config();
    config.epochs = 5;
    config.restarts = 1;
    const TrainResult result = train(config, sentences, vocab);
    const auto &epochs = result.logs[0].epochs;
    CHECK(epochs.back().objective > epochs.front().objective);
}

TEST_CASE("sentence batching trains") {
    const auto sentences = small_corpus();
    const corpus::Vocab vocab = corpus::build_vocab(sentences, 1);
    TrainConfig config = small_config();
    config.batching = Batching::sentence;
    config.epochs = 1;
    config.restarts = 1;
    const TrainResult result = train(config, sentences, vocab);
    CHECK(!result.logs[0].aborted);
}

TEST_CASE("train log is line-delimited json") {
    const auto sentences = small_corpus();
    const corpus::Vocab vocab = corpus::build_vocab(sentences, 1);
    TrainConfig config = small_config();
    config.epochs = 1;
    const TrainResult result = train(config, sentences, vocab);
    const std::string path = temp_path("log.jsonl");
    write_train_log(result.logs, path);
    std::ifstream in(path);
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) {
        CHECK(line.front() == '{');
        CHECK(line.back() == '}');
        ++lines;
    }
    // Two restarts x (2 epoch records + 1 summary).
    CHECK(lines == 6);
    std::remove(path.c_str());
}

TEST_CASE("model file round trip is exact") {
    const auto sentences = small_corpus();
    const corpus::Vocab vocab = corpus::build_vocab(sentences, 1);
    model::Hyper hyper;
    hyper.dim = 6;
    hyper.window = 2;
    hyper.labels = 4;
    hyper.vocab_size = static_cast<int>(vocab.size());
    hyper.char_count = static_cast<int>(vocab.char_count());
    const model::ModelParams params = model::init_params(hyper, 321);

    const std::string path = temp_path("model.bin");
    save_model(params, vocab, path);
    const LoadedModel loaded = load_model(path);
    CHECK(model::same_values(params, loaded.params));
    CHECK(loaded.vocab.id_to_word == vocab.id_to_word);
    CHECK(loaded.vocab.word_counts == vocab.word_counts);
    CHECK(loaded.vocab.char_seqs == vocab.char_seqs);
    std::remove(path.c_str());
}

TEST_CASE("model loader reports structured errors") {
    const auto sentences = small_corpus();
    const corpus::Vocab vocab = corpus::build_vocab(sentences, 1);
    model::Hyper hyper;
    hyper.dim = 4;
    hyper.window = 1;
    hyper.labels = 2;
    hyper.vocab_size = static_cast<int>(vocab.size());
    hyper.char_count = static_cast<int>(vocab.char_count());
    const model::ModelParams params = model::init_params(hyper, 1);
    const std::string path = temp_path("model2.bin");
    save_model(params, vocab, path);

    // Corrupted magic.
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(0);
        f.write("WRONGMAG!\n", 10);
    }
    CHECK_THROWS_AS(load_model(path), FormatError);

    // Header/manifest mismatch: flip the advertised label count.
    save_model(params, vocab, path);
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        std::string content((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
        const std::size_t pos = content.find("\"m\":2");
        REQUIRE(pos != std::string::npos);
        f.seekp(static_cast<std::streamoff>(pos));
        f.write("\"m\":3", 5);
    }
    CHECK_THROWS_AS(load_model(path), FormatError);

    // Truncated payload.
    save_model(params, vocab, path);
    {
        std::ifstream in(path, std::ios::binary);
        std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(content.data(), static_cast<std::streamsize>(content.size() / 2));
    }
    CHECK_THROWS_AS(load_model(path), FormatError);

    std::remove(path.c_str());
}

TEST_CASE("config validation") {
    const auto sentences = small_corpus();
    const corpus::Vocab vocab = corpus::build_vocab(sentences, 1);
    TrainConfig config = small_config();
    config.labels = 1;
    CHECK_THROWS_AS(train(config, sentences, vocab), ValidationError);
    config = small_config();
    config.learning_rate = 0.0;
    CHECK_THROWS_AS(train(config, sentences, vocab), ValidationError);
}
