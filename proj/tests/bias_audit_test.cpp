#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mimax/bias_audit.hpp"
#include "mimax/errors.hpp"
#include "test_util.hpp"

using namespace mimax;
using namespace mimax::bias;
using objectives::Objective;

namespace {

std::vector<corpus::Batch> partition_pairs(const std::vector<corpus::ContextWordPair> &pairs,
                                           std::size_t batch_size, std::uint64_t seed) {
    return corpus::minibatches(pairs, batch_size, seed);
}

testutil::TinySetup audit_setup(std::uint64_t seed) {
    // N = 48 pairs exactly: 48 tokens emitted as pairs one per token.
    return testutil::tiny_setup(seed, 16, 48, 4, 6);
}

}  // namespace

TEST_CASE("single batch has exactly zero bias") {
    const testutil::TinySetup setup = audit_setup(1);
    const auto partition = partition_pairs(setup.pairs, setup.pairs.size(), 0);
    REQUIRE(partition.size() == 1);
    for (const Objective objective : {Objective::variational, Objective::gen_brown}) {
        const model::GradientSet eps =
            objective == Objective::variational
                ? variational_bias(setup.params, setup.vocab, partition)
                : gen_brown_bias(setup.params, setup.vocab, partition);
        CHECK(model::max_abs_entry(eps) == 0.0);
    }
}

TEST_CASE("replicated batches have exactly zero bias") {
    const testutil::TinySetup setup = audit_setup(2);
    corpus::Batch block;
    block.pairs.assign(setup.pairs.begin(), setup.pairs.begin() + 12);
    std::vector<corpus::Batch> partition;
    for (std::size_t k = 0; k < 4; ++k) {
        corpus::Batch copy = block;
        copy.index = k;
        partition.push_back(std::move(copy));
    }
    for (const Objective objective : {Objective::variational, Objective::gen_brown}) {
        const model::GradientSet eps =
            objective == Objective::variational
                ? variational_bias(setup.params, setup.vocab, partition)
                : gen_brown_bias(setup.params, setup.vocab, partition);
        CHECK(model::max_abs_entry(eps) == 0.0);
    }
}

TEST_CASE("theorem identity on random instances") {
    Rng rng(3);
    int instances = 0;
    for (std::uint64_t trial = 0; trial < 8; ++trial) {
        const testutil::TinySetup setup = audit_setup(100 + trial);
        REQUIRE(setup.pairs.size() == 48);
        for (const std::size_t num_batches : {2u, 4u, 8u}) {
            const auto partition =
                partition_pairs(setup.pairs, setup.pairs.size() / num_batches, rng());
            for (const Objective objective : {Objective::variational, Objective::gen_brown}) {
                const BiasReport report = audit(setup.params, setup.vocab, partition, objective);
                CHECK(report.direct_residual <= 1e-9);
                ++instances;
            }
        }
    }
    CHECK(instances >= 20);
}

TEST_CASE("formula and differencing agree in norm") {
    Rng rng(4);
    for (std::uint64_t trial = 0; trial < 4; ++trial) {
        const testutil::TinySetup setup = audit_setup(300 + trial);
        const auto partition = partition_pairs(setup.pairs, 12, rng());
        for (const Objective objective : {Objective::variational, Objective::gen_brown}) {
            const BiasReport report = audit(setup.params, setup.vocab, partition, objective);

            // Differencing epsilon: grad l_N - (1/K) sum grad l_k.
            corpus::Batch full;
            for (const corpus::Batch &batch : partition)
                full.pairs.insert(full.pairs.end(), batch.pairs.begin(), batch.pairs.end());
            model::GradientSet direct =
                objectives::objective_gradient(setup.params, full, setup.vocab, objective).second;
            model::scale(direct, -1.0);
            const double inv_k = 1.0 / static_cast<double>(partition.size());
            for (const corpus::Batch &batch : partition) {
                const model::GradientSet g =
                    objectives::objective_gradient(setup.params, batch, setup.vocab, objective)
                        .second;
                model::axpy(direct, inv_k, g);
            }
            const double direct_norm = model::l2_norm(direct, /*q_only=*/true);
            REQUIRE(direct_norm > 0.0);
            CHECK(std::fabs(report.epsilon_norm - direct_norm) / direct_norm <= 1e-7);
        }
    }
}

TEST_CASE("unequal batch sizes are rejected") {
    const testutil::TinySetup setup = audit_setup(5);
    std::vector<corpus::Batch> partition;
    corpus::Batch a, b;
    a.pairs.assign(setup.pairs.begin(), setup.pairs.begin() + 10);
    b.pairs.assign(setup.pairs.begin() + 10, setup.pairs.end());
    partition.push_back(a);
    partition.push_back(b);
    CHECK_THROWS_AS(variational_bias(setup.params, setup.vocab, partition), ValidationError);
    CHECK_THROWS_AS(gen_brown_bias(setup.params, setup.vocab, partition), ValidationError);
}

TEST_CASE("scaling report rows and skip warnings") {
    const testutil::TinySetup setup = audit_setup(6);
    const ScalingReport report = bias_scaling_report(setup.params, setup.vocab, setup.pairs,
                                                     {48, 24, 7}, 2);
    CHECK(report.warnings.size() == 1);
    CHECK(report.warnings[0].find("7") != std::string::npos);
    // 2 batch sizes x 2 seeds x 2 objectives.
    CHECK(report.rows.size() == 8);
    for (const ScalingRow &row : report.rows) {
        CHECK(row.residual <= 1e-9);
        if (row.batch_size == 48) CHECK(row.eps_norm == 0.0);
    }
    const auto summary = summarize(report);
    CHECK(summary.size() == 4);
}

TEST_CASE("smaller batches mean more bias, statistically") {
    // Over random models and partitions, ||eps_var|| at M should usually
    // be at least its value at 2M.
    Rng rng(7);
    int hold = 0, total = 0;
    for (std::uint64_t trial = 0; trial < 10; ++trial) {
        const testutil::TinySetup setup = audit_setup(600 + trial);
        const std::uint64_t seed = rng();
        for (const std::size_t small : {6u, 12u}) {
            const auto fine = partition_pairs(setup.pairs, small, seed);
            const auto coarse = partition_pairs(setup.pairs, 2 * small, seed);
            const double eps_fine =
                model::l2_norm(variational_bias(setup.params, setup.vocab, fine), true);
            const double eps_coarse =
                model::l2_norm(variational_bias(setup.params, setup.vocab, coarse), true);
            hold += eps_fine >= eps_coarse ? 1 : 0;
            ++total;
        }
    }
    CHECK(hold * 10 >= total * 8);  // >= 80%
}

TEST_CASE("near-degenerate instance blows up the gen-brown bias") {
    // Sharp classifiers with a label whose batch marginals sit near zero.
    // Target words are balanced across batches (so the variational bias,
    // which only sees q_hat_k, stays tiny), but each batch pairs word
    // blocks with a different context block, so the batch mean joints
    // concentrate on different cells and their log ratios explode.
    const std::vector<corpus::Sentence> wordlist = {
        {"t0", "t1", "t2", "t3", "t4", "t5", "t6", "t7", "t8", "t9", "t10", "t11",
         "c0", "c1", "c2", "f"}};
    const corpus::Vocab vocab = corpus::build_vocab(wordlist, 1);

    model::Hyper hyper;
    hyper.dim = 6;
    hyper.window = 1;
    hyper.labels = 4;
    hyper.vocab_size = static_cast<int>(vocab.size());
    hyper.char_count = static_cast<int>(vocab.char_count());
    model::ModelParams params = model::init_params(hyper, 0);
    model::for_each_array(params, [](const std::string &, Matrix &m) { m.fill(0.0); });

    // Word w's block lives in embedding dimension block(w); logits are
    // 8 at the block label, 0 elsewhere. No word activates label 3, so
    // q_hat(3) is softmax leakage only.
    auto block_of = [&](int t) { return t % 3; };
    for (int t = 0; t < 12; ++t) {
        const auto row = static_cast<std::size_t>(vocab.id_of("t" + std::to_string(t)));
        params.word_emb(row, static_cast<std::size_t>(block_of(t))) = 4.0;
    }
    for (int b = 0; b < 3; ++b) {
        const auto row = static_cast<std::size_t>(vocab.id_of("c" + std::to_string(b)));
        params.word_emb(row, static_cast<std::size_t>(b)) = 4.0;
    }
    for (std::size_t z = 0; z < 4; ++z) {
        params.out_word(z, z) = 2.0;
        params.ctx[0](z, z) = 2.0;
    }

    // Four batches of the same 12 target words; batch k shows block-b
    // words in the context c_{(b+k) mod 3}. One target word is swapped
    // between batches 0 and 1 so q_hat_k is close to q_hat, not equal.
    const std::int32_t filler = vocab.id_of("f");
    std::vector<corpus::Batch> partition(4);
    for (std::size_t k = 0; k < 4; ++k) {
        for (int t = 0; t < 12; ++t) {
            int word_index = t;
            if (k == 0 && t == 0) word_index = 1;
            if (k == 1 && t == 1) word_index = 0;
            corpus::ContextWordPair pair;
            pair.word = vocab.id_of("t" + std::to_string(word_index));
            const int ctx_block = (block_of(word_index) + static_cast<int>(k)) % 3;
            pair.context = {vocab.id_of("c" + std::to_string(ctx_block)), filler};
            partition[k].pairs.push_back(std::move(pair));
        }
        partition[k].index = k;
    }

    const BiasReport var = audit(params, vocab, partition, Objective::variational);
    const BiasReport mi = audit(params, vocab, partition, Objective::gen_brown);
    CHECK(var.direct_residual <= 1e-9);
    CHECK(mi.direct_residual <= 1e-9);
    REQUIRE(var.epsilon_norm > 0.0);
    CHECK(mi.epsilon_norm / var.epsilon_norm > 10.0);

    // The q marginals really are near-degenerate.
    const objectives::BatchForward fwd = objectives::batch_forward(params, partition[0], vocab);
    double smallest = 1.0;
    for (double v : fwd.q_hat) smallest = std::min(smallest, v);
    CHECK(smallest < 1e-3);
}
