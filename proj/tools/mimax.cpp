// Command-line entry point: corpus ingestion, training, label induction,
// evaluation, the gradient-bias audit, the Brown clustering baseline, and
// the synthetic corpus generator.
//
// Exit codes: 0 success, 1 runtime or data error, 2 usage error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mimax/bias_audit.hpp"
#include "mimax/brown.hpp"
#include "mimax/corpus.hpp"
#include "mimax/errors.hpp"
#include "mimax/eval.hpp"
#include "mimax/model.hpp"
#include "mimax/objectives.hpp"
#include "mimax/synth.hpp"
#include "mimax/trainer.hpp"

namespace {

int default_workers() {
    if (const char *env = std::getenv("MIMAX_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

struct TrainArgs {
    std::string corpus_path;
    std::string out_path;
    std::string labels_path;
    std::string log_path;
    std::string objective = "var";
    std::string batching = "random";
    int dim = 200;
    int window = 2;
    int labels = 0;
    double learning_rate = 0.001;
    std::size_t batch_size = 80;
    int epochs = 10;
    int restarts = 10;
    std::uint64_t seed = 0;
    std::int64_t min_count = 1;
    double clip_norm = 0.0;
};

int run_train(const TrainArgs &args) {
    const std::vector<mimax::corpus::Sentence> sentences =
        mimax::corpus::read_format_a(args.corpus_path);

    int labels = args.labels;
    if (labels == 0) {
        // Protocol default: m equals the number of distinct gold tags.
        const auto tagged = mimax::corpus::read_format_b(args.labels_path);
        std::set<std::string> tags;
        for (const auto &sent : tagged)
            for (const auto &tok : sent) tags.insert(tok.tag);
        labels = static_cast<int>(tags.size());
        std::cerr << "m = " << labels << " distinct tags from " << args.labels_path << "\n";
    }

    const mimax::corpus::Vocab vocab = mimax::corpus::build_vocab(sentences, args.min_count);

    mimax::trainer::TrainConfig config;
    config.dim = args.dim;
    config.window = args.window;
    config.labels = labels;
    config.learning_rate = args.learning_rate;
    config.batch_size = args.batch_size;
    config.epochs = args.epochs;
    config.restarts = args.restarts;
    config.seed = args.seed;
    config.objective = mimax::objectives::parse_objective(args.objective);
    config.batching = args.batching == "sentence" ? mimax::trainer::Batching::sentence
                                                  : mimax::trainer::Batching::random;
    config.min_count = args.min_count;
    config.clip_norm = args.clip_norm;
    config.workers = default_workers();

    const mimax::trainer::TrainResult result = mimax::trainer::train(config, sentences, vocab);
    mimax::trainer::save_model(result.best_params, vocab, args.out_path);
    const std::string log_path =
        args.log_path.empty() ? args.out_path + ".log.jsonl" : args.log_path;
    mimax::trainer::write_train_log(result.logs, log_path);
    std::cerr << "best restart " << result.best_restart << ", final objective "
              << result.logs[static_cast<std::size_t>(result.best_restart)].final_objective
              << " bits; model -> " << args.out_path << ", log -> " << log_path << "\n";
    return 0;
}

int run_induce(const std::string &model_path, const std::string &corpus_path,
               const std::string &out_path) {
    const mimax::trainer::LoadedModel loaded = mimax::trainer::load_model(model_path);
    const auto sentences = mimax::corpus::read_format_a(corpus_path);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw mimax::FormatError("cannot write output file: " + out_path);

    std::map<std::int32_t, int> cache;
    bool first = true;
    for (const auto &sent : sentences) {
        if (!first) out << "\n";
        first = false;
        for (const auto &token : sent) {
            const std::int32_t word = loaded.vocab.id_of(token);
            auto it = cache.find(word);
            if (it == cache.end())
                it = cache.emplace(word, mimax::model::induce_label(loaded.params, word,
                                                                    loaded.vocab)).first;
            out << token << "\t" << it->second << "\n";
        }
    }
    return 0;
}

int run_eval(const std::string &model_path, const std::string &labeled_path) {
    const mimax::trainer::LoadedModel loaded = mimax::trainer::load_model(model_path);
    const auto labeled = mimax::corpus::read_format_b(labeled_path);
    const mimax::eval::Report report =
        mimax::eval::evaluate_model(loaded.params, loaded.vocab, labeled);
    std::cout << mimax::eval::report_json(report) << "\n";
    return 0;
}

int run_bias_audit(const std::string &model_path, const std::string &corpus_path,
                   const std::vector<std::size_t> &batch_sizes, std::size_t seeds) {
    const mimax::trainer::LoadedModel loaded = mimax::trainer::load_model(model_path);
    const auto sentences = mimax::corpus::read_format_a(corpus_path);
    const auto pairs =
        mimax::corpus::extract_pairs(sentences, loaded.vocab, loaded.params.hyper.window);
    const mimax::bias::ScalingReport report = mimax::bias::bias_scaling_report(
        loaded.params, loaded.vocab, pairs, batch_sizes, seeds);
    for (const std::string &warning : report.warnings) std::cerr << "warning: " << warning << "\n";
    for (const mimax::bias::ScalingRow &row : report.rows) {
        const nlohmann::json j = {{"objective", row.objective}, {"N", row.total},
                                  {"K", row.num_batches},      {"M", row.batch_size},
                                  {"seed", row.seed},          {"eps_norm", row.eps_norm},
                                  {"grad_norm", row.grad_norm}, {"residual", row.residual}};
        std::cout << j.dump() << "\n";
    }
    return 0;
}

int run_brown(const std::string &corpus_path, std::int32_t m, const std::string &out_path,
              bool oracle, std::int64_t min_count) {
    const auto sentences = mimax::corpus::read_format_a(corpus_path);
    const mimax::corpus::Vocab vocab = mimax::corpus::build_vocab(sentences, min_count);
    const mimax::brown::BigramTable table = mimax::brown::bigram_counts(sentences, vocab);
    const mimax::brown::Clustering clustering = mimax::brown::brown_cluster(table, vocab, m);
    mimax::brown::save_clustering(clustering, vocab, out_path);
    const double heuristic = mimax::brown::brown_objective(clustering, table);
    std::cerr << "heuristic objective " << heuristic << " bits; clusters -> " << out_path << "\n";
    if (oracle) {
        try {
            const mimax::brown::BruteForceResult best =
                mimax::brown::brute_force_clustering(table, vocab, m);
            std::cout << "heuristic_objective\t" << heuristic << "\n";
            std::cout << "oracle_objective\t" << best.objective << "\n";
        } catch (const mimax::ValidationError &e) {
            std::cerr << e.what() << "\n";
            return 2;
        }
    }
    return 0;
}

int run_synth(int states, int vocab, std::int64_t tokens, std::uint64_t seed,
              const std::string &prefix) {
    mimax::synth::SynthConfig config;
    config.states = states;
    config.vocab = vocab;
    config.tokens = tokens;
    config.seed = seed;
    const auto sentences = mimax::synth::generate(config);
    mimax::synth::write_files(sentences, prefix);
    std::cerr << "wrote " << prefix << ".labeled and " << prefix << ".txt (" << tokens
              << " tokens, " << states << " tags)\n";
    return 0;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"mimax: unsupervised POS induction by mutual-information maximization"};
    app.require_subcommand(1);

    TrainArgs train_args;
    CLI::App *train = app.add_subcommand("train", "Train a tagging model");
    train->add_option("--corpus", train_args.corpus_path, "Training text (format A)")
        ->required()
        ->check(CLI::ExistingFile);
    train->add_option("--out", train_args.out_path, "Output model path")->required();
    train->add_option("--labels", train_args.labels_path,
                      "Labeled file (format B); sets m to the distinct tag count when --m is omitted")
        ->check(CLI::ExistingFile);
    train->add_option("--objective", train_args.objective, "Objective: var or mi")
        ->check(CLI::IsMember({"var", "mi"}));
    train->add_option("--d", train_args.dim, "Embedding dimension (even)")
        ->check(CLI::PositiveNumber);
    train->add_option("--H", train_args.window, "Context width")->check(CLI::PositiveNumber);
    train->add_option("--m", train_args.labels, "Number of labels to induce")
        ->check(CLI::PositiveNumber);
    train->add_option("--lr", train_args.learning_rate, "Learning rate")
        ->check(CLI::PositiveNumber);
    train->add_option("--batch", train_args.batch_size, "Minibatch size")
        ->check(CLI::PositiveNumber);
    train->add_option("--epochs", train_args.epochs, "Training epochs")
        ->check(CLI::NonNegativeNumber);
    train->add_option("--restarts", train_args.restarts, "Random restarts")
        ->check(CLI::PositiveNumber);
    train->add_option("--seed", train_args.seed, "Random seed");
    train->add_option("--batching", train_args.batching, "Batching mode: random or sentence")
        ->check(CLI::IsMember({"random", "sentence"}));
    train->add_option("--min-count", train_args.min_count, "Rare-word cutoff")
        ->check(CLI::PositiveNumber);
    train->add_option("--clip-norm", train_args.clip_norm, "Gradient clipping norm (0 = off)")
        ->check(CLI::NonNegativeNumber);
    train->add_option("--log", train_args.log_path, "Training log path (default <out>.log.jsonl)");

    std::string model_path, corpus_path, out_path, labeled_path;
    CLI::App *induce = app.add_subcommand("induce", "Write one label per token");
    induce->add_option("--model", model_path, "Trained model")->required()->check(CLI::ExistingFile);
    induce->add_option("--corpus", corpus_path, "Input text (format A)")
        ->required()
        ->check(CLI::ExistingFile);
    induce->add_option("--out", out_path, "Output path")->required();

    CLI::App *eval_cmd = app.add_subcommand("eval", "Evaluate against a labeled file");
    eval_cmd->add_option("--model", model_path, "Trained model")
        ->required()
        ->check(CLI::ExistingFile);
    eval_cmd->add_option("--labeled", labeled_path, "Labeled file (format B)")
        ->required()
        ->check(CLI::ExistingFile);

    std::vector<std::size_t> batch_sizes;
    std::size_t audit_seeds = 1;
    CLI::App *audit = app.add_subcommand("bias-audit", "Gradient-bias scaling report");
    audit->add_option("--model", model_path, "Trained model")->required()->check(CLI::ExistingFile);
    audit->add_option("--corpus", corpus_path, "Input text (format A)")
        ->required()
        ->check(CLI::ExistingFile);
    audit->add_option("--batch-sizes", batch_sizes, "Batch sizes to audit (each must divide N)")
        ->required()
        ->delimiter(',');
    audit->add_option("--seeds", audit_seeds, "Number of random partitions per batch size")
        ->check(CLI::PositiveNumber);

    std::int32_t brown_m = 0;
    bool oracle = false;
    std::int64_t brown_min_count = 1;
    CLI::App *brown_cmd = app.add_subcommand("brown", "Brown clustering baseline");
    brown_cmd->add_option("--corpus", corpus_path, "Input text (format A)")
        ->required()
        ->check(CLI::ExistingFile);
    brown_cmd->add_option("--m", brown_m, "Number of clusters")
        ->required()
        ->check(CLI::PositiveNumber);
    brown_cmd->add_option("--out", out_path, "Output clustering path")->required();
    brown_cmd->add_flag("--oracle", oracle, "Also print the brute-force optimum (tiny vocabularies)");
    brown_cmd->add_option("--min-count", brown_min_count, "Rare-word cutoff")
        ->check(CLI::PositiveNumber);

    int synth_states = 5, synth_vocab = 150;
    std::int64_t synth_tokens = 30000;
    std::uint64_t synth_seed = 0;
    std::string synth_prefix;
    CLI::App *synth_cmd = app.add_subcommand("synth", "Generate a synthetic HMM corpus");
    synth_cmd->add_option("--states", synth_states, "Hidden states")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--vocab", synth_vocab, "Vocabulary size")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--tokens", synth_tokens, "Token count")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--seed", synth_seed, "Random seed");
    synth_cmd->add_option("--out", synth_prefix, "Output prefix")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (train->parsed()) {
            if (train_args.labels == 0 && train_args.labels_path.empty()) {
                std::cerr << "either --m or --labels is required\n";
                return 2;
            }
            return run_train(train_args);
        }
        if (induce->parsed()) return run_induce(model_path, corpus_path, out_path);
        if (eval_cmd->parsed()) return run_eval(model_path, labeled_path);
        if (audit->parsed())
            return run_bias_audit(model_path, corpus_path, batch_sizes, audit_seeds);
        if (brown_cmd->parsed())
            return run_brown(corpus_path, brown_m, out_path, oracle, brown_min_count);
        if (synth_cmd->parsed())
            return run_synth(synth_states, synth_vocab, synth_tokens, synth_seed, synth_prefix);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
