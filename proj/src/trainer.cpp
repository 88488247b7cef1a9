#include "mimax/trainer.hpp"

#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "mimax/errors.hpp"
#include "mimax/rng.hpp"

static_assert(std::endian::native == std::endian::little,
              "model container assumes a little-endian host");

namespace mimax::trainer {

namespace {

constexpr char kMagic[] = "MIMAXPOS1\n";
constexpr std::size_t kMagicLen = 10;

struct Adam {
    model::GradientSet first;
    model::GradientSet second;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long step = 0;

    explicit Adam(const model::ModelParams &params)
        : first(model::zeros_like(params)), second(model::zeros_like(params)) {}

    // One ascent step.
    void update(model::ModelParams &params, const model::GradientSet &grads, double lr) {
        ++step;
        const double correction1 = 1.0 - std::pow(beta1, step);
        const double correction2 = 1.0 - std::pow(beta2, step);
        std::vector<Matrix *> p, m1, m2;
        std::vector<const Matrix *> g;
        model::for_each_array(params, [&](const std::string &, Matrix &mat) { p.push_back(&mat); });
        model::for_each_array(first, [&](const std::string &, Matrix &mat) { m1.push_back(&mat); });
        model::for_each_array(second, [&](const std::string &, Matrix &mat) { m2.push_back(&mat); });
        model::for_each_array(grads,
                              [&](const std::string &, const Matrix &mat) { g.push_back(&mat); });
        for (std::size_t a = 0; a < p.size(); ++a) {
            for (std::size_t i = 0; i < p[a]->a.size(); ++i) {
                const double grad = g[a]->a[i];
                double &mo = m1[a]->a[i];
                double &ve = m2[a]->a[i];
                mo = beta1 * mo + (1.0 - beta1) * grad;
                ve = beta2 * ve + (1.0 - beta2) * grad * grad;
                const double m_hat = mo / correction1;
                const double v_hat = ve / correction2;
                p[a]->a[i] += lr * m_hat / (std::sqrt(v_hat) + eps);
            }
        }
    }
};

RestartLog run_restart(const TrainConfig &config, int restart,
                       const std::vector<corpus::ContextWordPair> &pairs,
                       const std::vector<corpus::Batch> &sentence_partition,
                       const corpus::Vocab &vocab, model::ModelParams &out_params) {
    RestartLog log;
    log.restart = restart;
    Rng rng(config.seed + static_cast<std::uint64_t>(restart));

    model::Hyper hyper;
    hyper.dim = config.dim;
    hyper.window = config.window;
    hyper.labels = config.labels;
    hyper.vocab_size = static_cast<int>(vocab.size());
    hyper.char_count = static_cast<int>(vocab.char_count());
    model::ModelParams params = model::init_params(hyper, rng());

    try {
        double objective = objectives::corpus_objective(params, pairs, vocab, config.objective);
        log.epochs.push_back({restart, 0, objective, 0.0, 0.0});
        log.final_objective = objective;

        Adam adam(params);
        for (int epoch = 1; epoch <= config.epochs; ++epoch) {
            const auto start = std::chrono::steady_clock::now();
            std::vector<corpus::Batch> batches;
            if (config.batching == Batching::random) {
                batches = corpus::minibatches(pairs, config.batch_size, rng());
            } else {
                batches = sentence_partition;
                const std::vector<std::size_t> perm = random_permutation(rng, batches.size());
                std::vector<corpus::Batch> shuffled;
                shuffled.reserve(batches.size());
                for (std::size_t i : perm) shuffled.push_back(batches[i]);
                batches = std::move(shuffled);
            }

            double norm_sum = 0.0;
            for (const corpus::Batch &batch : batches) {
                auto [value, grads] =
                    objectives::objective_gradient(params, batch, vocab, config.objective);
                (void)value;
                double norm = model::l2_norm(grads);
                if (config.clip_norm > 0.0 && norm > config.clip_norm)
                    model::scale(grads, config.clip_norm / norm);
                norm_sum += norm;
                adam.update(params, grads, config.learning_rate);
            }

            objective = objectives::corpus_objective(params, pairs, vocab, config.objective);
            if (!std::isfinite(objective))
                throw Error("corpus objective became non-finite at epoch " +
                            std::to_string(epoch));
            const double seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            log.epochs.push_back({restart, epoch, objective, seconds,
                                  norm_sum / static_cast<double>(batches.size())});
            log.final_objective = objective;
        }
        out_params = std::move(params);
    } catch (const std::exception &e) {
        log.aborted = true;
        log.abort_reason = e.what();
    }
    return log;
}

}  // namespace

TrainResult train(const TrainConfig &config, const std::vector<corpus::Sentence> &sentences,
                  const corpus::Vocab &vocab) {
    if (config.labels < 2) throw ValidationError("label count m must be >= 2");
    if (config.epochs < 0 || config.restarts < 1)
        throw ValidationError("epochs must be >= 0 and restarts >= 1");
    if (config.learning_rate <= 0.0) throw ValidationError("learning rate must be positive");
    if (config.batch_size < 1) throw ValidationError("batch size must be >= 1");

    const std::vector<corpus::ContextWordPair> pairs =
        corpus::extract_pairs(sentences, vocab, config.window);
    std::vector<corpus::Batch> sentence_partition;
    if (config.batching == Batching::sentence)
        sentence_partition = corpus::sentence_batches(sentences, vocab, config.window);

    const int restarts = config.restarts;
    std::vector<RestartLog> logs(static_cast<std::size_t>(restarts));
    std::vector<model::ModelParams> params(static_cast<std::size_t>(restarts));

    const int workers = std::max(1, std::min(config.workers, restarts));
    if (workers == 1) {
        for (int r = 0; r < restarts; ++r)
            logs[static_cast<std::size_t>(r)] = run_restart(config, r, pairs, sentence_partition,
                                                            vocab, params[static_cast<std::size_t>(r)]);
    } else {
        std::atomic<int> next(0);
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int t = 0; t < workers; ++t) {
            pool.emplace_back([&]() {
                for (int r = next.fetch_add(1); r < restarts; r = next.fetch_add(1))
                    logs[static_cast<std::size_t>(r)] = run_restart(
                        config, r, pairs, sentence_partition, vocab,
                        params[static_cast<std::size_t>(r)]);
            });
        }
        for (std::thread &th : pool) th.join();
    }

    TrainResult result;
    result.logs = std::move(logs);
    for (int r = 0; r < restarts; ++r) {
        const RestartLog &log = result.logs[static_cast<std::size_t>(r)];
        if (log.aborted) continue;
        if (result.best_restart < 0 ||
            log.final_objective >
                result.logs[static_cast<std::size_t>(result.best_restart)].final_objective) {
            result.best_restart = r;
        }
    }
    if (result.best_restart < 0) throw Error("every restart aborted; nothing to return");
    result.best_params = params[static_cast<std::size_t>(result.best_restart)];
    if (config.keep_restart_params) result.restart_params = std::move(params);
    return result;
}

void write_train_log(const std::vector<RestartLog> &logs, const std::string &path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write train log: " + path);
    for (const RestartLog &log : logs) {
        for (const EpochRecord &rec : log.epochs) {
            const nlohmann::json j = {{"restart", rec.restart},
                                      {"epoch", rec.epoch},
                                      {"objective", rec.objective},
                                      {"wall_seconds", rec.wall_seconds},
                                      {"grad_norm_mean", rec.grad_norm_mean}};
            out << j.dump() << "\n";
        }
        nlohmann::json summary = {{"restart", log.restart},
                                  {"final_objective", log.final_objective},
                                  {"aborted", log.aborted}};
        if (log.aborted) summary["abort_reason"] = log.abort_reason;
        out << summary.dump() << "\n";
    }
}

void save_model(const model::ModelParams &params, const corpus::Vocab &vocab,
                const std::string &path) {
    nlohmann::json manifest = nlohmann::json::array();
    std::uint64_t offset = 0;
    model::for_each_array(params, [&](const std::string &name, const Matrix &m) {
        manifest.push_back({{"name", name},
                            {"rows", m.rows},
                            {"cols", m.cols},
                            {"offset", offset}});
        offset += m.a.size() * sizeof(double);
    });
    const nlohmann::json header = {{"d", params.hyper.dim},
                                   {"H", params.hyper.window},
                                   {"m", params.hyper.labels},
                                   {"vocab_size", params.hyper.vocab_size},
                                   {"char_count", params.hyper.char_count},
                                   {"arrays", manifest}};
    const std::string header_text = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write model file: " + path);
    out.write(kMagic, static_cast<std::streamsize>(kMagicLen));
    const std::uint64_t header_len = header_text.size();
    out.write(reinterpret_cast<const char *>(&header_len), sizeof(header_len));
    out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
    model::for_each_array(params, [&](const std::string &, const Matrix &m) {
        out.write(reinterpret_cast<const char *>(m.a.data()),
                  static_cast<std::streamsize>(m.a.size() * sizeof(double)));
    });
    out << corpus::vocab_to_string(vocab);
    if (!out) throw FormatError("failed while writing model file: " + path);
}

LoadedModel load_model(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open model file: " + path);

    char magic[kMagicLen];
    if (!in.read(magic, static_cast<std::streamsize>(kMagicLen)) ||
        std::memcmp(magic, kMagic, kMagicLen) != 0)
        throw FormatError("not a mimax model file (bad magic string): " + path);

    std::uint64_t header_len = 0;
    if (!in.read(reinterpret_cast<char *>(&header_len), sizeof(header_len)))
        throw FormatError("truncated model file (missing header length): " + path);
    std::string header_text(header_len, '\0');
    if (!in.read(header_text.data(), static_cast<std::streamsize>(header_len)))
        throw FormatError("truncated model file (incomplete header): " + path);

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(header_text);
    } catch (const nlohmann::json::exception &e) {
        throw FormatError("model header is not valid JSON: " + std::string(e.what()));
    }

    model::Hyper hyper;
    LoadedModel loaded;
    try {
        hyper.dim = header.at("d").get<int>();
        hyper.window = header.at("H").get<int>();
        hyper.labels = header.at("m").get<int>();
        hyper.vocab_size = header.at("vocab_size").get<int>();
        hyper.char_count = header.at("char_count").get<int>();
        try {
            loaded.params = model::init_params(hyper, 0);
        } catch (const ValidationError &e) {
            throw FormatError("model header has invalid hyperparameters: " +
                              std::string(e.what()));
        }

        const nlohmann::json &manifest = header.at("arrays");
        std::size_t entry = 0;
        std::uint64_t expected_offset = 0;
        bool mismatch = false;
        std::string detail;
        model::for_each_array(loaded.params, [&](const std::string &name, Matrix &m) {
            if (mismatch) return;
            if (entry >= manifest.size()) {
                mismatch = true;
                detail = "manifest is missing array " + name;
                return;
            }
            const nlohmann::json &rec = manifest[entry++];
            if (rec.at("name").get<std::string>() != name ||
                rec.at("rows").get<std::size_t>() != m.rows ||
                rec.at("cols").get<std::size_t>() != m.cols ||
                rec.at("offset").get<std::uint64_t>() != expected_offset) {
                mismatch = true;
                detail = "manifest entry " + std::to_string(entry - 1) +
                         " does not match array " + name;
                return;
            }
            expected_offset += m.a.size() * sizeof(double);
            if (!in.read(reinterpret_cast<char *>(m.a.data()),
                         static_cast<std::streamsize>(m.a.size() * sizeof(double)))) {
                mismatch = true;
                detail = "truncated array payload for " + name;
            }
        });
        if (!mismatch && entry != manifest.size()) {
            mismatch = true;
            detail = "manifest lists more arrays than the model has";
        }
        if (mismatch) throw FormatError("model file " + path + ": " + detail);
    } catch (const nlohmann::json::exception &e) {
        throw FormatError("model header field error: " + std::string(e.what()));
    }

    std::string vocab_text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    loaded.vocab = corpus::vocab_from_string(vocab_text);
    if (static_cast<int>(loaded.vocab.size()) != hyper.vocab_size ||
        static_cast<int>(loaded.vocab.char_count()) != hyper.char_count)
        throw FormatError("model header disagrees with the embedded vocabulary");
    return loaded;
}

}  // namespace mimax::trainer
