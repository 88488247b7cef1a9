// Minibatch gradient-ascent training with random restarts, per-epoch
// corpus-objective logging, and the binary model container.

#ifndef MIMAX_TRAINER_HPP
#define MIMAX_TRAINER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "mimax/corpus.hpp"
#include "mimax/model.hpp"
#include "mimax/objectives.hpp"

namespace mimax::trainer {

enum class Batching { random, sentence };

struct TrainConfig {
    int dim = 200;
    int window = 2;
    int labels = 0;
    double learning_rate = 0.001;
    std::size_t batch_size = 80;
    int epochs = 10;
    int restarts = 10;
    std::uint64_t seed = 0;
    objectives::Objective objective = objectives::Objective::variational;
    Batching batching = Batching::random;
    std::int64_t min_count = 1;
    double clip_norm = 0.0;  // 0 disables clipping
    int workers = 1;         // restart-level parallelism
    bool keep_restart_params = false;
};

struct EpochRecord {
    int restart = 0;
    int epoch = 0;  // 0 is the pre-training value
    double objective = 0.0;
    double wall_seconds = 0.0;
    double grad_norm_mean = 0.0;
};

struct RestartLog {
    int restart = 0;
    bool aborted = false;
    std::string abort_reason;
    double final_objective = 0.0;
    std::vector<EpochRecord> epochs;
};

struct TrainResult {
    model::ModelParams best_params;
    int best_restart = -1;
    std::vector<RestartLog> logs;
    std::vector<model::ModelParams> restart_params;  // when keep_restart_params
};

// Restart r initializes from seed + r and owns its own shuffle stream, so
// a single-restart run with seed + r reproduces that restart exactly. The
// returned model is the restart with the highest final corpus objective.
TrainResult train(const TrainConfig &config, const std::vector<corpus::Sentence> &sentences,
                  const corpus::Vocab &vocab);

// Line-delimited JSON: one record per epoch plus a summary per restart.
void write_train_log(const std::vector<RestartLog> &logs, const std::string &path);

// Model container: "MIMAXPOS1\n", a little-endian uint64 header length, a
// JSON header with the hyperparameters and array manifest, the raw
// float64 arrays in manifest order, then the vocab text.
void save_model(const model::ModelParams &params, const corpus::Vocab &vocab,
                const std::string &path);

struct LoadedModel {
    model::ModelParams params;
    corpus::Vocab vocab;
};

LoadedModel load_model(const std::string &path);

}  // namespace mimax::trainer

#endif  // MIMAX_TRAINER_HPP
