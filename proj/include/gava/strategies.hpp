#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gava/core.hpp"
#include "gava/evaluator.hpp"
#include "gava/generator.hpp"

namespace gava {

enum class Strategy { baseline, sda, dda, lw };

const char* to_string(Strategy strategy);
Strategy strategy_from_string(const std::string& name);

struct StrategyConfig {
    Strategy strategy = Strategy::baseline;
    double theta = 0.9;
    int context_size = 5;    // k
    int sample_count = 5;    // l
    int max_references = 5;  // n
    int epochs = 15;
    int patience = 3;
    double lr = 5e-6;
    int batch_size = 32;
    std::uint64_t seed = 0;
    double temperature = 1.0;
    bool dedupe = false;
    // filter sampled generations by theta before pooling in DDA
    bool dda_prefilter = true;
    // allow the human target among scoring references (off by default)
    bool include_target_references = false;

    DecodingConfig decoding() const {
        return DecodingConfig{temperature, sample_count, dedupe};
    }
};

void validate_config(const StrategyConfig& config);

// The DDA pool: input candidates, the human target when present, and the
// filtered generations, with their evaluator scores.
struct CandidatePool {
    std::vector<GeneratedAnswer> members;
    std::vector<UnitScore> scores;
};

struct EpochRecord {
    int epoch = 0;  // 1-based
    double train_loss_mean = 0.0;
    double dev_gava_score = 0.0;
    std::optional<std::size_t> augmented_size;  // dda: filtered generations
};

struct TrainingHistory {
    std::vector<EpochRecord> records;
    int best_epoch = 0;  // argmax of dev score, first occurrence on ties
};

std::string history_to_json(const TrainingHistory& history);

// Keeps exactly the generations whose score >= theta, order preserved.
// Every input must carry a score.
std::vector<GeneratedAnswer> filter_generations(
    const std::vector<GeneratedAnswer>& scored, double theta);

// Static data augmentation: sample l answers per question with base_model,
// score each against the question's candidates, keep those >= theta, and
// append one new example per survivor (same question and candidates, the
// survivor as target). Originals are untouched and keep their order.
Dataset augment_static(const Dataset& dataset, const GeneratorParams& base_model,
                       Evaluator& evaluator, const StrategyConfig& config);

struct RebuildResult {
    GenQAExample example;
    CandidatePool pool;
};

// Dynamic rebuild of one example: pool = candidates + target + filtered
// generations, every member scored against the original candidates (a member
// that textually matches a candidate has that text excluded from its own
// references), top scorer becomes the target and the next k become the
// context. Ties go to the lower pool index; exact text duplicates of the new
// target are skipped; short pools are padded by recycling the lowest-scoring
// originals.
RebuildResult rebuild_example_dynamic_detailed(const GenQAExample& example,
                                               const GeneratorParams& model,
                                               Evaluator& evaluator,
                                               const StrategyConfig& config);

GenQAExample rebuild_example_dynamic(const GenQAExample& example,
                                     const GeneratorParams& model,
                                     Evaluator& evaluator,
                                     const StrategyConfig& config);

// Loss weight of one training instance: 1 - evaluator score of the model's
// current generation.
double lw_weight(UnitScore score);

// Seeded near-zero initialization. Zero weights make temperature-0 decoding
// collapse onto index 0 for every question; a small seeded spread gives each
// question an informative starting answer while staying reproducible.
GeneratorParams make_initial_params(std::uint64_t seed);

// The shared loop: per epoch (dda) rebuild every training example with the
// current model, compute per-instance weights (1 for baseline/sda/dda,
// 1 - score of a greedy generation for lw), take gradient steps over
// seeded-shuffled batches, evaluate the dev GAVA-Score, and stop after
// `patience` epochs without improvement. Returns the best checkpoint.
std::pair<GeneratorParams, TrainingHistory> run_training(
    const Dataset& train, const Dataset& dev, Evaluator& evaluator,
    const StrategyConfig& config);

}  // namespace gava
