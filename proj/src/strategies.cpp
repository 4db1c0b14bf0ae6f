#include "gava/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "gava/errors.hpp"
#include "gava/metrics.hpp"
#include "gava/rng.hpp"
#include "gava/text.hpp"

namespace gava {

using nlohmann::json;

const char* to_string(Strategy strategy) {
    switch (strategy) {
        case Strategy::baseline: return "baseline";
        case Strategy::sda: return "sda";
        case Strategy::dda: return "dda";
        case Strategy::lw: return "lw";
    }
    return "baseline";
}

Strategy strategy_from_string(const std::string& name) {
    if (name == "baseline") return Strategy::baseline;
    if (name == "sda") return Strategy::sda;
    if (name == "dda") return Strategy::dda;
    if (name == "lw") return Strategy::lw;
    throw ValidationError("unknown strategy \"" + name +
                          "\" (expected baseline|sda|dda|lw)");
}

void validate_config(const StrategyConfig& config) {
    if (!(config.theta >= 0.0 && config.theta <= 1.0))
        throw ValidationError("theta must be in [0,1]");
    if (config.context_size < 1) throw ValidationError("k must be >= 1");
    if (config.sample_count < 1) throw ValidationError("l must be >= 1");
    if (config.max_references < 1) throw ValidationError("n must be >= 1");
    if (config.epochs < 1) throw ValidationError("epochs must be >= 1");
    if (config.patience < 1) throw ValidationError("patience must be >= 1");
    if (!(config.lr > 0.0)) throw ValidationError("lr must be > 0");
    if (config.batch_size < 1) throw ValidationError("batch_size must be >= 1");
    if (config.temperature < 0.0) throw ValidationError("temperature must be >= 0");
}

std::string history_to_json(const TrainingHistory& history) {
    json arr = json::array();
    for (const auto& r : history.records) {
        json j;
        j["epoch"] = r.epoch;
        j["train_loss_mean"] = r.train_loss_mean;
        j["dev_gava_score"] = r.dev_gava_score;
        if (r.augmented_size) j["augmented_size"] = *r.augmented_size;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

std::vector<GeneratedAnswer> filter_generations(
    const std::vector<GeneratedAnswer>& scored, double theta) {
    if (!(theta >= 0.0 && theta <= 1.0))
        throw ValidationError("theta must be in [0,1]");
    std::vector<GeneratedAnswer> kept;
    for (const auto& g : scored) {
        if (!g.score) {
            throw ValidationError("generation \"" + g.text +
                                  "\" has no score; score before filtering");
        }
        if (*g.score >= theta) kept.push_back(g);
    }
    return kept;
}

namespace {

std::vector<std::string> candidate_texts(const GenQAExample& ex) {
    std::vector<std::string> texts;
    texts.reserve(ex.candidates.size());
    for (const auto& c : ex.candidates) texts.push_back(c.text);
    return texts;
}

// Samples l answers for one example and scores them against the example's
// candidates (select_references over label-stripped candidates).
std::vector<GeneratedAnswer> sample_and_score(const GenQAExample& ex,
                                              const GeneratorParams& model,
                                              Evaluator& evaluator,
                                              const StrategyConfig& config,
                                              std::uint64_t rng_seed) {
    auto gens = sample_generations(model, ex.question, candidate_texts(ex),
                                   config.decoding(), rng_seed);
    const auto refs =
        references_for_scoring(ex.candidates, config.max_references,
                               config.include_target_references, ex.target);
    for (auto& g : gens) {
        g.score = refs.positives.empty()
                      ? 0.0
                      : evaluator.score(ex.question, g.text, refs).value();
    }
    return gens;
}

}  // namespace

Dataset augment_static(const Dataset& dataset, const GeneratorParams& base_model,
                       Evaluator& evaluator, const StrategyConfig& config) {
    validate_config(config);

    Dataset out;
    out.metadata = dataset.metadata;
    out.examples.reserve(dataset.size());
    for (const auto& ex : dataset.examples) {
        auto original = ex;
        if (!original.provenance) original.provenance = "original";
        out.examples.push_back(std::move(original));
    }

    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto& ex = dataset.examples[i];
        if (ex.candidates.empty()) {
            throw ValidationError("example \"" + ex.question.id +
                                  "\" has no candidates to sample from");
        }
        const auto scored = sample_and_score(ex, base_model, evaluator, config,
                                             mix_seed(config.seed, i));
        const auto survivors = filter_generations(scored, config.theta);
        for (std::size_t s = 0; s < survivors.size(); ++s) {
            GenQAExample aug;
            aug.question.id =
                ex.question.id + "::sda" + std::to_string(s + 1);
            aug.question.text = ex.question.text;
            aug.candidates = ex.candidates;
            aug.target = survivors[s].text;
            aug.provenance = "sda";
            out.examples.push_back(std::move(aug));
        }
    }
    return out;
}

RebuildResult rebuild_example_dynamic_detailed(const GenQAExample& example,
                                               const GeneratorParams& model,
                                               Evaluator& evaluator,
                                               const StrategyConfig& config) {
    validate_config(config);
    if (example.candidates.empty()) {
        throw ValidationError("example \"" + example.question.id +
                              "\" has no candidates; cannot rebuild");
    }

    auto scored = sample_and_score(example, model, evaluator, config, config.seed);
    const auto generations =
        config.dda_prefilter ? filter_generations(scored, config.theta)
                             : std::move(scored);

    CandidatePool pool;
    for (const auto& c : example.candidates) {
        pool.members.push_back({c.text, std::nullopt, 0.0, AnswerOrigin::candidate});
    }
    if (example.target && !is_blank(*example.target)) {
        pool.members.push_back({*example.target, std::nullopt, 0.0, AnswerOrigin::target});
    }
    for (const auto& g : generations) pool.members.push_back(g);

    // Score every member against the original candidates; a member whose
    // text is itself one of the candidates would self-match, so that text is
    // dropped from its own references.
    for (auto& m : pool.members) {
        std::vector<AnswerCandidate> refs_pool;
        refs_pool.reserve(example.candidates.size());
        for (const auto& c : example.candidates) {
            if (c.text != m.text) refs_pool.push_back(c);
        }
        const auto refs =
            references_for_scoring(refs_pool, config.max_references,
                                   config.include_target_references, example.target);
        const double s = refs.positives.empty()
                             ? 0.0
                             : evaluator.score(example.question, m.text, refs).value();
        m.score = s;
        pool.scores.push_back(UnitScore(s));
    }

    const std::size_t pool_size = pool.members.size();
    std::vector<std::size_t> ranked(pool_size);
    std::iota(ranked.begin(), ranked.end(), 0);
    std::stable_sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
        return pool.scores[a].value() > pool.scores[b].value();
    });

    const std::size_t target_idx = ranked[0];
    const std::string& new_target = pool.members[target_idx].text;

    const std::size_t k = example.candidates.size();
    std::vector<std::string> new_candidates;
    for (std::size_t r = 1; r < ranked.size() && new_candidates.size() < k; ++r) {
        const auto& text = pool.members[ranked[r]].text;
        if (text == new_target) continue;  // no duplicates of the target
        new_candidates.push_back(text);
    }
    if (new_candidates.size() < k) {
        // Recycle the lowest-scoring originals until the context is full.
        std::vector<std::size_t> originals(example.candidates.size());
        std::iota(originals.begin(), originals.end(), 0);
        std::stable_sort(originals.begin(), originals.end(),
                         [&](std::size_t a, std::size_t b) {
                             return pool.scores[a].value() < pool.scores[b].value();
                         });
        std::size_t cursor = 0;
        while (new_candidates.size() < k) {
            new_candidates.push_back(example.candidates[originals[cursor]].text);
            cursor = (cursor + 1) % originals.size();
        }
    }

    RebuildResult result;
    result.example.question = example.question;
    for (auto& text : new_candidates) {
        result.example.candidates.push_back({std::move(text), CandidateLabel::unlabeled});
    }
    result.example.target = new_target;
    result.example.provenance = "dda";
    result.pool = std::move(pool);
    return result;
}

GenQAExample rebuild_example_dynamic(const GenQAExample& example,
                                     const GeneratorParams& model,
                                     Evaluator& evaluator,
                                     const StrategyConfig& config) {
    return rebuild_example_dynamic_detailed(example, model, evaluator, config)
        .example;
}

double lw_weight(UnitScore score) { return 1.0 - score.value(); }

GeneratorParams make_initial_params(std::uint64_t seed) {
    GeneratorParams params;
    SplitMix64 rng(mix_seed(seed, 0x1217));
    for (auto& w : params.weights) w = (rng.next_double() - 0.5) * 0.5;
    return params;
}

std::pair<GeneratorParams, TrainingHistory> run_training(
    const Dataset& train, const Dataset& dev, Evaluator& evaluator,
    const StrategyConfig& config) {
    validate_config(config);
    if (train.empty()) throw ValidationError("training dataset is empty");
    if (dev.empty()) throw ValidationError("dev dataset is empty");

    const bool needs_targets = config.strategy != Strategy::dda;
    if (needs_targets) {
        for (const auto& ex : train.examples) {
            if (!ex.target) {
                throw ValidationError("strategy " +
                                      std::string(to_string(config.strategy)) +
                                      " needs a target on every example; \"" +
                                      ex.question.id + "\" has none");
            }
        }
    }

    GeneratorParams params = make_initial_params(config.seed);
    GeneratorParams best_params = params;
    TrainingHistory history;
    double best_score = -1.0;
    int best_epoch = 0;
    int stall = 0;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        std::vector<GenQAExample> epoch_examples;
        std::optional<std::size_t> augmented_size;
        if (config.strategy == Strategy::dda) {
            // Rebuild with the epoch-start snapshot before any update.
            const GeneratorParams snapshot = params;
            epoch_examples.reserve(train.size());
            std::size_t generation_count = 0;
            for (std::size_t i = 0; i < train.size(); ++i) {
                StrategyConfig per_example = config;
                per_example.seed =
                    mix_seed(mix_seed(config.seed, static_cast<std::uint64_t>(epoch)), i);
                auto rebuilt = rebuild_example_dynamic_detailed(
                    train.examples[i], snapshot, evaluator, per_example);
                generation_count +=
                    rebuilt.pool.members.size() - train.examples[i].candidates.size() -
                    (train.examples[i].target ? 1 : 0);
                epoch_examples.push_back(std::move(rebuilt.example));
            }
            augmented_size = generation_count;
        } else {
            epoch_examples = train.examples;
        }

        const auto order = shuffled_indices(
            epoch_examples.size(),
            mix_seed(mix_seed(config.seed, 0x5EEDu), static_cast<std::uint64_t>(epoch)));

        double loss_sum = 0.0;
        std::size_t loss_count = 0;
        const std::size_t batch_size = static_cast<std::size_t>(config.batch_size);
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            const std::size_t end = std::min(order.size(), start + batch_size);
            std::vector<WeightedExample> batch;
            batch.reserve(end - start);
            for (std::size_t b = start; b < end; ++b) {
                const auto& ex = epoch_examples[order[b]];
                double weight = 1.0;
                if (config.strategy == Strategy::lw) {
                    const auto texts = candidate_texts(ex);
                    const auto pick = argmax_candidate(params, ex.question, texts);
                    const auto refs = references_for_scoring(
                        ex.candidates, config.max_references,
                        config.include_target_references, ex.target);
                    const double s =
                        refs.positives.empty()
                            ? 0.0
                            : evaluator.score(ex.question, texts[pick], refs).value();
                    weight = lw_weight(UnitScore(s));
                }
                batch.emplace_back(ex, weight);
            }
            const auto [next, mean_loss] =
                train_step_with_loss(params, batch, config.lr);
            params = next;
            loss_sum += mean_loss * static_cast<double>(batch.size());
            loss_count += batch.size();
        }

        const double dev_score =
            gava_score_dataset(params, dev, evaluator, config.decoding(),
                               config.max_references,
                               config.include_target_references);

        EpochRecord record;
        record.epoch = epoch;
        record.train_loss_mean =
            loss_count > 0 ? loss_sum / static_cast<double>(loss_count) : 0.0;
        record.dev_gava_score = dev_score;
        record.augmented_size = augmented_size;
        history.records.push_back(record);

        if (dev_score > best_score) {
            best_score = dev_score;
            best_params = params;
            best_epoch = epoch;
            stall = 0;
        } else {
            ++stall;
            if (stall >= config.patience) break;
        }
    }

    history.best_epoch = best_epoch;
    return {best_params, history};
}

}  // namespace gava
