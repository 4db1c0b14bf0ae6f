#pragma once
#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gava/core.hpp"

namespace gava {

inline constexpr std::size_t kFeatureCount = 4;

// [ token-F1(question, candidate),
//   min(|candidate tokens| / 50, 1),
//   fraction of question tokens appearing in the candidate,
//   1 (bias) ]
using FeatureVector = std::array<double, kFeatureCount>;

FeatureVector featurize(const Question& q, const std::string& candidate);

// Trainable state of the log-linear copy-generator. The version counter
// increments on every update so stale reads are detectable.
struct GeneratorParams {
    std::array<double, kFeatureCount> weights{};
    int version = 0;

    bool operator==(const GeneratorParams&) const = default;
};

struct DecodingConfig {
    double temperature = 1.0;
    int sample_count = 5;  // l
    bool dedupe = false;
};

struct LossReport {
    double loss = 0.0;  // instance_weight * cross-entropy, >= 0
    std::array<double, kFeatureCount> gradient{};
    double weight_applied = 1.0;
};

// p_i proportional to exp(w . phi(q, a_i) / T). T = 0 returns a one-hot
// vector at the argmax, ties broken by lowest index. Sums to 1 within 1e-12.
std::vector<double> candidate_distribution(const GeneratorParams& params,
                                           const Question& q,
                                           const std::vector<std::string>& candidates,
                                           double temperature);

std::size_t argmax_candidate(const GeneratorParams& params, const Question& q,
                             const std::vector<std::string>& candidates);

// Draws l candidates from candidate_distribution using the pinned SplitMix64
// stream; identical seeds give identical output. dedupe collapses identical
// texts keeping the highest logprob.
std::vector<GeneratedAnswer> sample_generations(const GeneratorParams& params,
                                                const Question& q,
                                                const std::vector<std::string>& candidates,
                                                const DecodingConfig& decoding,
                                                std::uint64_t rng_seed);

// Maps a free-text target onto the copy-generator's discrete output space:
// argmax of token-F1(t, candidate), ties broken by lowest index.
std::size_t align_target(const std::string& target,
                         const std::vector<std::string>& candidates);

// Cross-entropy of the aligned target under the temperature-1 distribution,
// scaled by instance_weight, with the analytic gradient
//   w * (p - onehot(target))^T Phi.
LossReport loss_and_gradient(const GeneratorParams& params,
                             const GenQAExample& example,
                             double instance_weight);

using WeightedExample = std::pair<GenQAExample, double>;

// One plain gradient-descent step on the mean of the batch gradients.
GeneratorParams train_step(const GeneratorParams& params,
                           const std::vector<WeightedExample>& batch,
                           double lr);

// train_step plus the mean reported loss, for history bookkeeping.
std::pair<GeneratorParams, double> train_step_with_loss(
    const GeneratorParams& params, const std::vector<WeightedExample>& batch,
    double lr);

struct Checkpoint {
    GeneratorParams params;
    std::string config_hash;
    int epoch = 0;
    double dev_gava_score = 0.0;
};

// JSON schema 1: {"schema", "weights", "version", "config_hash", "epoch",
// "dev_gava_score"}. Key-sorted output, byte-stable for identical runs.
void save_checkpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace gava
