#include "gava/generator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_map>

#include <json.hpp>

#include "gava/errors.hpp"
#include "gava/rng.hpp"
#include "gava/text.hpp"

namespace gava {

using nlohmann::json;

FeatureVector featurize(const Question& q, const std::string& candidate) {
    const auto q_tokens = tokenize(q.text);
    const auto c_tokens = tokenize(candidate);
    if (q_tokens.empty()) throw ValidationError("featurize: empty question text");
    if (c_tokens.empty()) throw ValidationError("featurize: empty candidate text");

    FeatureVector phi;
    phi[0] = token_f1(q_tokens, c_tokens);
    phi[1] = std::min(static_cast<double>(c_tokens.size()) / 50.0, 1.0);
    phi[2] = token_coverage(q.text, candidate);
    phi[3] = 1.0;
    return phi;
}

namespace {

std::vector<double> raw_scores(const GeneratorParams& params, const Question& q,
                               const std::vector<std::string>& candidates) {
    std::vector<double> z;
    z.reserve(candidates.size());
    for (const auto& c : candidates) {
        const auto phi = featurize(q, c);
        double dot = 0.0;
        for (std::size_t j = 0; j < kFeatureCount; ++j) dot += params.weights[j] * phi[j];
        z.push_back(dot);
    }
    return z;
}

}  // namespace

std::vector<double> candidate_distribution(const GeneratorParams& params,
                                           const Question& q,
                                           const std::vector<std::string>& candidates,
                                           double temperature) {
    if (candidates.empty())
        throw ValidationError("candidate_distribution: no candidates");
    if (temperature < 0.0)
        throw ValidationError("temperature must be >= 0");

    const auto z = raw_scores(params, q, candidates);
    std::vector<double> p(z.size(), 0.0);
    if (temperature == 0.0) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < z.size(); ++i) {
            if (z[i] > z[best]) best = i;
        }
        p[best] = 1.0;
        return p;
    }

    const double z_max = *std::max_element(z.begin(), z.end());
    double total = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        p[i] = std::exp((z[i] - z_max) / temperature);
        total += p[i];
    }
    for (auto& v : p) v /= total;
    return p;
}

std::size_t argmax_candidate(const GeneratorParams& params, const Question& q,
                             const std::vector<std::string>& candidates) {
    if (candidates.empty()) throw ValidationError("argmax_candidate: no candidates");
    const auto z = raw_scores(params, q, candidates);
    std::size_t best = 0;
    for (std::size_t i = 1; i < z.size(); ++i) {
        if (z[i] > z[best]) best = i;
    }
    return best;
}

std::vector<GeneratedAnswer> sample_generations(const GeneratorParams& params,
                                                const Question& q,
                                                const std::vector<std::string>& candidates,
                                                const DecodingConfig& decoding,
                                                std::uint64_t rng_seed) {
    if (candidates.empty()) throw ValidationError("sample_generations: no candidates");
    if (decoding.sample_count < 1)
        throw ValidationError("sample_count l must be >= 1");

    const auto p = candidate_distribution(params, q, candidates, decoding.temperature);
    SplitMix64 rng(rng_seed);

    std::vector<GeneratedAnswer> out;
    out.reserve(static_cast<std::size_t>(decoding.sample_count));
    for (int s = 0; s < decoding.sample_count; ++s) {
        const double u = rng.next_double();
        double cum = 0.0;
        std::size_t pick = p.size() - 1;
        for (std::size_t i = 0; i < p.size(); ++i) {
            cum += p[i];
            if (u < cum) {
                pick = i;
                break;
            }
        }
        // u past the accumulated mass (float round-off): take the last
        // candidate with non-zero probability.
        if (p[pick] <= 0.0) {
            for (std::size_t i = p.size(); i-- > 0;) {
                if (p[i] > 0.0) {
                    pick = i;
                    break;
                }
            }
        }
        GeneratedAnswer g;
        g.text = candidates[pick];
        g.logprob = std::log(p[pick]);
        g.origin = AnswerOrigin::sampled;
        out.push_back(std::move(g));
    }

    if (decoding.dedupe) {
        std::vector<GeneratedAnswer> unique;
        std::unordered_map<std::string, std::size_t> seen;
        for (auto& g : out) {
            auto it = seen.find(g.text);
            if (it == seen.end()) {
                seen.emplace(g.text, unique.size());
                unique.push_back(std::move(g));
            } else if (g.logprob > unique[it->second].logprob) {
                unique[it->second].logprob = g.logprob;
            }
        }
        out = std::move(unique);
    }
    return out;
}

std::size_t align_target(const std::string& target,
                         const std::vector<std::string>& candidates) {
    if (candidates.empty()) throw ValidationError("align_target: no candidates");
    const auto t_tokens = tokenize(target);
    if (t_tokens.empty()) throw ValidationError("align_target: empty target");

    std::size_t best = 0;
    double best_f1 = -1.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double f1 = token_f1(t_tokens, tokenize(candidates[i]));
        if (f1 > best_f1) {
            best_f1 = f1;
            best = i;
        }
    }
    return best;
}

LossReport loss_and_gradient(const GeneratorParams& params,
                             const GenQAExample& example,
                             double instance_weight) {
    if (!example.target) {
        throw ValidationError("example \"" + example.question.id +
                              "\" has no target; cannot compute loss");
    }
    if (!(instance_weight >= 0.0 && instance_weight <= 1.0)) {
        throw ValidationError("instance_weight must be in [0,1]");
    }

    std::vector<std::string> texts;
    texts.reserve(example.candidates.size());
    for (const auto& c : example.candidates) texts.push_back(c.text);

    const auto p = candidate_distribution(params, example.question, texts, 1.0);
    const std::size_t target_idx = align_target(*example.target, texts);

    LossReport report;
    report.weight_applied = instance_weight;
    report.loss = instance_weight * -std::log(p[target_idx]);
    for (std::size_t i = 0; i < texts.size(); ++i) {
        const auto phi = featurize(example.question, texts[i]);
        const double coef =
            instance_weight * (p[i] - (i == target_idx ? 1.0 : 0.0));
        for (std::size_t j = 0; j < kFeatureCount; ++j) {
            report.gradient[j] += coef * phi[j];
        }
    }
    return report;
}

std::pair<GeneratorParams, double> train_step_with_loss(
    const GeneratorParams& params, const std::vector<WeightedExample>& batch,
    double lr) {
    if (batch.empty()) throw ValidationError("train_step: empty batch");
    if (!(lr > 0.0)) throw ValidationError("train_step: lr must be > 0");

    std::array<double, kFeatureCount> grad{};
    double loss_sum = 0.0;
    for (const auto& [example, weight] : batch) {
        const auto report = loss_and_gradient(params, example, weight);
        loss_sum += report.loss;
        for (std::size_t j = 0; j < kFeatureCount; ++j) grad[j] += report.gradient[j];
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    GeneratorParams next = params;
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
        const double g = grad[j] * inv;
        if (!std::isfinite(g)) throw ValidationError("train_step: non-finite gradient");
        next.weights[j] -= lr * g;
    }
    next.version = params.version + 1;
    return {next, loss_sum * inv};
}

GeneratorParams train_step(const GeneratorParams& params,
                           const std::vector<WeightedExample>& batch,
                           double lr) {
    return train_step_with_loss(params, batch, lr).first;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::string& path) {
    json j;
    j["schema"] = 1;
    j["weights"] = checkpoint.params.weights;
    j["version"] = checkpoint.params.version;
    j["config_hash"] = checkpoint.config_hash;
    j["epoch"] = checkpoint.epoch;
    j["dev_gava_score"] = checkpoint.dev_gava_score;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open checkpoint file for write: " + path);
    out << j.dump() << "\n";
    if (!out) throw std::runtime_error("failed writing checkpoint to " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open checkpoint file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ValidationError("bad checkpoint JSON in " + path + ": " + e.what());
    }
    if (!j.contains("schema") || j["schema"].get<int>() != 1) {
        throw ValidationError("unsupported checkpoint schema in " + path);
    }
    Checkpoint ck;
    const auto weights = j.at("weights").get<std::vector<double>>();
    if (weights.size() != kFeatureCount) {
        throw ValidationError("checkpoint weight count " +
                              std::to_string(weights.size()) + " != " +
                              std::to_string(kFeatureCount));
    }
    std::copy(weights.begin(), weights.end(), ck.params.weights.begin());
    ck.params.version = j.at("version").get<int>();
    ck.config_hash = j.value("config_hash", "");
    ck.epoch = j.value("epoch", 0);
    ck.dev_gava_score = j.value("dev_gava_score", 0.0);
    return ck;
}

}  // namespace gava
