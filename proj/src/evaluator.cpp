#include "gava/evaluator.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "gava/errors.hpp"
#include "gava/text.hpp"

namespace gava {

using nlohmann::json;

const char* prompt_token(RoleTag tag) {
    switch (tag) {
        case RoleTag::question: return "question:";
        case RoleTag::answer: return "answer:";
        case RoleTag::positive_ref: return "correct:";
        case RoleTag::negative_ref: return "wrong:";
    }
    return "";
}

UnitScore::UnitScore(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw ValidationError("score " + std::to_string(value) +
                              " outside [0,1]");
    }
}

UnitScore UnitScore::clamped(double value) {
    if (std::isnan(value)) throw ValidationError("score is NaN");
    return UnitScore(std::clamp(value, 0.0, 1.0));
}

PromptSequence encode_multi_reference(const Question& q,
                                      const std::string& answer,
                                      const ReferenceSet& refs) {
    PromptSequence seq;
    seq.segments.emplace_back(RoleTag::question, q.text);
    seq.segments.emplace_back(RoleTag::answer, answer);
    for (const auto& r : refs.positives)
        seq.segments.emplace_back(RoleTag::positive_ref, r);
    for (const auto& r : refs.negatives)
        seq.segments.emplace_back(RoleTag::negative_ref, r);

    std::string out;
    for (const auto& [tag, text] : seq.segments) {
        if (!out.empty()) out += ' ';
        out += prompt_token(tag);
        out += ' ';
        out += text;
    }
    seq.rendered = std::move(out);
    return seq;
}

ReferenceSet select_references(const std::vector<AnswerCandidate>& candidates,
                               int n) {
    if (n < 1) throw ValidationError("reference budget n must be >= 1");

    bool any_labeled = false, any_unlabeled = false;
    for (const auto& c : candidates) {
        (c.label == CandidateLabel::unlabeled ? any_unlabeled : any_labeled) = true;
    }
    if (any_labeled && any_unlabeled) {
        throw ValidationError(
            "candidates mix labeled and unlabeled entries; label all or none");
    }

    const std::size_t budget = static_cast<std::size_t>(n);
    ReferenceSet refs;
    if (!any_labeled) {
        for (const auto& c : candidates) {
            if (refs.positives.size() >= budget) break;
            refs.positives.push_back(c.text);
        }
        return refs;
    }

    std::vector<const AnswerCandidate*> pos, neg;
    for (const auto& c : candidates) {
        (c.label == CandidateLabel::correct ? pos : neg).push_back(&c);
    }
    const std::size_t pos_quota = (budget + 1) / 2;
    std::size_t take_pos = std::min(pos.size(), pos_quota);
    std::size_t take_neg = std::min(neg.size(), budget - take_pos);
    // Backfill with leftover positives so the budget is not wasted.
    take_pos = std::min(pos.size(), budget - take_neg);
    for (std::size_t i = 0; i < take_pos; ++i) refs.positives.push_back(pos[i]->text);
    for (std::size_t i = 0; i < take_neg; ++i) refs.negatives.push_back(neg[i]->text);
    return refs;
}

ReferenceSet references_for_scoring(
    const std::vector<AnswerCandidate>& candidates, int n,
    bool include_target, const std::optional<std::string>& target) {
    const std::size_t budget =
        n > 0 ? static_cast<std::size_t>(n)
              : candidates.size() + (include_target && target ? 1 : 0);
    ReferenceSet refs;
    if (include_target && target && !is_blank(*target) &&
        refs.positives.size() < budget) {
        refs.positives.push_back(*target);
    }
    for (const auto& c : candidates) {
        if (refs.positives.size() >= budget) break;
        refs.positives.push_back(c.text);
    }
    return refs;
}

UnitScore overlap_oracle_score(const Question& q, const std::string& answer,
                               const ReferenceSet& refs) {
    (void)q;  // the oracle judges by reference overlap only
    if (refs.positives.empty()) {
        throw ValidationError("oracle requires at least one positive reference");
    }
    const auto answer_tokens = tokenize(answer);
    double best_pos = 0.0, best_neg = 0.0;
    for (const auto& r : refs.positives)
        best_pos = std::max(best_pos, token_f1(answer_tokens, tokenize(r)));
    for (const auto& r : refs.negatives)
        best_neg = std::max(best_neg, token_f1(answer_tokens, tokenize(r)));
    return UnitScore::clamped(best_pos - 0.5 * best_neg);
}

std::vector<UnitScore> Evaluator::score_batch(const std::vector<Request>& batch) {
    std::vector<UnitScore> out;
    out.reserve(batch.size());
    for (const auto& r : batch) out.push_back(score(r.question, r.answer, r.references));
    return out;
}

UnitScore OverlapOracleEvaluator::score(const Question& q,
                                        const std::string& answer,
                                        const ReferenceSet& refs) {
    if (is_blank(answer)) throw ValidationError("cannot score an empty answer");
    return overlap_oracle_score(q, answer, refs);
}

ExternalProcessEvaluator::ExternalProcessEvaluator(std::string command)
    : command_(std::move(command)) {
    if (command_.empty()) throw ValidationError("external evaluator command is empty");
}

UnitScore ExternalProcessEvaluator::score(const Question& q,
                                          const std::string& answer,
                                          const ReferenceSet& refs) {
    return score_batch({Request{q, answer, refs}}).at(0);
}

std::vector<UnitScore> ExternalProcessEvaluator::score_batch(
    const std::vector<Request>& batch) {
    namespace fs = std::filesystem;
    if (batch.empty()) return {};
    for (const auto& r : batch) {
        if (is_blank(r.answer)) throw ValidationError("cannot score an empty answer");
    }

    const auto dir = fs::temp_directory_path() /
                     ("gava-score-" + std::to_string(::getpid()) + "-" +
                      std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(dir);
    const auto in_path = dir / "requests.jsonl";
    const auto out_path = dir / "scores.jsonl";

    {
        std::ofstream in_file(in_path, std::ios::binary | std::ios::trunc);
        if (!in_file) throw std::runtime_error("cannot write " + in_path.string());
        for (const auto& r : batch) {
            const auto prompt = encode_multi_reference(r.question, r.answer, r.references);
            in_file << json{{"rendered", prompt.rendered}}.dump() << "\n";
        }
    }

    const std::string cmd =
        command_ + " \"" + in_path.string() + "\" \"" + out_path.string() + "\"";
    const int rc = std::system(cmd.c_str());
    if (rc != 0) {
        throw std::runtime_error("external evaluator failed (exit " +
                                 std::to_string(rc) + "): " + command_);
    }

    std::ifstream out_file(out_path);
    if (!out_file) {
        throw std::runtime_error("external evaluator wrote no output: " +
                                 out_path.string());
    }
    std::vector<UnitScore> scores;
    std::string line;
    while (std::getline(out_file, line)) {
        if (line.empty() || is_blank(line)) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw std::runtime_error(std::string("bad evaluator output line: ") +
                                     e.what());
        }
        if (!j.contains("score") || !j["score"].is_number()) {
            throw std::runtime_error("evaluator output line missing numeric \"score\"");
        }
        scores.push_back(UnitScore::clamped(j["score"].get<double>()));
    }
    std::error_code ec;
    fs::remove_all(dir, ec);
    if (scores.size() != batch.size()) {
        throw std::runtime_error("external evaluator returned " +
                                 std::to_string(scores.size()) + " scores for " +
                                 std::to_string(batch.size()) + " requests");
    }
    return scores;
}

std::vector<GavaTrainingInstance> build_gava_training_instances(
    const Dataset& dataset, int n) {
    if (n < 1) throw ValidationError("reference budget n must be >= 1");
    std::vector<GavaTrainingInstance> instances;
    for (const auto& ex : dataset.examples) {
        for (const auto& c : ex.candidates) {
            if (c.label == CandidateLabel::unlabeled) {
                throw ValidationError("example \"" + ex.question.id +
                                      "\" has an unlabeled candidate; evaluator "
                                      "training needs correct/incorrect labels");
            }
        }
        for (std::size_t i = 0; i < ex.candidates.size(); ++i) {
            const auto& self = ex.candidates[i];
            std::vector<AnswerCandidate> others;
            others.reserve(ex.candidates.size() - 1);
            for (const auto& c : ex.candidates) {
                if (c.text != self.text) others.push_back(c);
            }
            GavaTrainingInstance inst;
            inst.question = ex.question;
            inst.answer = self.text;
            inst.label = self.label == CandidateLabel::correct;
            inst.references = select_references(others, n);
            instances.push_back(std::move(inst));
        }
    }
    return instances;
}

double auroc(const std::vector<UnitScore>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw ValidationError("auroc: scores and labels differ in length");
    if (scores.empty()) throw ValidationError("auroc: empty input");

    std::size_t positives = 0;
    for (int l : labels) {
        if (l != 0 && l != 1) throw ValidationError("auroc: labels must be 0 or 1");
        positives += static_cast<std::size_t>(l);
    }
    const std::size_t negatives = labels.size() - positives;
    if (positives == 0 || negatives == 0)
        throw ValidationError("auroc: both classes must be present");

    // Mann-Whitney U via average ranks; ties get half credit.
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a].value() < scores[b].value();
    });

    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() &&
               scores[order[j]].value() == scores[order[i]].value()) {
            ++j;
        }
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] == 1) pos_rank_sum += avg_rank;
        }
        i = j;
    }
    const double p = static_cast<double>(positives);
    const double u = pos_rank_sum - p * (p + 1.0) / 2.0;
    return u / (p * static_cast<double>(negatives));
}

std::unique_ptr<Evaluator> make_evaluator(const std::string& selector) {
    if (selector == "oracle") return std::make_unique<OverlapOracleEvaluator>();
    if (selector.rfind("external:", 0) == 0) {
        return std::make_unique<ExternalProcessEvaluator>(selector.substr(9));
    }
    throw ValidationError("unknown evaluator \"" + selector +
                          "\" (expected oracle or external:CMD)");
}

}  // namespace gava
