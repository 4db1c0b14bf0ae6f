#pragma once
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gava/core.hpp"

namespace gava {

// Positive and negative reference answers consumed by the evaluator, in
// selection order. Each reference is non-empty.
struct ReferenceSet {
    std::vector<std::string> positives;
    std::vector<std::string> negatives;

    bool empty() const { return positives.empty() && negatives.empty(); }
    std::size_t size() const { return positives.size() + negatives.size(); }

    bool operator==(const ReferenceSet&) const = default;
};

enum class RoleTag { question, answer, positive_ref, negative_ref };

const char* prompt_token(RoleTag tag);

// The flattened evaluator input: one question segment, one answer segment,
// then one segment per reference prefixed by its type prompt.
struct PromptSequence {
    std::vector<std::pair<RoleTag, std::string>> segments;
    std::string rendered;
};

// A correctness probability. Throws ValidationError outside [0,1].
class UnitScore {
public:
    UnitScore() = default;
    explicit UnitScore(double value);

    static UnitScore clamped(double value);

    double value() const { return value_; }

    bool operator==(const UnitScore&) const = default;

private:
    double value_ = 0.0;
};

// One evaluator training row: the candidate under judgment plus the other
// candidates of its question as references. The answer text never appears
// among its own references.
struct GavaTrainingInstance {
    Question question;
    std::string answer;
    bool label = false;
    ReferenceSet references;
};

// Renders "question: <q> answer: <a>" followed by "correct: <r>" per
// positive then "wrong: <r>" per negative, single-space separated.
PromptSequence encode_multi_reference(const Question& q,
                                      const std::string& answer,
                                      const ReferenceSet& refs);

// Picks up to ceil(n/2) positives (dataset order), fills the remaining slots
// with negatives, then backfills leftover positives, never exceeding n.
// Unlabeled candidate sets are treated as all-positive. Mixing labeled and
// unlabeled candidates is an error.
ReferenceSet select_references(const std::vector<AnswerCandidate>& candidates,
                               int n);

// References for scoring a generated answer: the example's candidates,
// label-stripped (all treated as positive), capped at n. When
// include_target is set the human target is prepended as the first
// positive. n <= 0 means no cap.
ReferenceSet references_for_scoring(
    const std::vector<AnswerCandidate>& candidates, int n,
    bool include_target = false,
    const std::optional<std::string>& target = std::nullopt);

// Deterministic stand-in for a learned encoder:
//   clamp01( maxF1+ - 0.5 * maxF1- )
// where maxF1+/- are the best token-F1 between the answer and any
// positive/negative reference (maxF1- = 0 with no negatives).
// Requires at least one positive reference.
UnitScore overlap_oracle_score(const Question& q, const std::string& answer,
                               const ReferenceSet& refs);

// Scoring contract implemented by backends. Pure for fixed backend
// parameters; safe to call concurrently.
class Evaluator {
public:
    virtual ~Evaluator() = default;

    // answer must be non-empty; result is deterministic for fixed backend
    // parameters and always lands in [0,1].
    virtual UnitScore score(const Question& q, const std::string& answer,
                            const ReferenceSet& refs) = 0;

    struct Request {
        Question question;
        std::string answer;
        ReferenceSet references;
    };

    // Order-preserving batch scoring; default loops over score().
    virtual std::vector<UnitScore> score_batch(const std::vector<Request>& batch);
};

class OverlapOracleEvaluator final : public Evaluator {
public:
    UnitScore score(const Question& q, const std::string& answer,
                    const ReferenceSet& refs) override;
};

// Shells out to an external learned backend via the score-batch file
// exchange: JSONL lines {"rendered": str} in, {"score": number} out,
// order-preserving. The command is invoked as `cmd <input> <output>`.
class ExternalProcessEvaluator final : public Evaluator {
public:
    explicit ExternalProcessEvaluator(std::string command);

    UnitScore score(const Question& q, const std::string& answer,
                    const ReferenceSet& refs) override;
    std::vector<UnitScore> score_batch(const std::vector<Request>& batch) override;

private:
    std::string command_;
};

// One instance per labeled candidate: the candidate becomes the answer under
// judgment and the remaining candidates (self text excluded) supply the
// references. Every candidate must carry a correct/incorrect label.
std::vector<GavaTrainingInstance> build_gava_training_instances(
    const Dataset& dataset, int n);

// Probability that a random positive outscores a random negative, ties
// counted half. O(m log m) rank-sum; agrees with the pairwise count to
// 1e-12. Both classes must be present.
double auroc(const std::vector<UnitScore>& scores, const std::vector<int>& labels);

// Appendix-style defaults for training a learned encoder backend. The
// backend itself lives outside this artifact; these document the contract.
struct EncoderBackendConfig {
    double lr = 1e-6;
    int batch_size = 32;
    int epochs = 20;
    // checkpoint selection maximizes dev AUROC
};

std::unique_ptr<Evaluator> make_evaluator(const std::string& selector);

}  // namespace gava
