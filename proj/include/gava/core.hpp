#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gava {

struct Question {
    std::string id;
    std::string text;

    bool operator==(const Question&) const = default;
};

enum class CandidateLabel { correct, incorrect, unlabeled };

const char* to_string(CandidateLabel label);

struct AnswerCandidate {
    std::string text;
    CandidateLabel label = CandidateLabel::unlabeled;

    bool operator==(const AnswerCandidate&) const = default;
};

// One rater's correctness judgment for a (question, answer) pair. Judgments
// are graded in [0,1] so averaged crowd scores can be ingested directly.
struct AnnotationRecord {
    std::string rater_id;
    double judgment = 0.0;

    bool operator==(const AnnotationRecord&) const = default;
};

enum class AnswerOrigin { sampled, candidate, target };

const char* to_string(AnswerOrigin origin);

// An answer produced by (or fed through) the generator, with its sampling
// log-probability and, once evaluated, its correctness score.
struct GeneratedAnswer {
    std::string text;
    std::optional<double> score;  // in [0,1] when present
    double logprob = 0.0;         // <= 0
    AnswerOrigin origin = AnswerOrigin::sampled;

    bool operator==(const GeneratedAnswer&) const = default;
};

// One training unit: a question, its k candidate answers used as input
// context, and (optionally) a human-authored target answer.
struct GenQAExample {
    Question question;
    std::vector<AnswerCandidate> candidates;
    std::optional<std::string> target;
    std::optional<std::vector<AnnotationRecord>> annotations;
    // "original" | "sda" | "dda"; set when a dataset passes through
    // augmentation, absent on plain source data.
    std::optional<std::string> provenance;

    bool operator==(const GenQAExample&) const = default;
};

struct DatasetMetadata {
    std::string source;
    int schema_version = 1;

    bool operator==(const DatasetMetadata&) const = default;
};

struct Dataset {
    std::vector<GenQAExample> examples;
    DatasetMetadata metadata;

    bool operator==(const Dataset&) const = default;

    std::size_t size() const { return examples.size(); }
    bool empty() const { return examples.empty(); }
};

struct Violation {
    enum class Kind {
        empty_question,
        empty_candidate,
        candidate_count_mismatch,
        annotation_out_of_range,
        empty_target,
        score_out_of_range,
    };
    Kind kind;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
};

// Violations are data, not exceptions; never throws.
ValidationReport validate_example(const GenQAExample& example, int expected_k);

// Reads a UTF-8 JSONL dataset (one example per line). Every record must pass
// validation; errors name the offending line. In strict mode candidate lists
// longer than expected_k are truncated and shorter ones rejected; lenient
// mode keeps whatever length the record carries.
Dataset load_dataset(const std::string& path, int expected_k, bool strict_k = true);

// Inverse of load_dataset; one JSON object per line, key-sorted so identical
// datasets serialize byte-identically.
void save_dataset(const Dataset& dataset, const std::string& path);

std::string example_to_json_line(const GenQAExample& example);
GenQAExample example_from_json_line(const std::string& line);

// Disjoint, exhaustive split; identical (dataset, fraction, seed) inputs give
// identical splits. dev gets round(n * dev_fraction) examples; both halves
// keep the source order.
std::pair<Dataset, Dataset> split_dataset(const Dataset& dataset,
                                          double dev_fraction,
                                          std::uint64_t seed);

}  // namespace gava
