#include "gava/core.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "gava/errors.hpp"
#include "gava/rng.hpp"
#include "gava/text.hpp"

namespace gava {

using nlohmann::json;

const char* to_string(CandidateLabel label) {
    switch (label) {
        case CandidateLabel::correct: return "correct";
        case CandidateLabel::incorrect: return "incorrect";
        case CandidateLabel::unlabeled: return "unlabeled";
    }
    return "unlabeled";
}

const char* to_string(AnswerOrigin origin) {
    switch (origin) {
        case AnswerOrigin::sampled: return "sampled";
        case AnswerOrigin::candidate: return "candidate";
        case AnswerOrigin::target: return "target";
    }
    return "sampled";
}

ValidationReport validate_example(const GenQAExample& example, int expected_k) {
    ValidationReport report;
    auto add = [&](Violation::Kind kind, std::string message) {
        report.violations.push_back({kind, std::move(message)});
    };

    if (is_blank(example.question.text)) {
        add(Violation::Kind::empty_question,
            "question text is empty (id=" + example.question.id + ")");
    }
    for (std::size_t i = 0; i < example.candidates.size(); ++i) {
        if (is_blank(example.candidates[i].text)) {
            add(Violation::Kind::empty_candidate,
                "candidate " + std::to_string(i) + " is empty");
        }
    }
    if (expected_k > 0 &&
        example.candidates.size() != static_cast<std::size_t>(expected_k)) {
        add(Violation::Kind::candidate_count_mismatch,
            "expected " + std::to_string(expected_k) + " candidates, got " +
                std::to_string(example.candidates.size()));
    }
    if (example.target && is_blank(*example.target)) {
        add(Violation::Kind::empty_target, "target present but empty");
    }
    if (example.annotations) {
        for (std::size_t i = 0; i < example.annotations->size(); ++i) {
            const double j = (*example.annotations)[i].judgment;
            if (!(j >= 0.0 && j <= 1.0)) {
                add(Violation::Kind::annotation_out_of_range,
                    "annotation " + std::to_string(i) + " judgment " +
                        std::to_string(j) + " outside [0,1]");
            }
        }
    }
    return report;
}

namespace {

json example_to_json(const GenQAExample& ex) {
    json j;
    j["id"] = ex.question.id;
    j["question"] = ex.question.text;
    json cands = json::array();
    for (const auto& c : ex.candidates) {
        json jc;
        jc["text"] = c.text;
        if (c.label == CandidateLabel::unlabeled) {
            jc["label"] = nullptr;
        } else {
            jc["label"] = to_string(c.label);
        }
        cands.push_back(std::move(jc));
    }
    j["candidates"] = std::move(cands);
    j["target"] = ex.target ? json(*ex.target) : json(nullptr);
    if (ex.annotations) {
        json anns = json::array();
        for (const auto& a : *ex.annotations) {
            anns.push_back({{"rater_id", a.rater_id}, {"judgment", a.judgment}});
        }
        j["annotations"] = std::move(anns);
    } else {
        j["annotations"] = nullptr;
    }
    if (ex.provenance) j["provenance"] = *ex.provenance;
    return j;
}

GenQAExample example_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("record is not a JSON object");
    GenQAExample ex;
    if (!j.contains("id") || !j["id"].is_string())
        throw ValidationError("missing or non-string \"id\"");
    if (!j.contains("question") || !j["question"].is_string())
        throw ValidationError("missing or non-string \"question\"");
    ex.question.id = j["id"].get<std::string>();
    ex.question.text = j["question"].get<std::string>();

    if (!j.contains("candidates") || !j["candidates"].is_array())
        throw ValidationError("missing or non-array \"candidates\"");
    for (const auto& jc : j["candidates"]) {
        AnswerCandidate c;
        if (!jc.is_object() || !jc.contains("text") || !jc["text"].is_string())
            throw ValidationError("candidate missing string \"text\"");
        c.text = jc["text"].get<std::string>();
        if (jc.contains("label") && !jc["label"].is_null()) {
            const auto s = jc["label"].get<std::string>();
            if (s == "correct") c.label = CandidateLabel::correct;
            else if (s == "incorrect") c.label = CandidateLabel::incorrect;
            else throw ValidationError("unknown candidate label \"" + s + "\"");
        }
        ex.candidates.push_back(std::move(c));
    }

    if (j.contains("target") && !j["target"].is_null()) {
        if (!j["target"].is_string())
            throw ValidationError("\"target\" must be a string or null");
        ex.target = j["target"].get<std::string>();
    }
    if (j.contains("annotations") && !j["annotations"].is_null()) {
        if (!j["annotations"].is_array())
            throw ValidationError("\"annotations\" must be an array or null");
        std::vector<AnnotationRecord> anns;
        for (const auto& ja : j["annotations"]) {
            if (!ja.is_object() || !ja.contains("rater_id") ||
                !ja.contains("judgment") || !ja["judgment"].is_number())
                throw ValidationError("annotation needs \"rater_id\" and numeric \"judgment\"");
            anns.push_back({ja["rater_id"].get<std::string>(),
                            ja["judgment"].get<double>()});
        }
        ex.annotations = std::move(anns);
    }
    if (j.contains("provenance") && !j["provenance"].is_null()) {
        ex.provenance = j["provenance"].get<std::string>();
    }

    static const std::unordered_set<std::string> known = {
        "id", "question", "candidates", "target", "annotations", "provenance"};
    for (const auto& [key, _] : j.items()) {
        if (!known.count(key)) throw ValidationError("unknown key \"" + key + "\"");
    }
    return ex;
}

std::string violations_message(const ValidationReport& report) {
    std::string msg;
    for (const auto& v : report.violations) {
        if (!msg.empty()) msg += "; ";
        msg += v.message;
    }
    return msg;
}

}  // namespace

std::string example_to_json_line(const GenQAExample& example) {
    return example_to_json(example).dump();
}

GenQAExample example_from_json_line(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("JSON parse error: ") + e.what());
    }
    return example_from_json(j);
}

Dataset load_dataset(const std::string& path, int expected_k, bool strict_k) {
    if (expected_k < 1) throw ValidationError("expected_k must be >= 1");
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open dataset file: " + path);

    Dataset dataset;
    dataset.metadata.source = path;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || is_blank(line)) continue;
        GenQAExample ex;
        try {
            ex = example_from_json_line(line);
        } catch (const ValidationError& e) {
            throw ValidationError(path + ":" + std::to_string(line_no) + ": " +
                                  e.what());
        }
        if (strict_k &&
            ex.candidates.size() > static_cast<std::size_t>(expected_k)) {
            ex.candidates.resize(static_cast<std::size_t>(expected_k));
        }
        const auto report = validate_example(ex, strict_k ? expected_k : 0);
        if (!report.ok()) {
            throw ValidationError(path + ":" + std::to_string(line_no) + ": " +
                                  violations_message(report));
        }
        if (!seen_ids.insert(ex.question.id).second) {
            throw ValidationError(path + ":" + std::to_string(line_no) +
                                  ": duplicate example id \"" + ex.question.id +
                                  "\"");
        }
        dataset.examples.push_back(std::move(ex));
    }
    return dataset;
}

void save_dataset(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    for (const auto& ex : dataset.examples) {
        out << example_to_json_line(ex) << "\n";
    }
    if (!out) throw std::runtime_error("failed writing dataset to " + path);
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& dataset,
                                          double dev_fraction,
                                          std::uint64_t seed) {
    if (dataset.empty()) throw ValidationError("cannot split an empty dataset");
    if (!(dev_fraction > 0.0 && dev_fraction < 1.0))
        throw ValidationError("dev_fraction must be in (0,1)");

    const std::size_t n = dataset.size();
    std::size_t dev_count = static_cast<std::size_t>(
        std::llround(static_cast<double>(n) * dev_fraction));
    if (dev_count > n) dev_count = n;

    const auto order = shuffled_indices(n, seed);
    std::vector<bool> in_dev(n, false);
    for (std::size_t i = 0; i < dev_count; ++i) in_dev[order[i]] = true;

    Dataset train, dev;
    train.metadata = dataset.metadata;
    dev.metadata = dataset.metadata;
    for (std::size_t i = 0; i < n; ++i) {
        (in_dev[i] ? dev : train).examples.push_back(dataset.examples[i]);
    }
    return {std::move(train), std::move(dev)};
}

}  // namespace gava
