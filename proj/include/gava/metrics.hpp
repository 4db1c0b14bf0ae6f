#pragma once
#include <map>
#include <string>
#include <vector>

#include "gava/core.hpp"
#include "gava/evaluator.hpp"
#include "gava/generator.hpp"

namespace gava {

// Averaged human judgment for one answer; correct iff the mean is strictly
// above 0.5 (split juries count as incorrect).
struct CorrectnessVerdict {
    std::string question_id;
    double mean_judgment = 0.0;
    bool is_correct = false;
};

struct MetricColumn {
    std::string name;
    std::vector<double> values;
};

CorrectnessVerdict aggregate_annotations(const std::string& question_id,
                                         const std::vector<AnnotationRecord>& records);

double answering_accuracy(const std::vector<CorrectnessVerdict>& verdicts);

// Mean evaluator score of one greedy generation per question, scored against
// the question's candidates (label-stripped, capped at max_references;
// 0 = no cap). include_target optionally adds the human target as a
// reference.
double gava_score_dataset(const GeneratorParams& model, const Dataset& dataset,
                          Evaluator& evaluator, const DecodingConfig& decoding,
                          int max_references = 0, bool include_target = false);

// Standard sample Pearson r. Requires equal lengths >= 2 and non-zero
// variance on both sides.
double pearson(const MetricColumn& x, const MetricColumn& y);

// Pearson of ranks, tied values assigned average ranks.
double spearman(const MetricColumn& x, const MetricColumn& y);

// Table-shaped correlation study: one system per row, `manual` plus one
// column per automatic metric.
struct CorrelationStudy {
    std::vector<std::string> systems;
    MetricColumn manual;
    std::vector<MetricColumn> metrics;
};

// Parses CSV with header `system,manual,<metric>...`.
CorrelationStudy load_correlation_csv(const std::string& path);

struct CorrelationReport {
    // metric name -> coefficient
    std::map<std::string, double> pearson;
    std::map<std::string, double> spearman;
};

CorrelationReport correlate(const CorrelationStudy& study);

// {"pearson": {...}, "spearman": {...}} keyed by metric name.
std::string correlation_report_json(const CorrelationReport& report);

}  // namespace gava
