#include "gava/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "gava/errors.hpp"
#include "gava/text.hpp"

namespace gava {

using nlohmann::json;

CorrectnessVerdict aggregate_annotations(const std::string& question_id,
                                         const std::vector<AnnotationRecord>& records) {
    if (records.empty()) {
        throw ValidationError("no annotations to aggregate for \"" + question_id + "\"");
    }
    double sum = 0.0;
    for (const auto& r : records) {
        if (!(r.judgment >= 0.0 && r.judgment <= 1.0)) {
            throw ValidationError("judgment " + std::to_string(r.judgment) +
                                  " outside [0,1] for \"" + question_id + "\"");
        }
        sum += r.judgment;
    }
    CorrectnessVerdict v;
    v.question_id = question_id;
    v.mean_judgment = sum / static_cast<double>(records.size());
    v.is_correct = v.mean_judgment > 0.5;
    return v;
}

double answering_accuracy(const std::vector<CorrectnessVerdict>& verdicts) {
    if (verdicts.empty()) throw ValidationError("no verdicts; accuracy undefined");
    std::size_t correct = 0;
    for (const auto& v : verdicts) correct += v.is_correct ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(verdicts.size());
}

double gava_score_dataset(const GeneratorParams& model, const Dataset& dataset,
                          Evaluator& evaluator, const DecodingConfig& decoding,
                          int max_references, bool include_target) {
    (void)decoding;  // evaluation is one greedy generation per question
    if (dataset.empty()) throw ValidationError("cannot score an empty dataset");

    double sum = 0.0;
    for (const auto& ex : dataset.examples) {
        std::vector<std::string> texts;
        texts.reserve(ex.candidates.size());
        for (const auto& c : ex.candidates) texts.push_back(c.text);
        const std::size_t pick = argmax_candidate(model, ex.question, texts);
        const auto refs = references_for_scoring(ex.candidates, max_references,
                                                 include_target, ex.target);
        if (refs.positives.empty()) continue;  // contributes 0
        sum += evaluator.score(ex.question, texts[pick], refs).value();
    }
    return sum / static_cast<double>(dataset.size());
}

namespace {

void check_columns(const MetricColumn& x, const MetricColumn& y) {
    if (x.values.size() != y.values.size()) {
        throw ValidationError("columns \"" + x.name + "\" and \"" + y.name +
                              "\" differ in length");
    }
    if (x.values.size() < 2) {
        throw ValidationError("correlation needs at least 2 rows");
    }
}

std::vector<double> average_ranks(const std::vector<double>& values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size(), 0.0);
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
        i = j;
    }
    return ranks;
}

double pearson_values(const std::vector<double>& x, const std::vector<double>& y,
                      const std::string& x_name, const std::string& y_name) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw ValidationError("zero variance in column \"" +
                              (sxx == 0.0 ? x_name : y_name) + "\"");
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

double pearson(const MetricColumn& x, const MetricColumn& y) {
    check_columns(x, y);
    return pearson_values(x.values, y.values, x.name, y.name);
}

double spearman(const MetricColumn& x, const MetricColumn& y) {
    check_columns(x, y);
    return pearson_values(average_ranks(x.values), average_ranks(y.values),
                          x.name, y.name);
}

CorrelationStudy load_correlation_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open CSV file: " + path);

    auto split = [](const std::string& line) {
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ss(line);
        while (std::getline(ss, field, ',')) {
            // trim surrounding spaces
            const auto b = field.find_first_not_of(" \t\r");
            const auto e = field.find_last_not_of(" \t\r");
            fields.push_back(b == std::string::npos
                                 ? std::string()
                                 : field.substr(b, e - b + 1));
        }
        return fields;
    };

    std::string line;
    if (!std::getline(in, line)) throw ValidationError(path + ": empty CSV");
    const auto header = split(line);
    if (header.size() < 3 || header[0] != "system" || header[1] != "manual") {
        throw ValidationError(path + ": header must be system,manual,<metric>...");
    }

    CorrelationStudy study;
    study.manual.name = "manual";
    for (std::size_t c = 2; c < header.size(); ++c) {
        study.metrics.push_back({header[c], {}});
    }

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || is_blank(line)) continue;
        const auto fields = split(line);
        if (fields.size() != header.size()) {
            throw ValidationError(path + ":" + std::to_string(line_no) +
                                  ": expected " + std::to_string(header.size()) +
                                  " fields, got " + std::to_string(fields.size()));
        }
        study.systems.push_back(fields[0]);
        for (std::size_t c = 1; c < fields.size(); ++c) {
            double value = 0.0;
            try {
                std::size_t pos = 0;
                value = std::stod(fields[c], &pos);
                if (pos != fields[c].size()) throw std::invalid_argument(fields[c]);
            } catch (const std::exception&) {
                throw ValidationError(path + ":" + std::to_string(line_no) +
                                      ": non-numeric value \"" + fields[c] + "\"");
            }
            if (c == 1) {
                study.manual.values.push_back(value);
            } else {
                study.metrics[c - 2].values.push_back(value);
            }
        }
    }
    if (study.systems.size() < 2) {
        throw ValidationError(path + ": need at least 2 system rows");
    }
    return study;
}

CorrelationReport correlate(const CorrelationStudy& study) {
    CorrelationReport report;
    for (const auto& metric : study.metrics) {
        report.pearson[metric.name] = pearson(study.manual, metric);
        report.spearman[metric.name] = spearman(study.manual, metric);
    }
    return report;
}

std::string correlation_report_json(const CorrelationReport& report) {
    json j;
    j["pearson"] = json::object();
    j["spearman"] = json::object();
    for (const auto& [name, r] : report.pearson) j["pearson"][name] = r;
    for (const auto& [name, r] : report.spearman) j["spearman"][name] = r;
    return j.dump(2) + "\n";
}

}  // namespace gava
