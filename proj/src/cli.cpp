#include "gava/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gava/errors.hpp"
#include "gava/metrics.hpp"

namespace gava::cli {

using nlohmann::json;

namespace {

void apply_key(RunConfig& config, const std::string& key, const json& value) {
    try {
        if (key == "strategy") {
            config.strategy.strategy = strategy_from_string(value.get<std::string>());
        } else if (key == "theta") {
            config.strategy.theta = value.get<double>();
        } else if (key == "k") {
            config.strategy.context_size = value.get<int>();
        } else if (key == "l") {
            config.strategy.sample_count = value.get<int>();
        } else if (key == "n") {
            config.strategy.max_references = value.get<int>();
        } else if (key == "epochs") {
            config.strategy.epochs = value.get<int>();
        } else if (key == "patience") {
            config.strategy.patience = value.get<int>();
        } else if (key == "lr") {
            config.strategy.lr = value.get<double>();
        } else if (key == "batch_size") {
            config.strategy.batch_size = value.get<int>();
        } else if (key == "seed") {
            config.strategy.seed = value.get<std::uint64_t>();
            config.seed_set = true;
        } else if (key == "temperature") {
            config.strategy.temperature = value.get<double>();
        } else if (key == "dedupe") {
            config.strategy.dedupe = value.get<bool>();
        } else if (key == "dda_prefilter") {
            config.strategy.dda_prefilter = value.get<bool>();
        } else if (key == "include_target_references") {
            config.strategy.include_target_references = value.get<bool>();
        } else if (key == "evaluator") {
            config.evaluator = value.get<std::string>();
        } else if (key == "strict_k") {
            config.strict_k = value.get<bool>();
        } else if (key == "train_path") {
            config.train_path = value.get<std::string>();
        } else if (key == "dev_path") {
            config.dev_path = value.get<std::string>();
        } else if (key == "input_path") {
            config.input_path = value.get<std::string>();
        } else if (key == "model_path") {
            config.model_path = value.get<std::string>();
        } else if (key == "out_path") {
            config.out_path = value.get<std::string>();
        } else if (key == "history_path") {
            config.history_path = value.get<std::string>();
        } else if (key == "report_path") {
            config.report_path = value.get<std::string>();
        } else {
            throw ValidationError("unknown config key \"" + key + "\"");
        }
    } catch (const json::exception&) {
        throw ValidationError("config key \"" + key + "\" has the wrong type: " +
                              value.dump());
    }
}

json override_value(const std::string& raw) {
    // Overrides arrive as flat strings; accept JSON literals (numbers,
    // booleans) and fall back to plain strings.
    const json parsed = json::parse(raw, nullptr, false);
    if (!parsed.is_discarded() && !parsed.is_object() && !parsed.is_array()) {
        return parsed;
    }
    return json(raw);
}

}  // namespace

RunConfig load_config(const std::string& path,
                      const std::vector<std::pair<std::string, std::string>>& overrides) {
    RunConfig config;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw ValidationError("cannot open config file: " + path);
        json j;
        try {
            in >> j;
        } catch (const json::parse_error& e) {
            throw ValidationError("bad config JSON in " + path + ": " + e.what());
        }
        if (!j.is_object()) throw ValidationError("config must be a JSON object");
        for (const auto& [key, value] : j.items()) {
            apply_key(config, key, value);
        }
    }
    for (const auto& [key, raw] : overrides) {
        apply_key(config, key, override_value(raw));
    }
    if (!config.seed_set) {
        if (const char* env = std::getenv("GAVA_LOOP_SEED")) {
            apply_key(config, "seed", override_value(env));
        }
    }
    validate_config(config.strategy);
    return config;
}

std::string config_canonical_json(const RunConfig& config) {
    json j;
    j["strategy"] = to_string(config.strategy.strategy);
    j["theta"] = config.strategy.theta;
    j["k"] = config.strategy.context_size;
    j["l"] = config.strategy.sample_count;
    j["n"] = config.strategy.max_references;
    j["epochs"] = config.strategy.epochs;
    j["patience"] = config.strategy.patience;
    j["lr"] = config.strategy.lr;
    j["batch_size"] = config.strategy.batch_size;
    j["seed"] = config.strategy.seed;
    j["temperature"] = config.strategy.temperature;
    j["dedupe"] = config.strategy.dedupe;
    j["dda_prefilter"] = config.strategy.dda_prefilter;
    j["include_target_references"] = config.strategy.include_target_references;
    j["evaluator"] = config.evaluator;
    j["strict_k"] = config.strict_k;
    return j.dump();
}

std::string config_hash(const RunConfig& config) {
    // FNV-1a 64
    const std::string canon = config_canonical_json(config);
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

namespace {

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << content;
    if (!out) throw std::runtime_error("failed writing " + path);
}

void check_fresh_output(const RunConfig& config, const std::string& out) {
    if (out.empty()) return;
    for (const std::string& in :
         {config.train_path, config.dev_path, config.input_path, config.model_path}) {
        if (!in.empty() && in == out) {
            throw ValidationError("output path \"" + out +
                                  "\" would overwrite an input file");
        }
    }
}

json base_report(const std::string& command, const RunConfig& config) {
    json j;
    j["command"] = command;
    j["config_hash"] = config_hash(config);
    j["seed"] = config.strategy.seed;
    return j;
}

void finish_report(json& report, const RunConfig& config,
                   std::chrono::steady_clock::time_point started) {
    if (config.report_path.empty()) return;
    const auto elapsed = std::chrono::duration<double>(
        std::chrono::steady_clock::now() - started);
    report["wall_clock_sec"] = elapsed.count();
    write_text_file(config.report_path, report.dump(2) + "\n");
}

GeneratorParams load_model_or_default(const RunConfig& config) {
    if (!config.model_path.empty()) {
        return load_checkpoint(config.model_path).params;
    }
    return make_initial_params(config.strategy.seed);
}

int cmd_augment(const RunConfig& config) {
    const auto started = std::chrono::steady_clock::now();
    if (config.input_path.empty()) throw ValidationError("augment needs --input");
    if (config.out_path.empty()) throw ValidationError("augment needs --out");
    check_fresh_output(config, config.out_path);

    const auto dataset = load_dataset(config.input_path,
                                      config.strategy.context_size, config.strict_k);
    const auto model = load_model_or_default(config);
    auto evaluator = make_evaluator(config.evaluator);
    const auto augmented = augment_static(dataset, model, *evaluator, config.strategy);
    save_dataset(augmented, config.out_path);

    json report = base_report("augment", config);
    report["input_examples"] = dataset.size();
    report["augmented_examples"] = augmented.size() - dataset.size();
    report["output_examples"] = augmented.size();
    finish_report(report, config, started);
    std::cout << "augmented " << dataset.size() << " -> " << augmented.size()
              << " examples (theta=" << config.strategy.theta << ")\n";
    return 0;
}

int cmd_train(const RunConfig& config) {
    const auto started = std::chrono::steady_clock::now();
    if (config.train_path.empty()) throw ValidationError("train needs --train");
    if (config.dev_path.empty()) throw ValidationError("train needs --dev");
    if (config.out_path.empty()) throw ValidationError("train needs --out");
    check_fresh_output(config, config.out_path);

    const auto train = load_dataset(config.train_path,
                                    config.strategy.context_size, config.strict_k);
    const auto dev = load_dataset(config.dev_path,
                                  config.strategy.context_size, config.strict_k);
    auto evaluator = make_evaluator(config.evaluator);

    const auto [params, history] = run_training(train, dev, *evaluator, config.strategy);

    Checkpoint ck;
    ck.params = params;
    ck.config_hash = config_hash(config);
    ck.epoch = history.best_epoch;
    if (!history.records.empty() && history.best_epoch >= 1) {
        ck.dev_gava_score =
            history.records[static_cast<std::size_t>(history.best_epoch - 1)]
                .dev_gava_score;
    }
    save_checkpoint(ck, config.out_path);

    const std::string history_path = config.history_path.empty()
                                         ? config.out_path + ".history.json"
                                         : config.history_path;
    write_text_file(history_path, history_to_json(history));

    json report = base_report("train", config);
    report["strategy"] = to_string(config.strategy.strategy);
    report["best_epoch"] = history.best_epoch;
    report["epochs_run"] = history.records.size();
    json hist = json::array();
    for (const auto& r : history.records) {
        json e;
        e["epoch"] = r.epoch;
        e["train_loss_mean"] = r.train_loss_mean;
        e["dev_gava_score"] = r.dev_gava_score;
        if (r.augmented_size) e["augmented_size"] = *r.augmented_size;
        hist.push_back(std::move(e));
    }
    report["history"] = std::move(hist);
    report["metrics"] = {{"dev_gava_score", ck.dev_gava_score}};
    finish_report(report, config, started);
    std::cout << "trained " << to_string(config.strategy.strategy) << ": best epoch "
              << history.best_epoch << ", dev GAVA-Score " << ck.dev_gava_score
              << "\n";
    return 0;
}

int cmd_evaluate(const RunConfig& config) {
    const auto started = std::chrono::steady_clock::now();
    if (config.input_path.empty()) throw ValidationError("evaluate needs --input");

    const auto dataset = load_dataset(config.input_path,
                                      config.strategy.context_size, config.strict_k);
    const auto model = load_model_or_default(config);
    auto evaluator = make_evaluator(config.evaluator);

    const double score = gava_score_dataset(
        model, dataset, *evaluator, config.strategy.decoding(),
        config.strategy.max_references, config.strategy.include_target_references);

    json metrics;
    metrics["gava_score"] = score;

    std::vector<CorrectnessVerdict> verdicts;
    for (const auto& ex : dataset.examples) {
        if (ex.annotations && !ex.annotations->empty()) {
            verdicts.push_back(aggregate_annotations(ex.question.id, *ex.annotations));
        }
    }
    if (!verdicts.empty()) {
        metrics["accuracy"] = answering_accuracy(verdicts);
        metrics["annotated_examples"] = verdicts.size();
    }

    json report = base_report("evaluate", config);
    report["metrics"] = metrics;
    finish_report(report, config, started);
    std::cout << "gava_score " << score;
    if (!verdicts.empty()) std::cout << " accuracy " << metrics["accuracy"].get<double>();
    std::cout << "\n";
    return 0;
}

int cmd_correlate(const RunConfig& config) {
    if (config.input_path.empty()) throw ValidationError("correlate needs --input");
    const auto study = load_correlation_csv(config.input_path);
    const auto report = correlate(study);
    const auto text = correlation_report_json(report);
    if (config.out_path.empty()) {
        std::cout << text;
    } else {
        check_fresh_output(config, config.out_path);
        write_text_file(config.out_path, text);
    }
    return 0;
}

int cmd_build_gava_data(const RunConfig& config) {
    const auto started = std::chrono::steady_clock::now();
    if (config.input_path.empty()) throw ValidationError("build-gava-data needs --input");
    if (config.out_path.empty()) throw ValidationError("build-gava-data needs --out");
    check_fresh_output(config, config.out_path);

    const auto dataset = load_dataset(config.input_path,
                                      config.strategy.context_size, config.strict_k);
    const auto instances =
        build_gava_training_instances(dataset, config.strategy.max_references);

    std::string body;
    for (const auto& inst : instances) {
        const auto prompt =
            encode_multi_reference(inst.question, inst.answer, inst.references);
        json line;
        line["id"] = inst.question.id;
        line["rendered"] = prompt.rendered;
        line["label"] = inst.label ? 1 : 0;
        body += line.dump();
        body += "\n";
    }
    write_text_file(config.out_path, body);

    json report = base_report("build-gava-data", config);
    report["instances"] = instances.size();
    finish_report(report, config, started);
    std::cout << "wrote " << instances.size() << " evaluator training instances\n";
    return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& argv) {
    CLI::App app{"evaluator-supervised GenQA training toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file");
        auto track = [&overrides](const std::string& key) {
            return [key, &overrides](const std::string& value) {
                overrides.emplace_back(key, value);
            };
        };
        cmd->add_option_function<std::string>("--seed", track("seed"), "RNG seed");
        cmd->add_option_function<std::string>(
               "--theta", track("theta"), "filter threshold in [0,1]");
        cmd->add_option_function<std::string>("--strategy", track("strategy"),
                                              "baseline|sda|dda|lw");
        cmd->add_option_function<std::string>("--evaluator", track("evaluator"),
                                              "oracle|external:CMD");
        cmd->add_option_function<std::string>("-k,--k", track("k"),
                                              "candidates per question");
        cmd->add_option_function<std::string>("-l,--l", track("l"),
                                              "generations per question");
        cmd->add_option_function<std::string>("-n,--n", track("n"),
                                              "max references");
        cmd->add_option_function<std::string>("--epochs", track("epochs"), "max epochs");
        cmd->add_option_function<std::string>("--patience", track("patience"),
                                              "early stopping patience");
        cmd->add_option_function<std::string>("--lr", track("lr"), "learning rate");
        cmd->add_option_function<std::string>("--batch-size", track("batch_size"),
                                              "batch size");
        cmd->add_option_function<std::string>("--temperature", track("temperature"),
                                              "sampling temperature");
        cmd->add_option_function<std::string>("--dedupe", track("dedupe"),
                                              "collapse duplicate generations");
        cmd->add_option_function<std::string>("--train", track("train_path"),
                                              "training dataset (JSONL)");
        cmd->add_option_function<std::string>("--dev", track("dev_path"),
                                              "dev dataset (JSONL)");
        cmd->add_option_function<std::string>("--input", track("input_path"),
                                              "input file");
        cmd->add_option_function<std::string>("--model", track("model_path"),
                                              "generator checkpoint");
        cmd->add_option_function<std::string>("--out", track("out_path"),
                                              "output file");
        cmd->add_option_function<std::string>("--history", track("history_path"),
                                              "training history output");
        cmd->add_option_function<std::string>("--report", track("report_path"),
                                              "run report output");
        return cmd;
    };

    auto* augment = add_common(app.add_subcommand(
        "augment", "static data augmentation with evaluator filtering"));
    auto* train = add_common(app.add_subcommand(
        "train", "train the generator with a chosen strategy"));
    auto* evaluate = add_common(app.add_subcommand(
        "evaluate", "GAVA-Score (and accuracy if annotated) of a checkpoint"));
    auto* correlate_cmd = add_common(app.add_subcommand(
        "correlate", "Pearson/Spearman of metric columns against manual"));
    auto* build = add_common(app.add_subcommand(
        "build-gava-data", "emit evaluator training instances from labeled data"));

    std::vector<const char*> cargv;
    cargv.reserve(argv.size() + 1);
    cargv.push_back("gava");
    for (const auto& a : argv) cargv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        const RunConfig config = load_config(config_path, overrides);
        if (augment->parsed()) return cmd_augment(config);
        if (train->parsed()) return cmd_train(config);
        if (evaluate->parsed()) return cmd_evaluate(config);
        if (correlate_cmd->parsed()) return cmd_correlate(config);
        if (build->parsed()) return cmd_build_gava_data(config);
        throw ValidationError("no command given");
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace gava::cli
