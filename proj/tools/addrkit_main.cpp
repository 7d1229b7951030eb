// addrkit: normalize noisy shipping addresses, learn address vectors,
// classify sub-regions and flag junk input. Every subcommand reads declared
// inputs, writes declared outputs plus a .manifest.json, and prints a
// one-line JSON summary to stdout. Exit codes: 0 success, 1 input error,
// 2 configuration error.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "addrkit/classifier.hpp"
#include "addrkit/corpus.hpp"
#include "addrkit/embedding.hpp"
#include "addrkit/json_io.hpp"
#include "addrkit/ngram_lm.hpp"
#include "addrkit/preprocess.hpp"
#include "addrkit/synthgen.hpp"

using namespace addrkit;

namespace {

CorpusFormat parse_format(const std::string& name) {
    if (name == "jsonl") return CorpusFormat::jsonl;
    if (name == "csv") return CorpusFormat::csv;
    throw ConfigError("unknown corpus format \"" + name + "\" (expected jsonl or csv)");
}

// Precedence: built-in defaults < --config file < explicit flags.
template <typename T>
void apply_config(const json& cfg, CLI::App* cmd, const std::string& flag, const char* key, T& out) {
    if (cfg.contains(key) && cmd->count(flag) == 0) out = cfg.at(key).get<T>();
}

json load_config_flag(const std::string& path) {
    if (path.empty()) return json::object();
    try {
        return json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid --config JSON: ") + e.what());
    }
}

void emit(const json& summary) { std::cout << summary.dump() << "\n"; }

std::string digest_of(const std::string& path) { return file_digest(path); }

std::vector<CleanedRecord> load_cleaned_or_fail(const std::string& path) {
    auto rows = load_cleaned(path);
    if (rows.empty()) throw InputError("cleaned corpus is empty: " + path);
    return rows;
}

struct VectorizedSet {
    FeatureMatrix features;
    std::vector<std::string> labels;
    std::vector<std::string> ids;
};

VectorizedSet vectorize(const std::vector<CleanedRecord>& rows, const EmbeddingModel& emb,
                        const TfIdfModel* tfidf, bool labeled_only) {
    VectorizedSet out;
    std::vector<std::vector<double>> vectors;
    for (const auto& row : rows) {
        if (labeled_only && !row.label) continue;
        const AddressVector av =
            tfidf ? address_vector(row.tokens, emb, *tfidf) : address_vector_mean(row.tokens, emb);
        vectors.push_back(av.values);
        out.labels.push_back(row.label.value_or(""));
        out.ids.push_back(row.id);
    }
    if (vectors.empty()) throw InputError("no usable rows after filtering for labels");
    out.features = FeatureMatrix::from_rows(vectors);
    return out;
}

// ---- subcommand implementations ----

int cmd_synth(const std::string& output, const std::string& truth_path, SynthConfig config) {
    const auto synth = generate_corpus(config);

    std::vector<AddressRecord> records;
    records.reserve(synth.size());
    for (const auto& s : synth) records.push_back(s.record);
    write_text_file(output, to_jsonl(records));

    RunManifest manifest;
    manifest.command = "synth";
    manifest.seed = config.seed;
    manifest.config = json{{"addresses", config.n_addresses},
                           {"subregions", config.n_subregions},
                           {"rate_space_deletion", config.rate_space_deletion},
                           {"rate_space_insertion", config.rate_space_insertion},
                           {"rate_misspelling", config.rate_misspelling},
                           {"rate_compound_misspelling", config.rate_compound_misspelling},
                           {"pincode_present_rate", config.pincode_present_rate},
                           {"pincode_wrong_rate", config.pincode_wrong_rate}};
    write_manifest(output, manifest);

    if (!truth_path.empty()) {
        std::string sidecar;
        for (const auto& s : synth) sidecar += truth_to_json(s).dump() + "\n";
        write_text_file(truth_path, sidecar);
        write_manifest(truth_path, manifest);
    }
    emit(json{{"command", "synth"},
              {"records", synth.size()},
              {"subregions", config.n_subregions},
              {"output", path_basename(output)}});
    return 0;
}

int cmd_stats(const std::string& input, const std::string& format, const std::string& output,
              unsigned jobs) {
    const auto records = load_corpus(input, parse_format(format));
    const auto stats = build_token_stats(records, basic_clean_tokens, jobs);
    write_text_file(output, to_json(stats).dump(2) + "\n");

    RunManifest manifest;
    manifest.command = "stats";
    manifest.config = json{{"format", format}, {"jobs", jobs}};
    manifest.input_digests[path_basename(input)] = digest_of(input);
    write_manifest(output, manifest);

    emit(json{{"command", "stats"},
              {"docs", stats.total_docs},
              {"tokens", stats.total_tokens},
              {"vocabulary", stats.term_count.size()}});
    return 0;
}

int cmd_build_artifacts(const std::string& input, const std::string& format,
                        const std::string& output, const PreprocessConfig& config, unsigned jobs) {
    const auto records = load_corpus(input, parse_format(format));
    if (records.empty()) throw InputError("corpus is empty: " + input);
    const auto stats = build_token_stats(records, basic_clean_tokens, jobs);
    const auto artifacts = build_artifacts(stats, config);
    write_text_file(output, to_json(artifacts).dump(2) + "\n");

    RunManifest manifest;
    manifest.command = "build-artifacts";
    manifest.config = to_json(config);
    manifest.config["format"] = format;
    manifest.config["jobs"] = jobs;
    manifest.input_digests[path_basename(input)] = digest_of(input);
    manifest.artifact_version = artifacts.version;
    write_manifest(output, manifest);

    emit(json{{"command", "build-artifacts"},
              {"split_entries", artifacts.split_table.size()},
              {"merge_entries", artifacts.merge_table.size()},
              {"bigram_entries", artifacts.bigram_variant_table.size()},
              {"spell_entries", artifacts.spell_leader_table.size()}});
    return 0;
}

int cmd_preprocess(const std::string& input, const std::string& format,
                   const std::string& artifacts_path, const std::string& mode,
                   const std::string& output) {
    if (mode != "basic" && mode != "full")
        throw ConfigError("--mode must be basic or full, got \"" + mode + "\"");
    const CleanMode clean_mode = mode == "full" ? CleanMode::full : CleanMode::basic;

    PreprocessArtifacts artifacts;
    if (clean_mode == CleanMode::full) {
        if (artifacts_path.empty()) throw ConfigError("--mode full requires --artifacts");
        artifacts = artifacts_from_json(json::parse(read_text_file(artifacts_path)));
    }

    const auto records = load_corpus(input, parse_format(format));
    std::string out_text;
    for (const auto& rec : records) {
        const CleanAddress cleaned = preprocess_address(rec.raw_text, artifacts, clean_mode);
        CleanedRecord row{rec.id, cleaned.tokens, cleaned.pincode, rec.label, rec.zone};
        out_text += to_json(row).dump() + "\n";
    }
    write_text_file(output, out_text);

    RunManifest manifest;
    manifest.command = "preprocess";
    manifest.config = json{{"mode", mode}, {"format", format}};
    manifest.input_digests[path_basename(input)] = digest_of(input);
    if (!artifacts_path.empty())
        manifest.input_digests[path_basename(artifacts_path)] = digest_of(artifacts_path);
    write_manifest(output, manifest);

    emit(json{{"command", "preprocess"}, {"records", records.size()}, {"mode", mode}});
    return 0;
}

int cmd_train_embed(const std::string& input, const std::string& output, SkipGramConfig config) {
    const auto rows = load_cleaned_or_fail(input);
    std::vector<std::vector<std::string>> corpus;
    corpus.reserve(rows.size());
    for (const auto& r : rows) corpus.push_back(r.tokens);
    const auto model = train_skipgram(corpus, config);
    write_text_file(output, to_json(model).dump() + "\n");

    RunManifest manifest;
    manifest.command = "train-embed";
    manifest.seed = config.seed;
    manifest.config = json{{"dim", config.dim},       {"window", config.window},
                           {"negatives", config.negatives}, {"epochs", config.epochs},
                           {"lr", config.lr},         {"min_count", config.min_count},
                           {"jobs", config.jobs}};
    manifest.input_digests[path_basename(input)] = digest_of(input);
    write_manifest(output, manifest);

    emit(json{{"command", "train-embed"}, {"vocabulary", model.vocab.size()}, {"dim", model.dim}});
    return 0;
}

int cmd_tfidf(const std::string& input, const std::string& output) {
    const auto rows = load_cleaned_or_fail(input);
    std::vector<std::vector<std::string>> docs;
    docs.reserve(rows.size());
    for (const auto& r : rows) docs.push_back(r.tokens);
    const auto model = compute_tfidf(build_token_stats_from_tokens(docs));
    write_text_file(output, to_json(model).dump() + "\n");

    RunManifest manifest;
    manifest.command = "tfidf";
    manifest.input_digests[path_basename(input)] = digest_of(input);
    write_manifest(output, manifest);

    emit(json{{"command", "tfidf"}, {"tokens", model.idf.size()}, {"docs", model.total_docs}});
    return 0;
}

int cmd_train_clf(const std::string& input, const std::string& embedding_path,
                  const std::string& tfidf_path, const std::string& output,
                  const std::string& weighting, double holdout, std::uint64_t split_seed,
                  SoftmaxConfig config) {
    if (weighting != "tfidf" && weighting != "mean")
        throw ConfigError("--weighting must be tfidf or mean");
    auto rows = load_cleaned_or_fail(input);
    if (holdout > 0.0) rows = split_holdout(rows, holdout, split_seed).first;

    const auto emb = embedding_from_json(json::parse(read_text_file(embedding_path)));
    TfIdfModel tfidf;
    if (weighting == "tfidf") {
        if (tfidf_path.empty()) throw ConfigError("--weighting tfidf requires --tfidf");
        tfidf = tfidf_from_json(json::parse(read_text_file(tfidf_path)));
    }
    const auto set = vectorize(rows, emb, weighting == "tfidf" ? &tfidf : nullptr, true);
    const auto model = train_softmax(set.features, set.labels, config);
    write_text_file(output, to_json(model).dump() + "\n");

    RunManifest manifest;
    manifest.command = "train-clf";
    manifest.seed = config.seed;
    manifest.config = json{{"weighting", weighting}, {"l2", config.l2},   {"iters", config.iters},
                           {"lr", config.lr},        {"holdout", holdout}, {"split_seed", split_seed}};
    manifest.input_digests[path_basename(input)] = digest_of(input);
    manifest.input_digests[path_basename(embedding_path)] = digest_of(embedding_path);
    if (!tfidf_path.empty())
        manifest.input_digests[path_basename(tfidf_path)] = digest_of(tfidf_path);
    write_manifest(output, manifest);

    emit(json{{"command", "train-clf"},
              {"classes", model.classes.size()},
              {"examples", set.labels.size()},
              {"final_loss", model.final_loss}});
    return 0;
}

int cmd_eval(const std::string& input, const std::string& embedding_path,
             const std::string& tfidf_path, const std::string& model_path,
             const std::string& output, const std::string& csv_path, const std::string& weighting,
             double holdout, std::uint64_t split_seed) {
    if (weighting != "tfidf" && weighting != "mean")
        throw ConfigError("--weighting must be tfidf or mean");
    auto rows = load_cleaned_or_fail(input);
    if (holdout > 0.0) rows = split_holdout(rows, holdout, split_seed).second;

    const auto emb = embedding_from_json(json::parse(read_text_file(embedding_path)));
    TfIdfModel tfidf;
    if (weighting == "tfidf") {
        if (tfidf_path.empty()) throw ConfigError("--weighting tfidf requires --tfidf");
        tfidf = tfidf_from_json(json::parse(read_text_file(tfidf_path)));
    }
    const auto model = classifier_from_json(json::parse(read_text_file(model_path)));
    const auto set = vectorize(rows, emb, weighting == "tfidf" ? &tfidf : nullptr, true);

    std::vector<Prediction> predictions;
    const auto report = evaluate(model, set.features, set.labels, &predictions);
    write_text_file(output, to_json(report).dump(2) + "\n");

    if (!csv_path.empty()) {
        std::string csv = "id,true_label,predicted_label,max_probability\n";
        for (std::size_t i = 0; i < predictions.size(); ++i) {
            const auto& p = predictions[i];
            csv += set.ids[i] + "," + set.labels[i] + "," + model.classes[p.predicted] + "," +
                   std::to_string(p.probs[p.predicted]) + "\n";
        }
        write_text_file(csv_path, csv);
    }

    RunManifest manifest;
    manifest.command = "eval";
    manifest.config = json{{"weighting", weighting}, {"holdout", holdout},
                           {"split_seed", split_seed}};
    manifest.input_digests[path_basename(input)] = digest_of(input);
    manifest.input_digests[path_basename(embedding_path)] = digest_of(embedding_path);
    if (!tfidf_path.empty())
        manifest.input_digests[path_basename(tfidf_path)] = digest_of(tfidf_path);
    manifest.input_digests[path_basename(model_path)] = digest_of(model_path);
    write_manifest(output, manifest);

    emit(json{{"command", "eval"},
              {"accuracy", report.accuracy},
              {"total", report.total},
              {"mean_max_prob", report.mean_max_prob}});
    return 0;
}

int cmd_classify(const std::string& input, const std::string& format,
                 const std::string& artifacts_path, const std::string& mode,
                 const std::string& embedding_path, const std::string& tfidf_path,
                 const std::string& model_path, const std::string& output) {
    if (mode != "basic" && mode != "full")
        throw ConfigError("--mode must be basic or full, got \"" + mode + "\"");
    const CleanMode clean_mode = mode == "full" ? CleanMode::full : CleanMode::basic;
    PreprocessArtifacts artifacts;
    if (clean_mode == CleanMode::full) {
        if (artifacts_path.empty()) throw ConfigError("--mode full requires --artifacts");
        artifacts = artifacts_from_json(json::parse(read_text_file(artifacts_path)));
    }
    const auto emb = embedding_from_json(json::parse(read_text_file(embedding_path)));
    const auto tfidf = tfidf_from_json(json::parse(read_text_file(tfidf_path)));
    const auto model = classifier_from_json(json::parse(read_text_file(model_path)));

    const auto records = load_corpus(input, parse_format(format));
    std::string out_text;
    double mean_max = 0.0;
    for (const auto& rec : records) {
        const auto cleaned = preprocess_address(rec.raw_text, artifacts, clean_mode);
        const auto av = address_vector(cleaned.tokens, emb, tfidf);
        const auto pred = predict(model, av.values);
        mean_max += pred.probs[pred.predicted];
        out_text += json{{"id", rec.id},
                         {"predicted", model.classes[pred.predicted]},
                         {"max_prob", pred.probs[pred.predicted]}}
                        .dump() +
                    "\n";
    }
    write_text_file(output, out_text);

    RunManifest manifest;
    manifest.command = "classify";
    manifest.config = json{{"mode", mode}, {"format", format}};
    manifest.input_digests[path_basename(input)] = digest_of(input);
    if (!artifacts_path.empty())
        manifest.input_digests[path_basename(artifacts_path)] = digest_of(artifacts_path);
    manifest.input_digests[path_basename(embedding_path)] = digest_of(embedding_path);
    manifest.input_digests[path_basename(tfidf_path)] = digest_of(tfidf_path);
    manifest.input_digests[path_basename(model_path)] = digest_of(model_path);
    write_manifest(output, manifest);

    emit(json{{"command", "classify"},
              {"records", records.size()},
              {"mean_max_prob", records.empty() ? 0.0 : mean_max / records.size()}});
    return 0;
}

int cmd_lm_train(const std::string& input, const std::string& output, NgramConfig config) {
    const auto rows = load_cleaned_or_fail(input);
    std::vector<std::vector<std::string>> corpus;
    for (const auto& r : rows) corpus.push_back(r.tokens);
    const auto lm = train_ngram(corpus, config);
    write_text_file(output, to_json(lm).dump() + "\n");

    RunManifest manifest;
    manifest.command = "lm-train";
    manifest.config = to_json(config);
    manifest.input_digests[path_basename(input)] = digest_of(input);
    write_manifest(output, manifest);

    emit(json{{"command", "lm-train"}, {"order", config.order}, {"vocabulary", lm.vocab.size()}});
    return 0;
}

int cmd_lm_score(const std::string& input, const std::string& model_path,
                 const std::string& output) {
    const auto rows = load_cleaned_or_fail(input);
    const auto lm = lm_from_json(json::parse(read_text_file(model_path)));
    std::string out_text;
    double sum = 0.0;
    std::size_t scored = 0;
    for (const auto& r : rows) {
        if (r.tokens.empty()) continue;
        const double ppl = perplexity(lm, r.tokens);
        sum += ppl;
        ++scored;
        out_text += json{{"id", r.id}, {"perplexity", ppl}}.dump() + "\n";
    }
    write_text_file(output, out_text);

    RunManifest manifest;
    manifest.command = "lm-score";
    manifest.input_digests[path_basename(input)] = digest_of(input);
    manifest.input_digests[path_basename(model_path)] = digest_of(model_path);
    write_manifest(output, manifest);

    emit(json{{"command", "lm-score"},
              {"records", scored},
              {"mean_perplexity", scored ? sum / scored : 0.0}});
    return 0;
}

int cmd_flag(const std::string& input, const std::string& format,
             const std::string& artifacts_path, const std::string& embedding_path,
             const std::string& tfidf_path, const std::string& clf_path,
             const std::string& lm_path, const std::string& calibrate_path, double ppl_percentile,
             double tau_conf, double tau_ppl, const std::string& output) {
    const auto artifacts = artifacts_from_json(json::parse(read_text_file(artifacts_path)));
    const auto emb = embedding_from_json(json::parse(read_text_file(embedding_path)));
    const auto tfidf = tfidf_from_json(json::parse(read_text_file(tfidf_path)));
    const auto clf = classifier_from_json(json::parse(read_text_file(clf_path)));
    const auto lm = lm_from_json(json::parse(read_text_file(lm_path)));

    if (!calibrate_path.empty()) {
        const auto rows = load_cleaned_or_fail(calibrate_path);
        std::vector<std::vector<std::string>> corpus;
        for (const auto& r : rows) corpus.push_back(r.tokens);
        tau_ppl = calibrate_ppl_threshold(lm, corpus, ppl_percentile);
    } else if (tau_ppl <= 0.0) {
        throw ConfigError("provide --tau-ppl or --calibrate");
    }

    const auto records = load_corpus(input, parse_format(format));
    std::string out_text;
    std::size_t ok = 0, low_conf = 0, high_ppl = 0;
    for (const auto& rec : records) {
        const auto flag = flag_address(rec, clf, emb, tfidf, lm, artifacts, tau_conf, tau_ppl);
        switch (flag.status) {
        case FlagStatus::ok: ++ok; break;
        case FlagStatus::low_confidence: ++low_conf; break;
        case FlagStatus::high_perplexity: ++high_ppl; break;
        }
        out_text += json{{"id", rec.id},
                         {"status", to_string(flag.status)},
                         {"max_prob", flag.classifier_max_prob},
                         {"perplexity", flag.perplexity}}
                        .dump() +
                    "\n";
    }
    write_text_file(output, out_text);

    RunManifest manifest;
    manifest.command = "flag";
    manifest.config = json{{"tau_conf", tau_conf},
                           {"tau_ppl", tau_ppl},
                           {"ppl_percentile", ppl_percentile}};
    manifest.input_digests[path_basename(input)] = digest_of(input);
    manifest.input_digests[path_basename(artifacts_path)] = digest_of(artifacts_path);
    manifest.input_digests[path_basename(lm_path)] = digest_of(lm_path);
    write_manifest(output, manifest);

    emit(json{{"command", "flag"},
              {"ok", ok},
              {"low_confidence", low_conf},
              {"high_perplexity", high_ppl},
              {"tau_ppl", tau_ppl}});
    return 0;
}

int cmd_recovery_report(const std::string& corpus_path, const std::string& truth_path,
                        const std::string& artifacts_path, const std::string& format,
                        const std::string& output) {
    const auto records = load_corpus(corpus_path, parse_format(format));
    std::ifstream truth_in(truth_path);
    if (!truth_in) throw InputError("cannot open truth sidecar: " + truth_path);
    const auto truth = truth_from_jsonl(truth_in);
    const auto artifacts = artifacts_from_json(json::parse(read_text_file(artifacts_path)));

    std::unordered_map<std::string, const AddressRecord*> by_id;
    for (const auto& r : records) by_id[r.id] = &r;
    std::vector<SynthRecord> synth;
    for (const auto& t : truth) {
        auto it = by_id.find(t.id);
        if (it == by_id.end()) throw InputError("truth id \"" + t.id + "\" is not in the corpus");
        SynthRecord s;
        s.record = *it->second;
        s.clean_tokens = t.clean_tokens;
        s.corruptions = t.corruptions;
        synth.push_back(std::move(s));
    }

    const auto report = recovery_report(synth, artifacts);
    json categories = json::object();
    for (const auto& [cat, bucket] : report.by_category) {
        json entry{{"injected", bucket.injected}, {"recovered", bucket.recovered}};
        if (auto r = bucket.rate()) entry["rate"] = *r;
        categories[to_string(cat)] = entry;
    }
    const json body{{"records", report.records},
                    {"records_exact", report.records_exact},
                    {"record_exact_rate", report.record_exact_rate()},
                    {"categories", categories}};
    write_text_file(output, body.dump(2) + "\n");

    RunManifest manifest;
    manifest.command = "recovery-report";
    manifest.input_digests[path_basename(corpus_path)] = digest_of(corpus_path);
    manifest.input_digests[path_basename(truth_path)] = digest_of(truth_path);
    manifest.input_digests[path_basename(artifacts_path)] = digest_of(artifacts_path);
    write_manifest(output, manifest);

    emit(body);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"address normalization, classification and junk flagging"};
    app.require_subcommand(1);

    try {
        // ---- synth ----
        auto* synth = app.add_subcommand("synth", "generate a labeled synthetic corpus");
        std::string synth_output, synth_truth, synth_config_path;
        SynthConfig synth_config;
        synth->add_option("--output", synth_output)->required();
        synth->add_option("--truth", synth_truth, "ground-truth sidecar jsonl");
        synth->add_option("--seed", synth_config.seed);
        synth->add_option("--addresses", synth_config.n_addresses);
        synth->add_option("--subregions", synth_config.n_subregions);
        synth->add_option("--rate-space-deletion", synth_config.rate_space_deletion);
        synth->add_option("--rate-space-insertion", synth_config.rate_space_insertion);
        synth->add_option("--rate-misspelling", synth_config.rate_misspelling);
        synth->add_option("--rate-compound-misspelling", synth_config.rate_compound_misspelling);
        synth->add_option("--pincode-present-rate", synth_config.pincode_present_rate);
        synth->add_option("--pincode-wrong-rate", synth_config.pincode_wrong_rate);
        synth->add_option("--config", synth_config_path, "JSON file overriding defaults");

        // ---- stats ----
        auto* stats = app.add_subcommand("stats", "corpus token statistics");
        std::string stats_input, stats_format = "jsonl", stats_output;
        unsigned stats_jobs = 1;
        stats->add_option("--input", stats_input)->required();
        stats->add_option("--format", stats_format, "jsonl or csv");
        stats->add_option("--output", stats_output)->required();
        stats->add_option("--jobs", stats_jobs, "worker cap for counting");

        // ---- build-artifacts ----
        auto* build = app.add_subcommand("build-artifacts", "build the preprocessing tables");
        std::string build_input, build_format = "jsonl", build_output, build_config_path;
        PreprocessConfig build_config;
        unsigned build_jobs = 1;
        build->add_option("--input", build_input)->required();
        build->add_option("--format", build_format, "jsonl or csv");
        build->add_option("--output", build_output)->required();
        build->add_option("--edit-threshold", build_config.edit_threshold);
        build->add_option("--min-token-len", build_config.min_token_len);
        build->add_option("--split-dominance", build_config.split_dominance_count,
                          "tokens at least this frequent are never split");
        build->add_option("--bigram-min-count", build_config.bigram_min_count,
                          "support required to lead a bigram cluster");
        build->add_flag("--recursive-split", build_config.recursive_split);
        build->add_option("--jobs", build_jobs);
        build->add_option("--config", build_config_path, "JSON file overriding defaults");

        // ---- preprocess ----
        auto* preprocess = app.add_subcommand("preprocess", "clean a corpus");
        std::string pre_input, pre_format = "jsonl", pre_artifacts, pre_mode = "full", pre_output;
        preprocess->add_option("--input", pre_input)->required();
        preprocess->add_option("--format", pre_format, "jsonl or csv");
        preprocess->add_option("--artifacts", pre_artifacts);
        preprocess->add_option("--mode", pre_mode, "basic or full");
        preprocess->add_option("--output", pre_output)->required();

        // ---- train-embed ----
        auto* embed = app.add_subcommand("train-embed", "train skip-gram embeddings");
        std::string embed_input, embed_output, embed_config_path;
        SkipGramConfig embed_config;
        embed->add_option("--input", embed_input)->required();
        embed->add_option("--output", embed_output)->required();
        embed->add_option("--dim", embed_config.dim);
        embed->add_option("--window", embed_config.window);
        embed->add_option("--negatives", embed_config.negatives);
        embed->add_option("--epochs", embed_config.epochs);
        embed->add_option("--lr", embed_config.lr);
        embed->add_option("--min-count", embed_config.min_count);
        embed->add_option("--seed", embed_config.seed);
        embed->add_option("--jobs", embed_config.jobs,
                          "sharded training; more than one worker forfeits bit-determinism");
        embed->add_option("--config", embed_config_path, "JSON file overriding defaults");

        // ---- tfidf ----
        auto* tfidf = app.add_subcommand("tfidf", "compute IDF weights over a cleaned corpus");
        std::string tfidf_input, tfidf_output;
        tfidf->add_option("--input", tfidf_input)->required();
        tfidf->add_option("--output", tfidf_output)->required();

        // ---- train-clf ----
        auto* clf = app.add_subcommand("train-clf", "train the sub-region classifier");
        std::string clf_input, clf_embedding, clf_tfidf, clf_output, clf_weighting = "tfidf";
        std::string clf_config_path;
        double clf_holdout = 0.0;
        std::uint64_t clf_split_seed = 0;
        SoftmaxConfig clf_config;
        clf->add_option("--input", clf_input)->required();
        clf->add_option("--embedding", clf_embedding)->required();
        clf->add_option("--tfidf", clf_tfidf);
        clf->add_option("--output", clf_output)->required();
        clf->add_option("--weighting", clf_weighting, "tfidf or mean");
        clf->add_option("--l2", clf_config.l2);
        clf->add_option("--iters", clf_config.iters);
        clf->add_option("--lr", clf_config.lr);
        clf->add_option("--seed", clf_config.seed);
        clf->add_option("--holdout", clf_holdout, "fraction held out; trains on the rest");
        clf->add_option("--split-seed", clf_split_seed, "seed for the holdout split");
        clf->add_option("--config", clf_config_path, "JSON file overriding defaults");

        // ---- eval ----
        auto* eval = app.add_subcommand("eval", "evaluate the classifier on labeled rows");
        std::string eval_input, eval_embedding, eval_tfidf, eval_model, eval_output, eval_csv;
        std::string eval_weighting = "tfidf";
        double eval_holdout = 0.0;
        std::uint64_t eval_split_seed = 0;
        eval->add_option("--input", eval_input)->required();
        eval->add_option("--embedding", eval_embedding)->required();
        eval->add_option("--tfidf", eval_tfidf);
        eval->add_option("--model", eval_model)->required();
        eval->add_option("--output", eval_output)->required();
        eval->add_option("--csv", eval_csv, "per-example predictions for plotting");
        eval->add_option("--weighting", eval_weighting, "tfidf or mean");
        eval->add_option("--holdout", eval_holdout, "fraction held out; evaluates on it");
        eval->add_option("--split-seed", eval_split_seed, "seed for the holdout split");

        // ---- classify ----
        auto* classify = app.add_subcommand("classify", "classify raw addresses");
        std::string cls_input, cls_format = "jsonl", cls_artifacts, cls_mode = "full";
        std::string cls_embedding, cls_tfidf, cls_model, cls_output;
        classify->add_option("--input", cls_input)->required();
        classify->add_option("--format", cls_format, "jsonl or csv");
        classify->add_option("--artifacts", cls_artifacts);
        classify->add_option("--mode", cls_mode, "basic or full");
        classify->add_option("--embedding", cls_embedding)->required();
        classify->add_option("--tfidf", cls_tfidf)->required();
        classify->add_option("--model", cls_model)->required();
        classify->add_option("--output", cls_output)->required();

        // ---- lm-train ----
        auto* lm_train = app.add_subcommand("lm-train", "train the n-gram language model");
        std::string lmt_input, lmt_output;
        NgramConfig lmt_config;
        lm_train->add_option("--input", lmt_input)->required();
        lm_train->add_option("--output", lmt_output)->required();
        lm_train->add_option("--order", lmt_config.order);
        lm_train->add_option("--smoothing-k", lmt_config.smoothing_k);

        // ---- lm-score ----
        auto* lm_score = app.add_subcommand("lm-score", "score perplexities");
        std::string lms_input, lms_model, lms_output;
        lm_score->add_option("--input", lms_input)->required();
        lm_score->add_option("--model", lms_model)->required();
        lm_score->add_option("--output", lms_output)->required();

        // ---- flag ----
        auto* flag = app.add_subcommand("flag", "flag junk and incomplete addresses");
        std::string flag_input, flag_format = "jsonl", flag_artifacts, flag_embedding, flag_tfidf;
        std::string flag_clf, flag_lm, flag_calibrate, flag_output;
        double flag_tau_conf = 0.2, flag_tau_ppl = 0.0, flag_percentile = 0.95;
        flag->add_option("--input", flag_input)->required();
        flag->add_option("--format", flag_format, "jsonl or csv");
        flag->add_option("--artifacts", flag_artifacts)->required();
        flag->add_option("--embedding", flag_embedding)->required();
        flag->add_option("--tfidf", flag_tfidf)->required();
        flag->add_option("--clf", flag_clf)->required();
        flag->add_option("--lm", flag_lm)->required();
        flag->add_option("--calibrate", flag_calibrate,
                         "cleaned corpus to calibrate the perplexity threshold on");
        flag->add_option("--ppl-percentile", flag_percentile, "calibration percentile");
        flag->add_option("--tau-conf", flag_tau_conf, "low-confidence threshold");
        flag->add_option("--tau-ppl", flag_tau_ppl, "high-perplexity threshold");
        flag->add_option("--output", flag_output)->required();

        // ---- recovery-report ----
        auto* recovery = app.add_subcommand("recovery-report", "per-category recovery rates");
        std::string rec_corpus, rec_truth, rec_artifacts, rec_format = "jsonl", rec_output;
        recovery->add_option("--corpus", rec_corpus)->required();
        recovery->add_option("--truth", rec_truth)->required();
        recovery->add_option("--artifacts", rec_artifacts)->required();
        recovery->add_option("--format", rec_format, "jsonl or csv");
        recovery->add_option("--output", rec_output)->required();

        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            if (e.get_exit_code() == 0) return app.exit(e); // --help
            std::cerr << e.what() << "\n";
            return 2;
        }

        if (*synth) {
            const json cfg = load_config_flag(synth_config_path);
            apply_config(cfg, synth, "--seed", "seed", synth_config.seed);
            apply_config(cfg, synth, "--addresses", "addresses", synth_config.n_addresses);
            apply_config(cfg, synth, "--subregions", "subregions", synth_config.n_subregions);
            apply_config(cfg, synth, "--rate-space-deletion", "rate_space_deletion",
                         synth_config.rate_space_deletion);
            apply_config(cfg, synth, "--rate-space-insertion", "rate_space_insertion",
                         synth_config.rate_space_insertion);
            apply_config(cfg, synth, "--rate-misspelling", "rate_misspelling",
                         synth_config.rate_misspelling);
            apply_config(cfg, synth, "--rate-compound-misspelling", "rate_compound_misspelling",
                         synth_config.rate_compound_misspelling);
            return cmd_synth(synth_output, synth_truth, synth_config);
        }
        if (*stats) return cmd_stats(stats_input, stats_format, stats_output, stats_jobs);
        if (*build) {
            const json cfg = load_config_flag(build_config_path);
            apply_config(cfg, build, "--edit-threshold", "edit_threshold",
                         build_config.edit_threshold);
            apply_config(cfg, build, "--min-token-len", "min_token_len",
                         build_config.min_token_len);
            apply_config(cfg, build, "--split-dominance", "split_dominance_count",
                         build_config.split_dominance_count);
            apply_config(cfg, build, "--bigram-min-count", "bigram_min_count",
                         build_config.bigram_min_count);
            return cmd_build_artifacts(build_input, build_format, build_output, build_config,
                                       build_jobs);
        }
        if (*preprocess)
            return cmd_preprocess(pre_input, pre_format, pre_artifacts, pre_mode, pre_output);
        if (*embed) {
            const json cfg = load_config_flag(embed_config_path);
            apply_config(cfg, embed, "--dim", "dim", embed_config.dim);
            apply_config(cfg, embed, "--window", "window", embed_config.window);
            apply_config(cfg, embed, "--negatives", "negatives", embed_config.negatives);
            apply_config(cfg, embed, "--epochs", "epochs", embed_config.epochs);
            apply_config(cfg, embed, "--lr", "lr", embed_config.lr);
            apply_config(cfg, embed, "--min-count", "min_count", embed_config.min_count);
            apply_config(cfg, embed, "--seed", "seed", embed_config.seed);
            return cmd_train_embed(embed_input, embed_output, embed_config);
        }
        if (*tfidf) return cmd_tfidf(tfidf_input, tfidf_output);
        if (*clf) {
            const json cfg = load_config_flag(clf_config_path);
            apply_config(cfg, clf, "--l2", "l2", clf_config.l2);
            apply_config(cfg, clf, "--iters", "iters", clf_config.iters);
            apply_config(cfg, clf, "--lr", "lr", clf_config.lr);
            apply_config(cfg, clf, "--holdout", "holdout", clf_holdout);
            apply_config(cfg, clf, "--split-seed", "split_seed", clf_split_seed);
            return cmd_train_clf(clf_input, clf_embedding, clf_tfidf, clf_output, clf_weighting,
                                 clf_holdout, clf_split_seed, clf_config);
        }
        if (*eval)
            return cmd_eval(eval_input, eval_embedding, eval_tfidf, eval_model, eval_output,
                            eval_csv, eval_weighting, eval_holdout, eval_split_seed);
        if (*classify)
            return cmd_classify(cls_input, cls_format, cls_artifacts, cls_mode, cls_embedding,
                                cls_tfidf, cls_model, cls_output);
        if (*lm_train) return cmd_lm_train(lmt_input, lmt_output, lmt_config);
        if (*lm_score) return cmd_lm_score(lms_input, lms_model, lms_output);
        if (*flag)
            return cmd_flag(flag_input, flag_format, flag_artifacts, flag_embedding, flag_tfidf,
                            flag_clf, flag_lm, flag_calibrate, flag_percentile, flag_tau_conf,
                            flag_tau_ppl, flag_output);
        if (*recovery)
            return cmd_recovery_report(rec_corpus, rec_truth, rec_artifacts, rec_format,
                                       rec_output);
        std::cerr << "no subcommand selected\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
