#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "addrkit/classifier.hpp"
#include "addrkit/corpus.hpp"
#include "addrkit/embedding.hpp"
#include "addrkit/errors.hpp"
#include "addrkit/ngram_lm.hpp"
#include "addrkit/preprocess.hpp"
#include "addrkit/synthgen.hpp"

// JSON (de)serialization for every artifact the CLI reads or writes.
// nlohmann::json keeps object keys sorted and prints doubles with the
// shortest round-trip representation, which gives byte-stable files.

namespace addrkit {

using nlohmann::json;

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write file: " + path);
    out << content;
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

inline std::string file_digest(const std::string& path) { return hex64(fnv1a64(read_text_file(path))); }

// ---- preprocess artifacts ----

inline json to_json(const PreprocessConfig& c) {
    return json{{"edit_threshold", c.edit_threshold},
                {"min_token_len", c.min_token_len},
                {"split_dominance_count", c.split_dominance_count},
                {"bigram_min_count", c.bigram_min_count},
                {"recursive_split", c.recursive_split},
                {"max_pipeline_passes", c.max_pipeline_passes}};
}

inline PreprocessConfig preprocess_config_from_json(const json& j) {
    PreprocessConfig c;
    c.edit_threshold = j.at("edit_threshold").get<std::size_t>();
    c.min_token_len = j.at("min_token_len").get<std::size_t>();
    c.split_dominance_count = j.at("split_dominance_count").get<std::uint64_t>();
    c.bigram_min_count = j.at("bigram_min_count").get<std::uint64_t>();
    c.recursive_split = j.at("recursive_split").get<bool>();
    c.max_pipeline_passes = j.at("max_pipeline_passes").get<std::size_t>();
    return c;
}

inline json to_json(const PreprocessArtifacts& a) {
    json split = json::object();
    for (const auto& [w, pair] : a.split_table) split[w] = json::array({pair.first, pair.second});
    json merge = json::object();
    for (const auto& [k, v] : a.merge_table) merge[k] = v;
    json bigram = json::object();
    for (const auto& [w, pair] : a.bigram_variant_table)
        bigram[w] = json::array({pair.first, pair.second});
    json leaders = json::object();
    for (const auto& [v, l] : a.spell_leader_table) leaders[v] = l;
    return json{{"version", a.version}, {"config", to_json(a.config)},     {"split", split},
                {"merge", merge},       {"bigram", bigram},                {"leaders", leaders}};
}

inline PreprocessArtifacts artifacts_from_json(const json& j) {
    PreprocessArtifacts a;
    a.version = j.at("version").get<std::uint32_t>();
    a.config = preprocess_config_from_json(j.at("config"));
    for (const auto& [w, pair] : j.at("split").items())
        a.split_table[w] = {pair.at(0).get<std::string>(), pair.at(1).get<std::string>()};
    for (const auto& [k, v] : j.at("merge").items()) a.merge_table[k] = v.get<std::string>();
    for (const auto& [w, pair] : j.at("bigram").items())
        a.bigram_variant_table[w] = {pair.at(0).get<std::string>(), pair.at(1).get<std::string>()};
    for (const auto& [v, l] : j.at("leaders").items()) a.spell_leader_table[v] = l.get<std::string>();
    return a;
}

// ---- token stats ----

inline json to_json(const TokenStatsTable& s) {
    json term = json::object(), docf = json::object(), bg = json::object();
    for (const auto& [k, v] : s.term_count) term[k] = v;
    for (const auto& [k, v] : s.doc_freq) docf[k] = v;
    for (const auto& [k, v] : s.bigram_count) bg[k] = v;
    return json{{"total_docs", s.total_docs},
                {"total_tokens", s.total_tokens},
                {"term_count", term},
                {"doc_freq", docf},
                {"bigram_count", bg}};
}

inline TokenStatsTable stats_from_json(const json& j) {
    TokenStatsTable s;
    s.total_docs = j.at("total_docs").get<std::uint64_t>();
    s.total_tokens = j.at("total_tokens").get<std::uint64_t>();
    for (const auto& [k, v] : j.at("term_count").items()) s.term_count[k] = v.get<std::uint64_t>();
    for (const auto& [k, v] : j.at("doc_freq").items()) s.doc_freq[k] = v.get<std::uint64_t>();
    for (const auto& [k, v] : j.at("bigram_count").items()) s.bigram_count[k] = v.get<std::uint64_t>();
    return s;
}

// ---- embedding / tfidf ----

inline json to_json(const EmbeddingModel& m) {
    json vecs = json::object();
    for (std::size_t i = 0; i < m.vocab.size(); ++i) {
        json row = json::array();
        for (std::size_t d = 0; d < m.dim; ++d) row.push_back(m.vec(i)[d]);
        vecs[m.vocab[i]] = std::move(row);
    }
    return json{{"dim", m.dim}, {"min_count", m.min_count}, {"vocab", m.vocab}, {"vectors", vecs}};
}

inline EmbeddingModel embedding_from_json(const json& j) {
    EmbeddingModel m;
    m.dim = j.at("dim").get<std::size_t>();
    m.min_count = j.at("min_count").get<std::uint64_t>();
    m.vocab = j.at("vocab").get<std::vector<std::string>>();
    m.vectors.assign(m.vocab.size() * m.dim, 0.0);
    const auto& vecs = j.at("vectors");
    for (std::size_t i = 0; i < m.vocab.size(); ++i) {
        m.index[m.vocab[i]] = i;
        const auto& row = vecs.at(m.vocab[i]);
        for (std::size_t d = 0; d < m.dim; ++d) m.vectors[i * m.dim + d] = row.at(d).get<double>();
    }
    return m;
}

inline json to_json(const TfIdfModel& m) {
    json idf = json::object();
    for (const auto& [t, v] : m.idf) idf[t] = v;
    return json{{"total_docs", m.total_docs}, {"idf", idf}};
}

inline TfIdfModel tfidf_from_json(const json& j) {
    TfIdfModel m;
    m.total_docs = j.at("total_docs").get<std::uint64_t>();
    for (const auto& [t, v] : j.at("idf").items()) m.idf[t] = v.get<double>();
    return m;
}

// ---- classifier ----

inline json to_json(const ClassifierModel& m) {
    json weights = json::array();
    for (std::size_t k = 0; k < m.n_classes(); ++k) {
        json row = json::array();
        for (std::size_t j2 = 0; j2 <= m.dim; ++j2) row.push_back(m.row(k)[j2]);
        weights.push_back(std::move(row));
    }
    return json{{"classes", m.classes}, {"dim", m.dim},          {"l2", m.l2},
                {"iters", m.iters},     {"final_loss", m.final_loss}, {"weights", weights}};
}

inline ClassifierModel classifier_from_json(const json& j) {
    ClassifierModel m;
    m.classes = j.at("classes").get<std::vector<std::string>>();
    m.dim = j.at("dim").get<std::size_t>();
    m.l2 = j.at("l2").get<double>();
    m.iters = j.at("iters").get<std::size_t>();
    m.final_loss = j.at("final_loss").get<double>();
    const auto& weights = j.at("weights");
    m.weights.assign(m.classes.size() * (m.dim + 1), 0.0);
    for (std::size_t k = 0; k < m.classes.size(); ++k)
        for (std::size_t j2 = 0; j2 <= m.dim; ++j2)
            m.weights[k * (m.dim + 1) + j2] = weights.at(k).at(j2).get<double>();
    return m;
}

inline json to_json(const EvalReport& r) {
    const std::size_t K = r.classes.size();
    json confusion = json::array();
    for (std::size_t i = 0; i < K; ++i) {
        json row = json::array();
        for (std::size_t j2 = 0; j2 < K; ++j2) row.push_back(r.confusion[i * K + j2]);
        confusion.push_back(std::move(row));
    }
    json hist = json::array();
    for (auto h : r.max_prob_histogram) hist.push_back(h);
    return json{{"total", r.total},
                {"correct", r.correct},
                {"accuracy", r.accuracy},
                {"classes", r.classes},
                {"confusion", confusion},
                {"precision", r.precision},
                {"recall", r.recall},
                {"max_prob_histogram", hist},
                {"max_prob_bin_width", 0.05},
                {"mean_max_prob", r.mean_max_prob},
                {"median_max_prob", r.median_max_prob}};
}

// ---- n-gram language model ----

inline json to_json(const NgramConfig& c) {
    return json{{"order", c.order},
                {"smoothing_k", c.smoothing_k},
                {"sentence_markers", c.sentence_markers},
                {"map_singletons_to_unk", c.map_singletons_to_unk}};
}

inline json to_json(const NgramLM& lm) {
    json ngrams = json::object(), contexts = json::object();
    for (const auto& [k, v] : lm.ngram_counts) ngrams[k] = v;
    for (const auto& [k, v] : lm.context_counts) contexts[k] = v;
    return json{{"config", to_json(lm.config)},
                {"vocab", lm.vocab},
                {"ngrams", ngrams},
                {"contexts", contexts}};
}

inline NgramLM lm_from_json(const json& j) {
    NgramLM lm;
    const auto& c = j.at("config");
    lm.config.order = c.at("order").get<std::size_t>();
    lm.config.smoothing_k = c.at("smoothing_k").get<double>();
    lm.config.sentence_markers = c.at("sentence_markers").get<bool>();
    lm.config.map_singletons_to_unk = c.at("map_singletons_to_unk").get<bool>();
    lm.vocab = j.at("vocab").get<std::vector<std::string>>();
    lm.vocab_set.insert(lm.vocab.begin(), lm.vocab.end());
    for (const auto& [k, v] : j.at("ngrams").items()) lm.ngram_counts[k] = v.get<std::uint64_t>();
    for (const auto& [k, v] : j.at("contexts").items()) lm.context_counts[k] = v.get<std::uint64_t>();
    return lm;
}

// ---- corpus records ----

inline json to_json(const AddressRecord& r) {
    json obj{{"id", r.id}, {"address", r.raw_text}};
    if (r.pincode) obj["pincode"] = *r.pincode;
    if (r.label) obj["label"] = *r.label;
    if (r.zone) obj["zone"] = *r.zone;
    return obj;
}

inline std::string to_jsonl(const std::vector<AddressRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += to_json(r).dump();
        out.push_back('\n');
    }
    return out;
}

// Cleaned corpus line: the tokens after preprocessing plus carried-over
// metadata. This is the interchange format between pipeline stages.
struct CleanedRecord {
    std::string id;
    std::vector<std::string> tokens;
    std::optional<std::string> pincode;
    std::optional<std::string> label;
    std::optional<std::string> zone;
};

inline json to_json(const CleanedRecord& r) {
    json obj{{"id", r.id}, {"tokens", r.tokens}};
    if (r.pincode) obj["pincode"] = *r.pincode;
    if (r.label) obj["label"] = *r.label;
    if (r.zone) obj["zone"] = *r.zone;
    return obj;
}

inline std::vector<CleanedRecord> cleaned_from_jsonl(std::istream& in) {
    std::vector<CleanedRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim_copy(line).empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(lineno, std::string("invalid JSON: ") + e.what());
        }
        CleanedRecord r;
        r.id = obj.at("id").get<std::string>();
        r.tokens = obj.at("tokens").get<std::vector<std::string>>();
        if (obj.contains("pincode") && !obj["pincode"].is_null())
            r.pincode = obj["pincode"].get<std::string>();
        if (obj.contains("label") && !obj["label"].is_null())
            r.label = obj["label"].get<std::string>();
        if (obj.contains("zone") && !obj["zone"].is_null()) r.zone = obj["zone"].get<std::string>();
        out.push_back(std::move(r));
    }
    return out;
}

inline std::vector<CleanedRecord> load_cleaned(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open cleaned corpus: " + path);
    return cleaned_from_jsonl(in);
}

// ---- synthetic ground truth sidecar ----

inline json to_json(const Corruption& c) {
    return json{{"position", c.position},
                {"category", to_string(c.category)},
                {"original", c.original},
                {"corrupted", c.corrupted}};
}

inline json truth_to_json(const SynthRecord& r) {
    json corr = json::array();
    for (const auto& c : r.corruptions) corr.push_back(to_json(c));
    return json{{"id", r.record.id}, {"clean", r.clean_tokens}, {"corruptions", corr}};
}

struct TruthRecord {
    std::string id;
    std::vector<std::string> clean_tokens;
    std::vector<Corruption> corruptions;
};

inline std::vector<TruthRecord> truth_from_jsonl(std::istream& in) {
    std::vector<TruthRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim_copy(line).empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(lineno, std::string("invalid JSON: ") + e.what());
        }
        TruthRecord r;
        r.id = obj.at("id").get<std::string>();
        r.clean_tokens = obj.at("clean").get<std::vector<std::string>>();
        for (const auto& c : obj.at("corruptions")) {
            Corruption corr;
            corr.position = c.at("position").get<std::size_t>();
            auto cat = error_category_from_string(c.at("category").get<std::string>());
            if (!cat) throw ParseError(lineno, "unknown corruption category");
            corr.category = *cat;
            corr.original = c.at("original").get<std::string>();
            corr.corrupted = c.at("corrupted").get<std::string>();
            r.corruptions.push_back(std::move(corr));
        }
        out.push_back(std::move(r));
    }
    return out;
}

// ---- run manifest ----

// Two runs with equal manifests must produce byte-identical artifacts.
// Paths are reduced to basenames so the manifest itself is reproducible
// across scratch directories.
struct RunManifest {
    std::string command;
    json config = json::object();
    std::map<std::string, std::string> input_digests; // basename -> fnv1a64 hex
    std::uint64_t seed = 0;
    std::uint32_t artifact_version = 1;
};

inline std::string path_basename(const std::string& path) {
    const auto pos = path.find_last_of("/\\");
    return pos == std::string::npos ? path : path.substr(pos + 1);
}

inline json to_json(const RunManifest& m) {
    json digests = json::object();
    for (const auto& [k, v] : m.input_digests) digests[k] = v;
    return json{{"command", m.command},
                {"config", m.config},
                {"input_digests", digests},
                {"seed", m.seed},
                {"artifact_version", m.artifact_version}};
}

inline void write_manifest(const std::string& artifact_path, const RunManifest& m) {
    write_text_file(artifact_path + ".manifest.json", to_json(m).dump(2) + "\n");
}

} // namespace addrkit
