#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "addrkit/classifier.hpp"
#include "addrkit/embedding.hpp"
#include "addrkit/errors.hpp"
#include "addrkit/preprocess.hpp"

namespace addrkit {

// Reserved symbols; cleaned tokens are [a-z0-9]+ so these cannot collide.
inline constexpr const char* kUnkToken = "<unk>";
inline constexpr const char* kBosToken = "<s>";
inline constexpr const char* kEosToken = "</s>";

struct NgramConfig {
    std::size_t order = 2;
    double smoothing_k = 0.1;
    // Wrapping with <s>/</s> is the default; the no-marker variant scores
    // only within-sentence conditionals (used by the unigram closed forms).
    bool sentence_markers = true;
    bool map_singletons_to_unk = true;

    bool operator==(const NgramConfig&) const = default;
};

// Additive-k smoothed n-gram model. For a fixed history h,
//   P(w | h) = (count(h,w) + k) / (count(h) + k * |vocab|)
// where count(h) is stored as the sum of its continuation counts, so each
// conditional distribution sums to exactly one over the event space
// (vocabulary plus <unk>, plus </s> when markers are on).
struct NgramLM {
    NgramConfig config;
    std::vector<std::string> vocab; // event space, sorted
    std::unordered_set<std::string> vocab_set;
    std::unordered_map<std::string, std::uint64_t> ngram_counts;   // "w1 .. wn"
    std::unordered_map<std::string, std::uint64_t> context_counts; // "w1 .. w(n-1)", "" for unigram

    const std::string& map_token(const std::string& t) const {
        static const std::string unk = kUnkToken;
        return vocab_set.count(t) ? t : unk;
    }

    double cond_prob(const std::vector<std::string>& history, const std::string& token) const {
        const double k = config.smoothing_k;
        const double V = static_cast<double>(vocab.size());
        std::string ctx_key;
        for (const auto& h : history) {
            if (!ctx_key.empty()) ctx_key.push_back(' ');
            ctx_key += h;
        }
        std::string ng_key = ctx_key;
        if (!ng_key.empty()) ng_key.push_back(' ');
        ng_key += token;

        const auto cn = ngram_counts.find(ng_key);
        const auto cc = context_counts.find(ctx_key);
        const double num = (cn == ngram_counts.end() ? 0.0 : static_cast<double>(cn->second)) + k;
        const double den =
            (cc == context_counts.end() ? 0.0 : static_cast<double>(cc->second)) + k * V;
        return num / den;
    }
};

inline NgramLM train_ngram(const std::vector<std::vector<std::string>>& corpus,
                           const NgramConfig& config = {}) {
    if (config.order < 1) throw ConfigError("n-gram order must be at least 1");
    if (!(config.smoothing_k > 0.0)) throw ConfigError("smoothing constant must be positive");
    if (corpus.empty()) throw InputError("cannot train a language model on an empty corpus");

    NgramLM lm;
    lm.config = config;

    std::unordered_map<std::string, std::uint64_t> counts;
    for (const auto& sent : corpus)
        for (const auto& t : sent) counts[t] += 1;

    for (const auto& [t, c] : counts)
        if (!config.map_singletons_to_unk || c > 1) lm.vocab.push_back(t);
    lm.vocab.push_back(kUnkToken);
    if (config.sentence_markers) lm.vocab.push_back(kEosToken);
    std::sort(lm.vocab.begin(), lm.vocab.end());
    lm.vocab_set.insert(lm.vocab.begin(), lm.vocab.end());

    const std::size_t n = config.order;
    for (const auto& sent : corpus) {
        std::vector<std::string> seq;
        if (config.sentence_markers)
            seq.assign(n - 1, kBosToken);
        for (const auto& t : sent)
            seq.push_back(lm.vocab_set.count(t) ? t : kUnkToken);
        if (config.sentence_markers) seq.push_back(kEosToken);

        for (std::size_t i = n - 1; i < seq.size(); ++i) {
            std::string ctx;
            for (std::size_t j = i - (n - 1); j < i; ++j) {
                if (!ctx.empty()) ctx.push_back(' ');
                ctx += seq[j];
            }
            std::string ng = ctx;
            if (!ng.empty()) ng.push_back(' ');
            ng += seq[i];
            lm.ngram_counts[ng] += 1;
            lm.context_counts[ctx] += 1;
        }
    }
    return lm;
}

// Perplexity per the inverse-geometric-mean definition,
//   PP = P(w_1 .. w_N) ^ (-1/N),
// computed in log space. With markers on, N counts the tokens plus the
// closing </s>; with markers off, only within-sentence conditionals count.
inline double perplexity(const NgramLM& lm, const std::vector<std::string>& tokens) {
    if (tokens.empty()) throw InputError("cannot score an empty address");

    const std::size_t n = lm.config.order;
    std::vector<std::string> seq;
    if (lm.config.sentence_markers) seq.assign(n - 1, kBosToken);
    for (const auto& t : tokens) seq.push_back(lm.map_token(t));
    if (lm.config.sentence_markers) seq.push_back(kEosToken);

    double log_sum = 0.0;
    std::size_t scored = 0;
    for (std::size_t i = n - 1; i < seq.size(); ++i) {
        std::vector<std::string> history(seq.begin() + static_cast<std::ptrdiff_t>(i - (n - 1)),
                                         seq.begin() + static_cast<std::ptrdiff_t>(i));
        log_sum += std::log(lm.cond_prob(history, seq[i]));
        ++scored;
    }
    if (scored == 0) throw InputError("address shorter than the model order");
    return std::exp(-log_sum / static_cast<double>(scored));
}

enum class FlagStatus { ok, low_confidence, high_perplexity };

inline const char* to_string(FlagStatus s) {
    switch (s) {
    case FlagStatus::ok: return "ok";
    case FlagStatus::low_confidence: return "low_confidence";
    case FlagStatus::high_perplexity: return "high_perplexity";
    }
    return "?";
}

struct AddressFlag {
    FlagStatus status = FlagStatus::ok;
    double classifier_max_prob = 0.0;
    double perplexity = 0.0;
};

// Nearest-rank percentile of training-corpus perplexities. Calibrating the
// threshold at p guarantees at most (1-p) of the calibration corpus scores
// strictly above it.
inline double calibrate_ppl_threshold(const NgramLM& lm,
                                      const std::vector<std::vector<std::string>>& corpus,
                                      double percentile = 0.95) {
    if (!(percentile > 0.0 && percentile <= 1.0))
        throw ConfigError("percentile must lie in (0, 1]");
    std::vector<double> values;
    values.reserve(corpus.size());
    for (const auto& tokens : corpus)
        if (!tokens.empty()) values.push_back(perplexity(lm, tokens));
    if (values.empty()) throw InputError("no addresses to calibrate on");
    std::sort(values.begin(), values.end());
    const auto rank = static_cast<std::size_t>(
        std::ceil(percentile * static_cast<double>(values.size())));
    return values[std::min(values.size(), std::max<std::size_t>(rank, 1)) - 1];
}

// High perplexity takes precedence over low classifier confidence.
inline AddressFlag flag_address(const AddressRecord& record, const ClassifierModel& clf,
                                const EmbeddingModel& emb, const TfIdfModel& tfidf,
                                const NgramLM& lm, const PreprocessArtifacts& artifacts,
                                double tau_conf, double tau_ppl) {
    const CleanAddress cleaned = preprocess_address(record.raw_text, artifacts, CleanMode::full);

    AddressFlag flag;
    if (cleaned.tokens.empty()) {
        flag.status = FlagStatus::high_perplexity; // nothing intelligible survived cleaning
        flag.perplexity = std::numeric_limits<double>::infinity();
        return flag;
    }
    flag.perplexity = perplexity(lm, cleaned.tokens);

    const AddressVector av = address_vector(cleaned.tokens, emb, tfidf);
    const Prediction pred = predict(clf, av.values);
    flag.classifier_max_prob = pred.probs[pred.predicted];

    if (flag.perplexity > tau_ppl) flag.status = FlagStatus::high_perplexity;
    else if (flag.classifier_max_prob < tau_conf) flag.status = FlagStatus::low_confidence;
    else flag.status = FlagStatus::ok;
    return flag;
}

} // namespace addrkit
