#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "addrkit/corpus.hpp"
#include "addrkit/errors.hpp"
#include "addrkit/rng.hpp"

namespace addrkit {

struct SkipGramConfig {
    std::size_t dim = 100;
    std::size_t window = 5;
    std::size_t negatives = 5;
    std::size_t epochs = 5;
    double lr = 0.025; // initial; decays linearly to lr * 1e-4
    std::uint64_t min_count = 2;
    std::uint64_t seed = 1;
    unsigned jobs = 1; // >1 shards sentences hogwild-style and forfeits bit-determinism
};

struct EmbeddingModel {
    std::size_t dim = 0;
    std::uint64_t min_count = 0;
    std::vector<std::string> vocab; // descending count, ties lexicographic
    std::unordered_map<std::string, std::size_t> index;
    std::vector<double> vectors; // vocab.size() x dim, row-major

    const double* vec(std::size_t i) const { return &vectors[i * dim]; }

    const double* lookup(const std::string& token) const {
        auto it = index.find(token);
        return it == index.end() ? nullptr : vec(it->second);
    }
};

struct TfIdfModel {
    std::unordered_map<std::string, double> idf;
    std::uint64_t total_docs = 0;

    double lookup(const std::string& token) const {
        auto it = idf.find(token);
        return it == idf.end() ? 0.0 : it->second;
    }
};

// IDF(t) = ln(N / doc_freq(t)). doc_freq >= 1 for every known token, so the
// weight lies in [0, ln N] with both bounds attained.
inline TfIdfModel compute_tfidf(const TokenStatsTable& stats) {
    TfIdfModel model;
    model.total_docs = stats.total_docs;
    const double n = static_cast<double>(stats.total_docs);
    for (const auto& [token, df] : stats.doc_freq)
        model.idf[token] = std::log(n / static_cast<double>(df));
    return model;
}

struct AddressVector {
    std::vector<double> values;
    double coverage = 0.0; // fraction of token occurrences that contributed
};

namespace detail {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

} // namespace detail

// One positive (center, context) pair plus negatives, for checking the
// negative-sampling loss and its gradients against finite differences.
struct SgnsSample {
    std::vector<double> center;
    std::vector<double> context;
    std::vector<std::vector<double>> negatives;
};

inline double sgns_loss(const SgnsSample& s) {
    const std::size_t d = s.center.size();
    double loss = -std::log(detail::sigmoid(detail::dot(s.center.data(), s.context.data(), d)));
    for (const auto& neg : s.negatives)
        loss -= std::log(detail::sigmoid(-detail::dot(s.center.data(), neg.data(), d)));
    return loss;
}

struct SgnsGradients {
    std::vector<double> center;
    std::vector<double> context;
    std::vector<std::vector<double>> negatives;
};

inline SgnsGradients sgns_gradients(const SgnsSample& s) {
    const std::size_t d = s.center.size();
    SgnsGradients g;
    g.center.assign(d, 0.0);
    g.context.assign(d, 0.0);
    g.negatives.assign(s.negatives.size(), std::vector<double>(d, 0.0));

    const double gpos = detail::sigmoid(detail::dot(s.center.data(), s.context.data(), d)) - 1.0;
    for (std::size_t i = 0; i < d; ++i) {
        g.context[i] = gpos * s.center[i];
        g.center[i] = gpos * s.context[i];
    }
    for (std::size_t k = 0; k < s.negatives.size(); ++k) {
        const double gneg = detail::sigmoid(detail::dot(s.center.data(), s.negatives[k].data(), d));
        for (std::size_t i = 0; i < d; ++i) {
            g.negatives[k][i] = gneg * s.center[i];
            g.center[i] += gneg * s.negatives[k][i];
        }
    }
    return g;
}

namespace detail {

struct EncodedCorpus {
    std::vector<std::vector<std::size_t>> sentences;
    std::uint64_t total_positions = 0;
};

// Cumulative table over count^0.75 for negative sampling.
struct NegativeTable {
    std::vector<double> cumulative;
    double total = 0.0;

    std::size_t sample(Rng& rng) const {
        const double u = rng.next_double() * total;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        if (it == cumulative.end()) return cumulative.size() - 1;
        return static_cast<std::size_t>(it - cumulative.begin());
    }
};

} // namespace detail

// Skip-gram with negative sampling, trained by plain SGD. With jobs == 1
// the run is bit-deterministic for a fixed seed: sentence order, window
// shrinking and negative draws all come from per-(epoch, sentence) streams.
inline EmbeddingModel train_skipgram(const std::vector<std::vector<std::string>>& corpus,
                                     const SkipGramConfig& config) {
    std::unordered_map<std::string, std::uint64_t> counts;
    for (const auto& sent : corpus)
        for (const auto& t : sent) counts[t] += 1;

    EmbeddingModel model;
    model.dim = config.dim;
    model.min_count = config.min_count;
    for (const auto& [t, c] : counts)
        if (c >= config.min_count) model.vocab.push_back(t);
    if (model.vocab.empty())
        throw ConfigError("skip-gram vocabulary is empty after min_count filtering");
    std::sort(model.vocab.begin(), model.vocab.end(), [&](const auto& a, const auto& b) {
        if (counts[a] != counts[b]) return counts[a] > counts[b];
        return a < b;
    });
    for (std::size_t i = 0; i < model.vocab.size(); ++i) model.index[model.vocab[i]] = i;

    const std::size_t V = model.vocab.size();
    const std::size_t D = config.dim;

    detail::EncodedCorpus enc;
    enc.sentences.reserve(corpus.size());
    for (const auto& sent : corpus) {
        std::vector<std::size_t> ids;
        ids.reserve(sent.size());
        for (const auto& t : sent) {
            auto it = model.index.find(t);
            if (it != model.index.end()) ids.push_back(it->second);
        }
        enc.total_positions += ids.size();
        enc.sentences.push_back(std::move(ids));
    }

    detail::NegativeTable neg;
    neg.cumulative.resize(V);
    for (std::size_t i = 0; i < V; ++i) {
        neg.total += std::pow(static_cast<double>(counts[model.vocab[i]]), 0.75);
        neg.cumulative[i] = neg.total;
    }

    // Input vectors start uniform in [-0.5/dim, 0.5/dim); output vectors at 0.
    model.vectors.assign(V * D, 0.0);
    std::vector<double> out_vectors(V * D, 0.0);
    {
        Rng init(Rng(config.seed).derive(0xE9B1u).next_u64());
        for (auto& v : model.vectors) v = (init.next_double() - 0.5) / static_cast<double>(D);
    }

    const double total_steps =
        static_cast<double>(config.epochs) * static_cast<double>(std::max<std::uint64_t>(enc.total_positions, 1));
    std::atomic<std::uint64_t> processed{0};
    const Rng base(config.seed);

    auto train_sentence = [&](std::size_t epoch, std::size_t sent_idx) {
        const auto& sent = enc.sentences[sent_idx];
        if (sent.empty()) return;
        Rng rng = base.derive(epoch * enc.sentences.size() + sent_idx);
        for (std::size_t pos = 0; pos < sent.size(); ++pos) {
            const std::uint64_t done = processed.fetch_add(1, std::memory_order_relaxed);
            const double alpha =
                config.lr * std::max(1.0 - static_cast<double>(done) / total_steps, 1e-4);
            const std::size_t center = sent[pos];
            const std::size_t dyn = 1 + rng.next_below(config.window);
            const std::size_t lo = pos >= dyn ? pos - dyn : 0;
            const std::size_t hi = std::min(sent.size() - 1, pos + dyn);
            for (std::size_t c = lo; c <= hi; ++c) {
                if (c == pos) continue;
                const std::size_t context = sent[c];
                double* vin = &model.vectors[center * D];
                std::vector<double> err(D, 0.0);
                // positive sample, label 1
                {
                    double* uout = &out_vectors[context * D];
                    const double g = detail::sigmoid(detail::dot(vin, uout, D)) - 1.0;
                    for (std::size_t i = 0; i < D; ++i) {
                        err[i] += g * uout[i];
                        uout[i] -= alpha * g * vin[i];
                    }
                }
                for (std::size_t k = 0; k < config.negatives; ++k) {
                    const std::size_t target = neg.sample(rng);
                    if (target == context) continue;
                    double* uout = &out_vectors[target * D];
                    const double g = detail::sigmoid(detail::dot(vin, uout, D));
                    for (std::size_t i = 0; i < D; ++i) {
                        err[i] += g * uout[i];
                        uout[i] -= alpha * g * vin[i];
                    }
                }
                for (std::size_t i = 0; i < D; ++i) vin[i] -= alpha * err[i];
            }
        }
    };

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        if (config.jobs <= 1) {
            for (std::size_t s = 0; s < enc.sentences.size(); ++s) train_sentence(epoch, s);
        } else {
            std::vector<std::thread> workers;
            const std::size_t chunk = (enc.sentences.size() + config.jobs - 1) / config.jobs;
            for (unsigned w = 0; w < config.jobs; ++w) {
                workers.emplace_back([&, w] {
                    const std::size_t lo2 = w * chunk;
                    const std::size_t hi2 = std::min(enc.sentences.size(), lo2 + chunk);
                    for (std::size_t s = lo2; s < hi2; ++s) train_sentence(epoch, s);
                });
            }
            for (auto& t : workers) t.join();
        }
    }
    return model;
}

// TF-IDF weighted average of token vectors (weights renormalized to sum 1),
// so the result stays inside the convex hull of the contributing vectors.
// Singleton tokens carry the maximum weight ln(N) and are removed; tokens
// with zero weight or no embedding contribute nothing. If nothing
// contributes the vector is zero with coverage 0.
inline AddressVector address_vector(const std::vector<std::string>& tokens,
                                    const EmbeddingModel& emb, const TfIdfModel& tfidf) {
    AddressVector out;
    out.values.assign(emb.dim, 0.0);
    if (tokens.empty()) return out;

    std::unordered_map<std::string, std::size_t> tf;
    for (const auto& t : tokens) tf[t] += 1;

    const double max_idf = std::log(static_cast<double>(tfidf.total_docs));
    struct Contributor {
        const double* vec;
        double weight;
        std::size_t occurrences;
    };
    std::vector<Contributor> contributors;
    for (const auto& [token, f] : tf) {
        const double* v = emb.lookup(token);
        if (!v) continue; // out of vocabulary: ignored
        auto it = tfidf.idf.find(token);
        if (it == tfidf.idf.end()) continue;
        const double idf = it->second;
        if (idf >= max_idf - 1e-12) continue; // singleton removal
        const double w = static_cast<double>(f) * idf;
        if (w <= 0.0) continue;
        contributors.push_back({v, w, f});
    }
    double total_weight = 0.0;
    std::size_t covered = 0;
    for (const auto& c : contributors) {
        total_weight += c.weight;
        covered += c.occurrences;
    }
    if (total_weight <= 0.0) return out;
    for (const auto& c : contributors) {
        const double w = c.weight / total_weight;
        for (std::size_t i = 0; i < emb.dim; ++i) out.values[i] += w * c.vec[i];
    }
    out.coverage = static_cast<double>(covered) / static_cast<double>(tokens.size());
    return out;
}

// Unweighted mean over in-vocabulary occurrences: the plain-averaging
// baseline the weighted variant is compared against.
inline AddressVector address_vector_mean(const std::vector<std::string>& tokens,
                                         const EmbeddingModel& emb) {
    AddressVector out;
    out.values.assign(emb.dim, 0.0);
    if (tokens.empty()) return out;
    std::size_t covered = 0;
    for (const auto& t : tokens) {
        const double* v = emb.lookup(t);
        if (!v) continue;
        ++covered;
        for (std::size_t i = 0; i < emb.dim; ++i) out.values[i] += v[i];
    }
    if (covered == 0) return out;
    for (auto& x : out.values) x /= static_cast<double>(covered);
    out.coverage = static_cast<double>(covered) / static_cast<double>(tokens.size());
    return out;
}

} // namespace addrkit
