#include <catch2/catch.hpp>

#include <sstream>

#include "addrkit/json_io.hpp"
#include "addrkit/rng.hpp"
#include "fixtures.hpp"

using namespace addrkit;

TEST_CASE("preprocess artifacts round-trip exactly") {
    const auto artifacts = testutil::error_fixture_artifacts();
    const auto j = to_json(artifacts);
    const auto back = artifacts_from_json(json::parse(j.dump()));
    CHECK(back.split_table == artifacts.split_table);
    CHECK(back.merge_table == artifacts.merge_table);
    CHECK(back.bigram_variant_table == artifacts.bigram_variant_table);
    CHECK(back.spell_leader_table == artifacts.spell_leader_table);
    CHECK(back.config == artifacts.config);
    CHECK(back.version == artifacts.version);
    // Sorted keys: serialization is byte-stable.
    CHECK(j.dump() == to_json(back).dump());
}

TEST_CASE("embedding model round-trips bit-exactly") {
    addrkit::Rng rng(4);
    EmbeddingModel emb;
    emb.dim = 7;
    emb.min_count = 2;
    for (int i = 0; i < 9; ++i) {
        emb.vocab.push_back("tok" + std::to_string(i));
        emb.index[emb.vocab.back()] = static_cast<std::size_t>(i);
        for (std::size_t d = 0; d < emb.dim; ++d)
            emb.vectors.push_back(rng.next_double() * 2.0 - 1.0);
    }
    const auto back = embedding_from_json(json::parse(to_json(emb).dump()));
    CHECK(back.dim == emb.dim);
    CHECK(back.vocab == emb.vocab);
    CHECK(back.vectors == emb.vectors); // full precision round-trip
}

TEST_CASE("tfidf, classifier and language model round-trip") {
    TfIdfModel tfidf;
    tfidf.total_docs = 321;
    tfidf.idf = {{"a", 0.0}, {"b", std::log(321.0)}, {"c", 1.2345678901234567}};
    const auto tf_back = tfidf_from_json(json::parse(to_json(tfidf).dump()));
    CHECK(tf_back.total_docs == tfidf.total_docs);
    CHECK(tf_back.idf == tfidf.idf);

    ClassifierModel clf;
    clf.classes = {"x", "y", "z"};
    clf.dim = 2;
    clf.l2 = 0.5;
    clf.iters = 17;
    clf.final_loss = 0.987654321;
    addrkit::Rng rng(6);
    clf.weights.resize(3 * 3);
    for (auto& w : clf.weights) w = rng.next_double() - 0.5;
    const auto clf_back = classifier_from_json(json::parse(to_json(clf).dump()));
    CHECK(clf_back.classes == clf.classes);
    CHECK(clf_back.weights == clf.weights);
    CHECK(clf_back.final_loss == clf.final_loss);

    const auto lm = train_ngram({{"a", "b", "c"}, {"a", "b"}, {"c", "c", "a"}}, {});
    const auto lm_back = lm_from_json(json::parse(to_json(lm).dump()));
    CHECK(lm_back.vocab == lm.vocab);
    CHECK(lm_back.ngram_counts == lm.ngram_counts);
    CHECK(lm_back.context_counts == lm.context_counts);
    CHECK(perplexity(lm_back, {"a", "b"}) == perplexity(lm, {"a", "b"}));
}

TEST_CASE("scored perplexities survive a model round-trip on random corpora") {
    addrkit::Rng rng(123);
    static const std::vector<std::string> words = {"hsr", "layout", "noida", "sector", "road"};
    std::vector<std::vector<std::string>> corpus;
    for (int i = 0; i < 60; ++i) {
        std::vector<std::string> sent;
        const std::size_t len = 1 + rng.next_below(5);
        for (std::size_t j = 0; j < len; ++j) sent.push_back(words[rng.next_below(words.size())]);
        corpus.push_back(std::move(sent));
    }
    NgramConfig config;
    config.order = 2;
    const auto lm = train_ngram(corpus, config);
    const auto back = lm_from_json(json::parse(to_json(lm).dump()));
    for (const auto& sent : corpus) CHECK(perplexity(back, sent) == perplexity(lm, sent));
}

TEST_CASE("synthetic truth sidecar round-trips") {
    SynthConfig config;
    config.n_subregions = 3;
    config.n_addresses = 60;
    config.seed = 5;
    const auto synth = generate_corpus(config);

    std::string sidecar;
    for (const auto& rec : synth) sidecar += truth_to_json(rec).dump() + "\n";
    std::istringstream in(sidecar);
    const auto truth = truth_from_jsonl(in);
    REQUIRE(truth.size() == synth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        CHECK(truth[i].id == synth[i].record.id);
        CHECK(truth[i].clean_tokens == synth[i].clean_tokens);
        REQUIRE(truth[i].corruptions.size() == synth[i].corruptions.size());
        for (std::size_t c = 0; c < truth[i].corruptions.size(); ++c) {
            CHECK(truth[i].corruptions[c].position == synth[i].corruptions[c].position);
            CHECK(truth[i].corruptions[c].category == synth[i].corruptions[c].category);
            CHECK(truth[i].corruptions[c].original == synth[i].corruptions[c].original);
            CHECK(truth[i].corruptions[c].corrupted == synth[i].corruptions[c].corrupted);
        }
    }
}

TEST_CASE("cleaned records round-trip through jsonl") {
    CleanedRecord a{"7", {"hsr", "layout", "560102"}, "560102", "SR01", "Z0"};
    CleanedRecord b{"8", {"lone"}, std::nullopt, std::nullopt, std::nullopt};
    std::string text = to_json(a).dump() + "\n" + to_json(b).dump() + "\n";
    std::istringstream in(text);
    const auto rows = cleaned_from_jsonl(in);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].tokens == a.tokens);
    CHECK(rows[0].pincode == a.pincode);
    CHECK(rows[0].label == a.label);
    CHECK(rows[1].pincode == std::nullopt);
}

TEST_CASE("fnv1a64 digests are stable") {
    CHECK(hex64(fnv1a64("")) == "cbf29ce484222325");
    CHECK(hex64(fnv1a64("a")) == "af63dc4c8601ec8c");
    CHECK(fnv1a64("hsr layout") == fnv1a64("hsr layout"));
    CHECK(fnv1a64("hsr layout") != fnv1a64("hsr layoux"));
}

TEST_CASE("manifests serialize with basenames only") {
    RunManifest m;
    m.command = "stats";
    m.config = json{{"jobs", 2}};
    m.input_digests["corpus.jsonl"] = hex64(fnv1a64("body"));
    m.seed = 9;
    const auto j = to_json(m);
    CHECK(j.at("command") == "stats");
    CHECK(j.at("input_digests").contains("corpus.jsonl"));
    CHECK(path_basename("/tmp/a/b/corpus.jsonl") == "corpus.jsonl");
    CHECK(path_basename("corpus.jsonl") == "corpus.jsonl");
}
