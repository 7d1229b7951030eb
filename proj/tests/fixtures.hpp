#pragma once

#include <string>
#include <vector>

#include "addrkit/corpus.hpp"
#include "addrkit/preprocess.hpp"

namespace testutil {

// Small corpus seeded so every error-category example has the corpus
// support its repair needs: the compound "meenakshiclassic" splits, the
// pair (lay, out) merges, "appartments" has a dominant leader, and
// "sectarnoida" matches the frequent (sector, noida) bigram.
inline std::vector<addrkit::AddressRecord> error_fixture_corpus() {
    std::vector<addrkit::AddressRecord> records;
    auto add = [&](const std::string& text, std::size_t copies) {
        for (std::size_t i = 0; i < copies; ++i) {
            addrkit::AddressRecord r;
            r.id = std::to_string(records.size() + 1);
            r.raw_text = text;
            records.push_back(std::move(r));
        }
    };
    add("meenakshi classic apartments", 60);
    add("gandhi road apartments", 30);
    add("gandhi road appartments", 3);
    add("hsr layout", 80);
    add("hsr lay out", 4);
    add("sector noida", 70);
    add("sectarnoida", 2);
    add("meenakshiclassic apartments", 2);
    return records;
}

inline addrkit::PreprocessArtifacts error_fixture_artifacts() {
    const auto records = error_fixture_corpus();
    const auto stats = addrkit::build_token_stats(records, addrkit::basic_clean_tokens);
    return addrkit::build_artifacts(stats);
}

} // namespace testutil
