#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "addrkit/corpus.hpp"
#include "addrkit/preprocess.hpp"
#include "addrkit/rng.hpp"
#include "addrkit/text_metrics.hpp"

namespace addrkit {

enum class ErrorCategory { space_deletion, space_insertion, misspelling, compound_misspelling };

inline const char* to_string(ErrorCategory c) {
    switch (c) {
    case ErrorCategory::space_deletion: return "space_deletion";
    case ErrorCategory::space_insertion: return "space_insertion";
    case ErrorCategory::misspelling: return "misspelling";
    case ErrorCategory::compound_misspelling: return "compound_misspelling";
    }
    return "?";
}

inline std::optional<ErrorCategory> error_category_from_string(std::string_view s) {
    if (s == "space_deletion") return ErrorCategory::space_deletion;
    if (s == "space_insertion") return ErrorCategory::space_insertion;
    if (s == "misspelling") return ErrorCategory::misspelling;
    if (s == "compound_misspelling") return ErrorCategory::compound_misspelling;
    return std::nullopt;
}

struct Gazetteer {
    struct SubRegion {
        std::string label;
        std::string pincode;
        std::vector<std::vector<std::string>> localities; // each one locality, 1..2 tokens
        std::vector<std::string> landmarks;               // single tokens
    };
    std::vector<SubRegion> subregions;
    std::vector<std::string> city; // shared trailing tokens (city, state)
};

struct SynthConfig {
    std::size_t n_subregions = 10;
    std::size_t n_addresses = 5000;
    Gazetteer gazetteer; // left empty -> default_gazetteer(n_subregions)
    double rate_space_deletion = 0.05;
    double rate_space_insertion = 0.05;
    double rate_misspelling = 0.07;
    double rate_compound_misspelling = 0.03;
    std::uint64_t seed = 1;
    // Customers are often unsure of their pincode; keep the label
    // non-trivial to predict from the pincode token alone.
    double pincode_present_rate = 0.7;
    double pincode_wrong_rate = 0.1;
};

// One corruption applied to the clean token list. `position` indexes the
// clean tokens; joins cover two of them (original holds "a b"), splits and
// misspellings cover one. Replaying all corruptions over clean_tokens
// reproduces the corrupted text exactly.
struct Corruption {
    std::size_t position = 0;
    ErrorCategory category = ErrorCategory::misspelling;
    std::string original;
    std::string corrupted;

    std::size_t clean_span() const {
        return (category == ErrorCategory::space_deletion ||
                category == ErrorCategory::compound_misspelling)
                   ? 2
                   : 1;
    }
};

struct SynthRecord {
    AddressRecord record;
    std::vector<std::string> clean_tokens; // pincode, when present, is last
    std::vector<Corruption> corruptions;
};

namespace detail {

inline bool synth_is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

// A random single edit that keeps the Metaphone key. The error model of
// interest is customers unsure of the "correct" spelling, which shows up as
// vowel confusion and consonant doubling rather than arbitrary keyboard
// noise; those edits are exactly the ones phonetic hashing absorbs.
inline std::optional<std::string> phonetic_edit(const std::string& token, Rng& rng,
                                                std::size_t min_len) {
    static constexpr std::array<char, 5> vowels = {'a', 'e', 'i', 'o', 'u'};
    for (int attempt = 0; attempt < 16; ++attempt) {
        std::string t = token;
        switch (rng.next_below(4)) {
        case 0: { // substitute one vowel for another
            std::vector<std::size_t> at;
            for (std::size_t i = 1; i < t.size(); ++i)
                if (synth_is_vowel(t[i])) at.push_back(i);
            if (at.empty()) continue;
            const std::size_t i = at[rng.next_below(at.size())];
            char v = vowels[rng.next_below(vowels.size())];
            if (v == t[i]) continue;
            t[i] = v;
            break;
        }
        case 1: { // insert a vowel
            const std::size_t i = 1 + rng.next_below(t.size());
            t.insert(t.begin() + static_cast<std::ptrdiff_t>(i),
                     vowels[rng.next_below(vowels.size())]);
            break;
        }
        case 2: { // delete a vowel
            std::vector<std::size_t> at;
            for (std::size_t i = 1; i < t.size(); ++i)
                if (synth_is_vowel(t[i])) at.push_back(i);
            if (at.empty()) continue;
            t.erase(at[rng.next_below(at.size())], 1);
            break;
        }
        default: { // double a consonant
            std::vector<std::size_t> at;
            for (std::size_t i = 1; i < t.size(); ++i)
                if (!synth_is_vowel(t[i]) && t[i] != 'c' && t[i] != 'h') at.push_back(i);
            if (at.empty()) continue;
            const std::size_t i = at[rng.next_below(at.size())];
            t.insert(t.begin() + static_cast<std::ptrdiff_t>(i), t[i]);
            break;
        }
        }
        if (t != token && t.size() >= min_len && metaphone(t) == metaphone(token)) return t;
    }
    return std::nullopt;
}

inline bool all_alpha(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

} // namespace detail

// Deterministic fictional gazetteer. Locality and landmark names are built
// from syllables and admitted only when no earlier name is both within
// levenshtein 3 and Metaphone-equal, so a one-edit corruption of one name
// can never be captured by another name's cluster.
inline Gazetteer default_gazetteer(std::size_t n_subregions) {
    static const std::vector<std::string> heads = {
        "mara", "kelu", "dori", "vasan", "tumra", "pilgu", "ghanso", "sarva",
        "bilka", "nakre", "chandva", "vedla", "lokma", "rampli", "jaytu", "sunka",
        "ketri", "dholu", "mirva", "satpa", "onki", "belra", "husti", "gopna"};
    static const std::vector<std::string> tails = {
        "pura", "halli", "nagar", "palya", "wadi", "gunta", "konda", "peta",
        "puram", "gudde", "vana", "thota"};
    static const std::vector<std::string> kinds = {"layout", "colony", "enclave", "gardens"};
    static const std::vector<std::string> mark_tails = {"temple", "market", "circle", "school"};

    Gazetteer gaz;
    gaz.city = {"brahmagiri", "kosalanadu"}; // every address shares city + state
    Rng rng(0x6A2E17D3u);
    std::vector<std::string> pool = {"house", "flat", "plot", "near", "sector", "road",
                                     "brahmagiri", "kosalanadu"};
    for (const auto& k : kinds) pool.push_back(k);
    for (const auto& m : mark_tails) pool.push_back(m);

    auto admit = [&](std::string candidate) -> std::optional<std::string> {
        const std::string key = metaphone(candidate);
        for (const auto& p : pool)
            if (metaphone(p) == key && levenshtein(p, candidate) < 4) return std::nullopt;
        pool.push_back(candidate);
        return candidate;
    };
    auto fresh_name = [&]() {
        for (;;) {
            std::string c = heads[rng.next_below(heads.size())] + tails[rng.next_below(tails.size())];
            if (auto ok = admit(std::move(c))) return *ok;
        }
    };

    for (std::size_t r = 0; r < n_subregions; ++r) {
        Gazetteer::SubRegion sub;
        sub.label = (r < 10 ? "SR0" : "SR") + std::to_string(r);
        sub.pincode = std::to_string(560100 + r);
        for (int l = 0; l < 3; ++l) {
            std::vector<std::string> loc = {fresh_name()};
            if (l < 2) loc.push_back(kinds[rng.next_below(kinds.size())]);
            sub.localities.push_back(std::move(loc));
        }
        sub.landmarks.push_back(fresh_name());
        sub.landmarks.push_back(mark_tails[rng.next_below(mark_tails.size())]);
        gaz.subregions.push_back(std::move(sub));
    }
    return gaz;
}

namespace detail {

inline std::vector<std::string> compose_clean_tokens(const Gazetteer& gaz, std::size_t region_idx,
                                                     const SynthConfig& cfg, Rng& rng) {
    const auto& sub = gaz.subregions[region_idx];
    std::vector<std::string> toks;

    static const std::vector<std::string> dwellings = {"house", "flat", "plot"};
    toks.push_back(dwellings[rng.next_below(dwellings.size())]);
    toks.push_back(std::to_string(1 + rng.next_below(999)));

    const auto& loc = sub.localities[rng.next_below(sub.localities.size())];
    toks.insert(toks.end(), loc.begin(), loc.end());
    if (rng.bernoulli(0.35)) {
        const auto& loc2 = sub.localities[rng.next_below(sub.localities.size())];
        if (&loc2 != &loc) toks.insert(toks.end(), loc2.begin(), loc2.end());
    }
    if (rng.bernoulli(0.5)) {
        toks.push_back("near");
        toks.push_back(sub.landmarks[rng.next_below(sub.landmarks.size())]);
    }
    if (rng.bernoulli(0.3)) {
        toks.push_back("sector");
        toks.push_back(std::to_string(1 + rng.next_below(40)));
    }
    toks.insert(toks.end(), gaz.city.begin(), gaz.city.end());

    if (rng.bernoulli(cfg.pincode_present_rate)) {
        if (gaz.subregions.size() > 1 && rng.bernoulli(cfg.pincode_wrong_rate)) {
            std::size_t other = rng.next_below(gaz.subregions.size() - 1);
            if (other >= region_idx) ++other;
            toks.push_back(gaz.subregions[other].pincode);
        } else {
            toks.push_back(sub.pincode);
        }
    }
    return toks;
}

inline void corrupt_tokens(const std::vector<std::string>& clean, const SynthConfig& cfg, Rng& rng,
                           std::vector<std::string>& out, std::vector<Corruption>& corruptions) {
    std::size_t i = 0;
    while (i < clean.size()) {
        const std::string& tok = clean[i];
        const bool pair_ok = i + 1 < clean.size() && all_alpha(tok) && all_alpha(clean[i + 1]);

        if (pair_ok && rng.bernoulli(cfg.rate_compound_misspelling)) {
            const std::string joined = tok + clean[i + 1];
            if (auto edited = phonetic_edit(joined, rng, 7)) {
                corruptions.push_back({i, ErrorCategory::compound_misspelling,
                                       tok + " " + clean[i + 1], *edited});
                out.push_back(*edited);
                i += 2;
                continue;
            }
        }
        if (pair_ok && rng.bernoulli(cfg.rate_space_deletion)) {
            corruptions.push_back({i, ErrorCategory::space_deletion, tok + " " + clean[i + 1],
                                   tok + clean[i + 1]});
            out.push_back(tok + clean[i + 1]);
            i += 2;
            continue;
        }
        if (all_alpha(tok) && tok.size() >= 4 && rng.bernoulli(cfg.rate_space_insertion)) {
            const std::size_t cut = 2 + rng.next_below(tok.size() - 3); // both parts >= 2 chars
            const std::string split = tok.substr(0, cut) + " " + tok.substr(cut);
            corruptions.push_back({i, ErrorCategory::space_insertion, tok, split});
            out.push_back(tok.substr(0, cut));
            out.push_back(tok.substr(cut));
            ++i;
            continue;
        }
        if (all_alpha(tok) && tok.size() >= 7 && rng.bernoulli(cfg.rate_misspelling)) {
            if (auto edited = phonetic_edit(tok, rng, 7)) {
                corruptions.push_back({i, ErrorCategory::misspelling, tok, *edited});
                out.push_back(*edited);
                ++i;
                continue;
            }
        }
        out.push_back(tok);
        ++i;
    }
}

} // namespace detail

inline std::vector<SynthRecord> generate_corpus(const SynthConfig& config) {
    for (double r : {config.rate_space_deletion, config.rate_space_insertion,
                     config.rate_misspelling, config.rate_compound_misspelling,
                     config.pincode_present_rate, config.pincode_wrong_rate})
        if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("error rates must lie in [0, 1]");
    if (config.n_subregions < 2) throw ConfigError("need at least 2 sub-regions");
    if (config.n_addresses < config.n_subregions)
        throw ConfigError("need at least one address per sub-region");

    const Gazetteer gaz = config.gazetteer.subregions.empty()
                              ? default_gazetteer(config.n_subregions)
                              : config.gazetteer;
    if (gaz.subregions.size() < config.n_subregions)
        throw ConfigError("gazetteer covers fewer sub-regions than requested");
    for (const auto& sub : gaz.subregions)
        if (sub.localities.empty()) throw ConfigError("gazetteer sub-region without localities");

    const Rng base(config.seed);
    std::vector<SynthRecord> out;
    out.reserve(config.n_addresses);
    for (std::size_t idx = 0; idx < config.n_addresses; ++idx) {
        // Independent stream per record: generation order cannot matter.
        Rng rng = base.derive(idx);
        const std::size_t region = rng.next_below(config.n_subregions);

        SynthRecord rec;
        rec.clean_tokens = detail::compose_clean_tokens(gaz, region, config, rng);
        std::vector<std::string> corrupted;
        detail::corrupt_tokens(rec.clean_tokens, config, rng, corrupted, rec.corruptions);

        rec.record.id = std::to_string(idx + 1);
        std::string raw;
        for (std::size_t t = 0; t < corrupted.size(); ++t) {
            if (t) raw.push_back(' ');
            raw += corrupted[t];
        }
        rec.record.raw_text = std::move(raw);
        rec.record.label = gaz.subregions[region].label;
        rec.record.zone = "Z" + std::to_string(region / 4);
        out.push_back(std::move(rec));
    }
    return out;
}

struct CategoryRecovery {
    std::uint64_t injected = 0;
    std::uint64_t recovered = 0;

    std::optional<double> rate() const {
        if (injected == 0) return std::nullopt; // undefined, not zero
        return static_cast<double>(recovered) / static_cast<double>(injected);
    }
};

struct RecoveryReport {
    std::unordered_map<ErrorCategory, CategoryRecovery> by_category;
    std::uint64_t records = 0;
    std::uint64_t records_exact = 0; // fully corrupted text maps back exactly

    double record_exact_rate() const {
        return records == 0 ? 0.0 : static_cast<double>(records_exact) / static_cast<double>(records);
    }
};

// A corruption counts as recovered when the full pipeline, applied to the
// clean address with just that corruption injected, restores the ground
// truth exactly. Isolating corruptions keeps the per-category attribution
// unambiguous when a record carries several of them.
inline RecoveryReport recovery_report(const std::vector<SynthRecord>& synth,
                                      const PreprocessArtifacts& artifacts) {
    RecoveryReport report;
    for (const auto& rec : synth) {
        report.records += 1;
        const auto full = preprocess_address(rec.record.raw_text, artifacts, CleanMode::full);
        if (full.tokens == rec.clean_tokens) report.records_exact += 1;

        for (const auto& corr : rec.corruptions) {
            std::string raw;
            for (std::size_t i = 0; i < rec.clean_tokens.size();) {
                if (i == corr.position) {
                    if (!raw.empty()) raw.push_back(' ');
                    raw += corr.corrupted;
                    i += corr.clean_span();
                } else {
                    if (!raw.empty()) raw.push_back(' ');
                    raw += rec.clean_tokens[i];
                    ++i;
                }
            }
            auto& bucket = report.by_category[corr.category];
            bucket.injected += 1;
            const auto cleaned = preprocess_address(raw, artifacts, CleanMode::full);
            if (cleaned.tokens == rec.clean_tokens) bucket.recovered += 1;
        }
    }
    return report;
}

} // namespace addrkit
