#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "addrkit/corpus.hpp"
#include "addrkit/text_metrics.hpp"

namespace addrkit {

// Tokenized address after cleaning. Tokens are lowercase [a-z0-9]+; the
// extracted pincode, when present, is always the final token.
struct CleanAddress {
    std::vector<std::string> tokens;
    std::optional<std::string> pincode;

    bool operator==(const CleanAddress&) const = default;
};

struct PreprocessConfig {
    std::size_t edit_threshold = 3;  // clustering wants levenshtein strictly below this
    std::size_t min_token_len = 7;   // spell/bigram candidates must be longer than 6 chars
    std::uint64_t split_dominance_count = 100; // tokens at least this frequent are never split
    std::uint64_t bigram_min_count = 5;        // support required to lead a bigram cluster
    bool recursive_split = false;
    std::size_t max_pipeline_passes = 8;

    bool operator==(const PreprocessConfig&) const = default;
};

// The four lookup tables built offline plus their configuration. Immutable
// once built; all appliers are pure functions over them.
struct PreprocessArtifacts {
    std::unordered_map<std::string, std::pair<std::string, std::string>> split_table;
    std::unordered_map<std::string, std::string> merge_table; // "a b" -> compound
    std::unordered_map<std::string, std::pair<std::string, std::string>> bigram_variant_table;
    std::unordered_map<std::string, std::string> spell_leader_table; // leaders map to themselves
    PreprocessConfig config;
    std::uint32_t version = 1;
};

enum class CleanMode { basic, full };

namespace detail {

inline bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

struct BasicCleanParts {
    std::vector<std::string> tokens; // pincode removed
    std::optional<std::string> pincode;
};

inline BasicCleanParts basic_clean_parts(std::string_view raw) {
    std::vector<std::string> tokens;
    std::string cur;
    auto flush = [&] {
        if (cur.empty()) return;
        // Numbers longer than a pincode are phone numbers or junk.
        if (!(all_digits(cur) && cur.size() > 6)) tokens.push_back(cur);
        cur.clear();
    };
    for (char c : raw) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) cur.push_back(c);
        else flush(); // every other character separates tokens
    }
    flush();

    BasicCleanParts parts;
    // The last six-digit number is the pincode; it rejoins the address as
    // the final token only after all other stages have run.
    for (std::size_t i = tokens.size(); i-- > 0;) {
        if (all_digits(tokens[i]) && tokens[i].size() == 6) {
            parts.pincode = tokens[i];
            tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }
    parts.tokens = std::move(tokens);
    return parts;
}

} // namespace detail

inline CleanAddress basic_clean(std::string_view raw) {
    auto parts = detail::basic_clean_parts(raw);
    CleanAddress out{std::move(parts.tokens), parts.pincode};
    if (out.pincode) out.tokens.push_back(*out.pincode);
    return out;
}

inline std::vector<std::string> basic_clean_tokens(const std::string& raw) {
    return basic_clean(raw).tokens;
}

// Probabilistic splitting (offline). A compound token w is split at the cut
// maximizing count(a)*count(b), admitted when
//   count(a) * count(b) / total_tokens > count(w)
// under the unigram-independence estimate. Very frequent tokens are assumed
// legitimate and never become split candidates.
inline std::unordered_map<std::string, std::pair<std::string, std::string>>
build_split_table(const TokenStatsTable& stats, const PreprocessConfig& config = {}) {
    std::unordered_map<std::string, std::pair<std::string, std::string>> table;
    if (stats.total_tokens == 0) return table;
    for (const auto& [w, cw] : stats.term_count) {
        if (cw >= config.split_dominance_count) continue;
        if (w.size() < 2) continue;
        std::uint64_t best_product = 0;
        std::pair<std::string, std::string> best;
        for (std::size_t cut = 1; cut < w.size(); ++cut) {
            const std::string a = w.substr(0, cut);
            const std::string b = w.substr(cut);
            const std::uint64_t ca = stats.count(a);
            const std::uint64_t cb = stats.count(b);
            if (ca == 0 || cb == 0) continue;
            const std::uint64_t product = ca * cb;
            if (product > best_product) { // leftmost cut wins ties
                best_product = product;
                best = {a, b};
            }
        }
        // product/total > count(w), cross-multiplied to stay in integers
        if (best_product > cw * stats.total_tokens) table.emplace(w, std::move(best));
    }
    return table;
}

// Probabilistic merging (offline). An adjacent pair maps to its compound
// when the compound reading is likelier: the compound must outnumber each
// individual token, which implies the mirrored split comparison
// count(ab)/total > count(a)/total * count(b)/total and keeps split and
// merge disjoint by construction. Requiring dominance over both parts stops
// frequent collocations (locality + kind) from merging just because a few
// joined variants exist in the corpus.
inline std::unordered_map<std::string, std::string>
build_merge_table(const TokenStatsTable& stats,
                  const std::unordered_map<std::string, std::pair<std::string, std::string>>& split_table,
                  const PreprocessConfig& config = {}) {
    (void)config;
    std::unordered_map<std::string, std::string> table;
    if (stats.total_tokens == 0) return table;
    for (const auto& [key, pair_count] : stats.bigram_count) {
        (void)pair_count;
        auto [a, b] = split_bigram_key(key);
        const std::string compound = a + b;
        const std::uint64_t cab = stats.count(compound);
        if (cab == 0) continue;
        if (cab <= stats.count(a) || cab <= stats.count(b)) continue;
        if (cab * stats.total_tokens <= stats.count(a) * stats.count(b)) continue;
        auto it = split_table.find(compound);
        if (it != split_table.end() && it->second.first == a && it->second.second == b)
            continue; // unreachable given strictness, kept as a guard
        table.emplace(key, compound);
    }
    return table;
}

// Spell correction (offline): single-pass leader clustering over tokens
// longer than six characters, visited in descending count order (ties by
// token). A token joins the first leader with the same Metaphone key and
// levenshtein strictly below the threshold and a strictly higher count;
// otherwise it founds a new cluster. Every member maps to its leader and
// every leader maps to itself.
inline std::unordered_map<std::string, std::string>
build_spell_leaders(const TokenStatsTable& stats, const PreprocessConfig& config = {}) {
    std::vector<std::pair<std::string, std::uint64_t>> candidates;
    for (const auto& [t, c] : stats.term_count)
        if (t.size() >= config.min_token_len) candidates.emplace_back(t, c);
    std::sort(candidates.begin(), candidates.end(), [](const auto& x, const auto& y) {
        if (x.second != y.second) return x.second > y.second;
        return x.first < y.first;
    });

    std::unordered_map<std::string, std::string> table;
    std::vector<std::pair<std::string, std::uint64_t>> leaders; // creation order
    std::unordered_map<std::string, std::vector<std::size_t>> by_key;
    for (auto& [token, count] : candidates) {
        const std::string key = metaphone(token);
        const std::string* assigned = nullptr;
        if (auto it = by_key.find(key); it != by_key.end()) {
            for (std::size_t li : it->second) {
                const auto& [leader, leader_count] = leaders[li];
                if (count < leader_count &&
                    levenshtein_below(token, leader, config.edit_threshold)) {
                    assigned = &leader;
                    break;
                }
            }
        }
        if (assigned) {
            table.emplace(token, *assigned);
        } else {
            table.emplace(token, token);
            by_key[key].push_back(leaders.size());
            leaders.emplace_back(token, count);
        }
    }
    return table;
}

// Bigram separation (offline). Frequent bigrams, concatenated into single
// tokens, lead clusters; compound corpus tokens that probabilistic splitting
// could not resolve are assigned to the first leader (by descending bigram
// count) matching the edit-distance + Metaphone predicate. The table maps
// the corrupted compound back to the two leader tokens.
inline std::unordered_map<std::string, std::pair<std::string, std::string>>
build_bigram_variants(const TokenStatsTable& stats,
                      const std::unordered_map<std::string, std::pair<std::string, std::string>>& split_table,
                      const PreprocessConfig& config = {}) {
    struct Leader {
        std::string first, second, concat;
        std::uint64_t count;
    };
    const auto all_alpha = [](std::string_view s) {
        return !s.empty() &&
               std::all_of(s.begin(), s.end(), [](char c) { return c >= 'a' && c <= 'z'; });
    };
    std::vector<Leader> leaders;
    for (const auto& [key, c] : stats.bigram_count) {
        if (c < config.bigram_min_count) continue;
        auto [a, b] = split_bigram_key(key);
        // Word pairs only. Metaphone skips digits, so a pair like
        // ("9", "nagar") would otherwise collide with plain "nagar" variants.
        if (!all_alpha(a) || !all_alpha(b)) continue;
        leaders.push_back({a, b, a + b, c});
    }
    std::sort(leaders.begin(), leaders.end(), [](const Leader& x, const Leader& y) {
        if (x.count != y.count) return x.count > y.count;
        if (x.first != y.first) return x.first < y.first;
        return x.second < y.second;
    });
    std::unordered_map<std::string, std::vector<std::size_t>> by_key;
    for (std::size_t i = 0; i < leaders.size(); ++i)
        by_key[metaphone(leaders[i].concat)].push_back(i);

    std::unordered_map<std::string, std::pair<std::string, std::string>> table;
    for (const auto& [t, c] : stats.term_count) {
        if (t.size() < config.min_token_len) continue;
        if (!all_alpha(t)) continue;
        if (split_table.count(t)) continue; // already resolved by splitting
        auto it = by_key.find(metaphone(t));
        if (it == by_key.end()) continue;
        for (std::size_t li : it->second) {
            const Leader& L = leaders[li];
            if (c < L.count && levenshtein_below(t, L.concat, config.edit_threshold)) {
                table.emplace(t, std::make_pair(L.first, L.second));
                break;
            }
        }
    }
    return table;
}

inline PreprocessArtifacts build_artifacts(const TokenStatsTable& stats,
                                           const PreprocessConfig& config = {}) {
    PreprocessArtifacts art;
    art.config = config;
    art.split_table = build_split_table(stats, config);
    art.spell_leader_table = build_spell_leaders(stats, config);
    art.bigram_variant_table = build_bigram_variants(stats, art.split_table, config);
    art.merge_table = build_merge_table(stats, art.split_table, config);
    return art;
}

namespace detail {

inline void append_split(std::vector<std::string>& out, const std::string& token,
                         const PreprocessArtifacts& art, std::size_t depth) {
    auto it = art.split_table.find(token);
    if (it == art.split_table.end()) {
        out.push_back(token);
        return;
    }
    if (art.config.recursive_split && depth < 4) {
        append_split(out, it->second.first, art, depth + 1);
        append_split(out, it->second.second, art, depth + 1);
    } else {
        out.push_back(it->second.first);
        out.push_back(it->second.second);
    }
}

inline std::vector<std::string> apply_split(const std::vector<std::string>& tokens,
                                            const PreprocessArtifacts& art) {
    std::vector<std::string> out;
    out.reserve(tokens.size() + 2);
    for (const auto& t : tokens) append_split(out, t, art, 0);
    return out;
}

inline std::vector<std::string> apply_spell(const std::vector<std::string>& tokens,
                                            const PreprocessArtifacts& art) {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) {
        auto it = art.spell_leader_table.find(t);
        out.push_back(it == art.spell_leader_table.end() ? t : it->second);
    }
    return out;
}

inline std::vector<std::string> apply_bigram(const std::vector<std::string>& tokens,
                                             const PreprocessArtifacts& art) {
    std::vector<std::string> out;
    out.reserve(tokens.size() + 2);
    for (const auto& t : tokens) {
        auto it = art.bigram_variant_table.find(t);
        if (it == art.bigram_variant_table.end()) {
            out.push_back(t);
        } else {
            out.push_back(it->second.first);
            out.push_back(it->second.second);
        }
    }
    return out;
}

// Greedy left-to-right merging, repeated until stable so that chains like
// (a,b)->ab followed by (ab,c)->abc resolve within the stage.
inline std::vector<std::string> apply_merge(std::vector<std::string> tokens,
                                            const PreprocessArtifacts& art) {
    if (art.merge_table.empty()) return tokens;
    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<std::string> out;
        out.reserve(tokens.size());
        std::size_t i = 0;
        while (i < tokens.size()) {
            if (i + 1 < tokens.size()) {
                auto it = art.merge_table.find(bigram_key(tokens[i], tokens[i + 1]));
                if (it != art.merge_table.end()) {
                    out.push_back(it->second);
                    i += 2;
                    changed = true;
                    continue;
                }
            }
            out.push_back(tokens[i]);
            ++i;
        }
        tokens = std::move(out);
    }
    return tokens;
}

} // namespace detail

// Full pipeline: basic cleaning, then split -> spell -> bigram -> merge,
// iterated until the token list is a fixed point. The pincode never passes
// through the stages; it is appended last.
inline CleanAddress preprocess_address(std::string_view raw, const PreprocessArtifacts& art,
                                       CleanMode mode) {
    auto parts = detail::basic_clean_parts(raw);
    if (mode == CleanMode::full) {
        auto tokens = std::move(parts.tokens);
        for (std::size_t pass = 0; pass < art.config.max_pipeline_passes; ++pass) {
            auto next = detail::apply_merge(
                detail::apply_bigram(detail::apply_spell(detail::apply_split(tokens, art), art), art),
                art);
            const bool stable = (next == tokens);
            tokens = std::move(next);
            if (stable) break;
        }
        parts.tokens = std::move(tokens);
    }
    CleanAddress out{std::move(parts.tokens), parts.pincode};
    if (out.pincode) out.tokens.push_back(*out.pincode);
    return out;
}

} // namespace addrkit
