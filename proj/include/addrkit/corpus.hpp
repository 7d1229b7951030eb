#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "addrkit/errors.hpp"
#include "addrkit/rng.hpp"

namespace addrkit {

struct AddressRecord {
    std::string id;
    std::string raw_text;
    std::optional<std::string> pincode; // six decimal digits when present
    std::optional<std::string> label;   // delivery sub-region
    std::optional<std::string> zone;
};

inline bool is_valid_pincode(std::string_view s) {
    if (s.size() != 6) return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

inline std::string trim_copy(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

// Corpus-wide token statistics. Bigram keys are "first second"; cleaned
// tokens never contain spaces so the joined form is unambiguous.
struct TokenStatsTable {
    std::unordered_map<std::string, std::uint64_t> term_count;
    std::unordered_map<std::string, std::uint64_t> doc_freq;
    std::unordered_map<std::string, std::uint64_t> bigram_count;
    std::uint64_t total_docs = 0;
    std::uint64_t total_tokens = 0;

    std::uint64_t count(const std::string& token) const {
        auto it = term_count.find(token);
        return it == term_count.end() ? 0 : it->second;
    }
};

inline std::string bigram_key(std::string_view a, std::string_view b) {
    std::string k;
    k.reserve(a.size() + b.size() + 1);
    k.append(a);
    k.push_back(' ');
    k.append(b);
    return k;
}

inline std::pair<std::string, std::string> split_bigram_key(const std::string& key) {
    const auto pos = key.find(' ');
    return {key.substr(0, pos), key.substr(pos + 1)};
}

enum class CorpusFormat { jsonl, csv };

namespace detail {

inline void validate_record(AddressRecord& rec, std::size_t line) {
    if (trim_copy(rec.raw_text).empty())
        throw ParseError(line, "empty address text");
    if (rec.pincode && !is_valid_pincode(*rec.pincode))
        throw ParseError(line, "pincode must be exactly six decimal digits, got \"" + *rec.pincode + "\"");
}

inline std::optional<std::string> json_opt_string(const nlohmann::json& obj, const char* key,
                                                  std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw ParseError(line, std::string("field \"") + key + "\" must be a string");
    std::string v = it->get<std::string>();
    if (v.empty()) return std::nullopt;
    return v;
}

inline std::vector<AddressRecord> load_jsonl(std::istream& in) {
    std::vector<AddressRecord> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim_copy(line).empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(lineno, std::string("invalid JSON: ") + e.what());
        }
        if (!obj.is_object()) throw ParseError(lineno, "expected a JSON object");
        if (!obj.contains("address")) throw ParseError(lineno, "missing required key \"address\"");
        if (!obj["address"].is_string()) throw ParseError(lineno, "field \"address\" must be a string");

        AddressRecord rec;
        rec.raw_text = obj["address"].get<std::string>();
        if (auto id = json_opt_string(obj, "id", lineno)) rec.id = *id;
        else rec.id = std::to_string(records.size() + 1);
        rec.pincode = json_opt_string(obj, "pincode", lineno);
        rec.label = json_opt_string(obj, "label", lineno);
        rec.zone = json_opt_string(obj, "zone", lineno);
        validate_record(rec, lineno);
        records.push_back(std::move(rec));
    }
    return records;
}

// One CSV line -> fields. RFC 4180 quoting with "" escapes; embedded
// newlines are not supported, so a dangling quote is a parse error.
inline std::vector<std::string> parse_csv_line(const std::string& line, std::size_t lineno) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    std::size_t i = 0;
    const std::size_t n = line.size();
    while (i < n) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < n && line[i + 1] == '"') { cur.push_back('"'); i += 2; continue; }
                quoted = false;
                ++i;
            } else {
                cur.push_back(c);
                ++i;
            }
        } else if (c == '"') {
            if (!cur.empty()) throw ParseError(lineno, "unexpected quote inside unquoted field");
            quoted = true;
            ++i;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
            ++i;
        } else {
            cur.push_back(c);
            ++i;
        }
    }
    if (quoted) throw ParseError(lineno, "unterminated quote");
    fields.push_back(std::move(cur));
    return fields;
}

inline std::vector<AddressRecord> load_csv(std::istream& in) {
    std::vector<AddressRecord> records;
    std::string line;
    std::size_t lineno = 0;

    if (!std::getline(in, line)) return records; // empty file
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = parse_csv_line(line, lineno);
    std::unordered_map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[trim_copy(header[i])] = i;
    if (!col.count("address")) throw ParseError(lineno, "header is missing required column \"address\"");

    auto field = [&](const std::vector<std::string>& f, const char* name) -> std::optional<std::string> {
        auto it = col.find(name);
        if (it == col.end() || it->second >= f.size()) return std::nullopt;
        if (f[it->second].empty()) return std::nullopt;
        return f[it->second];
    };

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim_copy(line).empty()) continue;
        auto fields = parse_csv_line(line, lineno);
        if (fields.size() > header.size())
            throw ParseError(lineno, "row has more fields than the header");
        AddressRecord rec;
        if (auto a = field(fields, "address")) rec.raw_text = *a;
        else throw ParseError(lineno, "missing address value");
        if (auto id = field(fields, "id")) rec.id = *id;
        else rec.id = std::to_string(records.size() + 1);
        rec.pincode = field(fields, "pincode");
        rec.label = field(fields, "label");
        rec.zone = field(fields, "zone");
        validate_record(rec, lineno);
        records.push_back(std::move(rec));
    }
    return records;
}

} // namespace detail

inline std::vector<AddressRecord> load_corpus(std::istream& in, CorpusFormat format) {
    return format == CorpusFormat::jsonl ? detail::load_jsonl(in) : detail::load_csv(in);
}

inline std::vector<AddressRecord> load_corpus(const std::string& path, CorpusFormat format) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open corpus file: " + path);
    return load_corpus(in, format);
}

// Deterministic train/holdout partition. Test size is round-half-up of
// fraction * count; both halves preserve the input record order. Works for
// any row type so cleaned corpora split identically to raw ones.
template <typename T>
std::pair<std::vector<T>, std::vector<T>> split_holdout(const std::vector<T>& records,
                                                        double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw ConfigError("holdout fraction must lie strictly between 0 and 1");
    if (records.empty()) throw InputError("cannot split an empty corpus");

    const std::size_t n = records.size();
    const auto test_size = static_cast<std::size_t>(fraction * static_cast<double>(n) + 0.5);

    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    Rng rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(rng.next_below(i + 1));
        std::swap(idx[i], idx[j]);
    }
    std::vector<bool> in_test(n, false);
    for (std::size_t i = 0; i < test_size; ++i) in_test[idx[i]] = true;

    std::pair<std::vector<T>, std::vector<T>> out;
    for (std::size_t i = 0; i < n; ++i)
        (in_test[i] ? out.second : out.first).push_back(records[i]);
    return out;
}

inline void accumulate_stats(TokenStatsTable& stats, const std::vector<std::string>& tokens) {
    stats.total_docs += 1;
    stats.total_tokens += tokens.size();
    for (const auto& t : tokens) stats.term_count[t] += 1;
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i)
        stats.bigram_count[bigram_key(tokens[i], tokens[i + 1])] += 1;
    std::unordered_set<std::string_view> seen;
    for (const auto& t : tokens) seen.insert(t);
    for (auto t : seen) stats.doc_freq[std::string(t)] += 1;
}

// Order-independent merge: every field is a sum.
inline void merge_token_stats(TokenStatsTable& into, const TokenStatsTable& from) {
    into.total_docs += from.total_docs;
    into.total_tokens += from.total_tokens;
    for (const auto& [k, v] : from.term_count) into.term_count[k] += v;
    for (const auto& [k, v] : from.doc_freq) into.doc_freq[k] += v;
    for (const auto& [k, v] : from.bigram_count) into.bigram_count[k] += v;
}

inline TokenStatsTable build_token_stats_from_tokens(const std::vector<std::vector<std::string>>& docs) {
    TokenStatsTable stats;
    for (const auto& d : docs) accumulate_stats(stats, d);
    return stats;
}

// Tokenizer: string -> vector<string>. The callers pass basic cleaning for
// raw corpora; cleaned corpora go through build_token_stats_from_tokens.
template <typename Tokenizer>
TokenStatsTable build_token_stats(const std::vector<AddressRecord>& records, Tokenizer&& tokenize,
                                  unsigned jobs = 1) {
    if (jobs <= 1 || records.size() < 2 * jobs) {
        TokenStatsTable stats;
        for (const auto& r : records) accumulate_stats(stats, tokenize(r.raw_text));
        return stats;
    }
    std::vector<TokenStatsTable> partial(jobs);
    std::vector<std::thread> workers;
    const std::size_t chunk = (records.size() + jobs - 1) / jobs;
    for (unsigned w = 0; w < jobs; ++w) {
        workers.emplace_back([&, w] {
            const std::size_t lo = w * chunk;
            const std::size_t hi = std::min(records.size(), lo + chunk);
            for (std::size_t i = lo; i < hi; ++i)
                accumulate_stats(partial[w], tokenize(records[i].raw_text));
        });
    }
    for (auto& t : workers) t.join();
    TokenStatsTable stats;
    for (const auto& p : partial) merge_token_stats(stats, p);
    return stats;
}

} // namespace addrkit
