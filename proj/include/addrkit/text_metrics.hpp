#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace addrkit {

// Minimum number of single-character insertions, deletions and substitutions
// turning `a` into `b`. Two-row dynamic program, O(|a|*|b|) time, O(min) space.
inline std::size_t levenshtein(std::string_view a, std::string_view b) {
    if (a.size() < b.size()) std::swap(a, b);
    if (b.empty()) return a.size();

    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cur[0] = i + 1;
        for (std::size_t j = 0; j < b.size(); ++j) {
            const std::size_t sub = prev[j] + (a[i] == b[j] ? 0 : 1);
            cur[j + 1] = std::min({sub, prev[j + 1] + 1, cur[j] + 1});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

// True iff levenshtein(a, b) < bound. Length pruning makes the common
// reject cheap inside clustering loops.
inline bool levenshtein_below(std::string_view a, std::string_view b, std::size_t bound) {
    const std::size_t la = a.size(), lb = b.size();
    const std::size_t diff = la > lb ? la - lb : lb - la;
    if (diff >= bound) return false;
    return levenshtein(a, b) < bound;
}

namespace detail {

inline bool mp_vowel(char c) { return c == 'A' || c == 'E' || c == 'I' || c == 'O' || c == 'U'; }
inline bool mp_frontv(char c) { return c == 'E' || c == 'I' || c == 'Y'; }
// Letters that silence a following H.
inline bool mp_varson(char c) { return c == 'C' || c == 'S' || c == 'P' || c == 'T' || c == 'G'; }

} // namespace detail

// Original Metaphone (Philips 1990), uncapped key length. Non-alphabetic
// characters are skipped; equal inputs always produce equal keys. The key
// alphabet is 0BFHJKLMNPRSTWXY plus initial vowels.
inline std::string metaphone(std::string_view word) {
    using detail::mp_frontv;
    using detail::mp_varson;
    using detail::mp_vowel;

    std::string w;
    w.reserve(word.size());
    for (char c : word) {
        if (c >= 'a' && c <= 'z') w.push_back(static_cast<char>(c - 'a' + 'A'));
        else if (c >= 'A' && c <= 'Z') w.push_back(c);
    }
    if (w.empty()) return {};

    // Initial-letter exceptions.
    switch (w[0]) {
    case 'A':
        if (w.size() > 1 && w[1] == 'E') w.erase(0, 1);
        break;
    case 'G':
    case 'K':
    case 'P':
        if (w.size() > 1 && w[1] == 'N') w.erase(0, 1);
        break;
    case 'W':
        if (w.size() > 1 && w[1] == 'R') w.erase(0, 1);
        else if (w.size() > 1 && w[1] == 'H') w.erase(1, 1); // WH- sounds as W-
        break;
    case 'X':
        w[0] = 'S';
        break;
    default:
        break;
    }

    const std::size_t n = w.size();
    std::string code;
    code.reserve(n);

    for (std::size_t i = 0; i < n; ++i) {
        const char c = w[i];
        if (c != 'C' && i > 0 && w[i - 1] == c) continue; // collapse doubled letters

        const bool last = (i + 1 == n);
        const char next = last ? '\0' : w[i + 1];
        const char after = (i + 2 < n) ? w[i + 2] : '\0';
        const char prev = (i > 0) ? w[i - 1] : '\0';

        switch (c) {
        case 'A': case 'E': case 'I': case 'O': case 'U':
            if (i == 0) code.push_back(c); // vowels survive only word-initially
            break;
        case 'B':
            if (!(last && prev == 'M')) code.push_back('B'); // -MB is silent
            break;
        case 'C':
            if (prev == 'S' && mp_frontv(next)) break;                  // SCE-, SCI-, SCY-
            if (next == 'I' && after == 'A') { code.push_back('X'); break; } // -CIA-
            if (mp_frontv(next)) { code.push_back('S'); break; }        // CE, CI, CY
            if (next == 'H') {
                if (i == 0 && n >= 3 && mp_vowel(w[2])) code.push_back('K');
                else if (prev == 'S') code.push_back('K');               // -SCH-
                else code.push_back('X');                                // CH
                break;
            }
            code.push_back('K');
            break;
        case 'D':
            if (next == 'G' && i + 2 < n && mp_frontv(after)) {
                code.push_back('J'); // -DGE-, -DGI-, -DGY-
                i += 2;
            } else {
                code.push_back('T');
            }
            break;
        case 'F':
            code.push_back('F');
            break;
        case 'G':
            if (next == 'H' && i + 1 == n - 1) break;                    // -GH silent at end
            if (next == 'H' && i + 1 < n - 1 && !mp_vowel(after)) break; // GH + consonant
            if (i > 0 && next == 'N') break;                             // -GN-, -GNED
            if (!last && mp_frontv(next) && prev != 'G') code.push_back('J');
            else code.push_back('K');
            break;
        case 'H':
            if (last) break;
            if (i > 0 && mp_varson(prev)) break;
            if (mp_vowel(next)) code.push_back('H');
            break;
        case 'J':
            code.push_back('J');
            break;
        case 'K':
            if (prev != 'C') code.push_back('K');
            break;
        case 'L':
            code.push_back('L');
            break;
        case 'M':
            code.push_back('M');
            break;
        case 'N':
            code.push_back('N');
            break;
        case 'P':
            code.push_back(next == 'H' ? 'F' : 'P');
            break;
        case 'Q':
            code.push_back('K');
            break;
        case 'R':
            code.push_back('R');
            break;
        case 'S':
            if (next == 'H' || (next == 'I' && (after == 'O' || after == 'A')))
                code.push_back('X');
            else
                code.push_back('S');
            break;
        case 'T':
            if (next == 'I' && (after == 'O' || after == 'A')) { code.push_back('X'); break; }
            if (next == 'C' && after == 'H') break; // -TCH-, the CH delivers X
            code.push_back(next == 'H' ? '0' : 'T');
            break;
        case 'V':
            code.push_back('F');
            break;
        case 'W':
            if (!last && mp_vowel(next)) code.push_back('W');
            break;
        case 'X':
            code.push_back('K');
            code.push_back('S');
            break;
        case 'Y':
            if (!last && mp_vowel(next)) code.push_back('Y');
            break;
        case 'Z':
            code.push_back('S');
            break;
        default:
            break;
        }
    }
    return code;
}

} // namespace addrkit
