#include <algorithm>
#include <cctype>
#include <fstream>

#include "contextox/errors.hpp"
#include "contextox/evaluation.hpp"

namespace contextox::evaluation {

namespace {

bool is_word_char(unsigned char c) {
    // Non-ASCII bytes count as word characters so UTF-8 letters never split
    // a boundary.
    return std::isalnum(c) || c == '_' || c >= 0x80;
}

std::string fold(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (unsigned char c : s) out.push_back(static_cast<char>(std::tolower(c)));
    return out;
}

// Trim, fold, collapse runs of whitespace to single spaces.
std::string canonical_term(const std::string& raw) {
    std::string out;
    bool pending_space = false;
    for (unsigned char c : raw) {
        if (std::isspace(c)) {
            if (!out.empty()) pending_space = true;
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

} // namespace

Lexicon Lexicon::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open lexicon file: " + path);
    std::vector<std::string> terms;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::string term = canonical_term(line);
        if (!term.empty()) terms.push_back(std::move(term));
    }
    if (terms.empty()) throw ConfigError("lexicon file has no terms: " + path);
    return from_terms(std::move(terms));
}

Lexicon Lexicon::from_terms(std::vector<std::string> terms) {
    Lexicon lex;
    for (std::string& t : terms) {
        std::string c = canonical_term(t);
        if (!c.empty()) lex.terms_.push_back(std::move(c));
    }
    std::sort(lex.terms_.begin(), lex.terms_.end());
    lex.terms_.erase(std::unique(lex.terms_.begin(), lex.terms_.end()), lex.terms_.end());
    return lex;
}

int lexicon_classify(const std::string& norm_text, const Lexicon& lexicon) {
    if (lexicon.empty()) throw ConfigError("lexicon_classify requires a non-empty lexicon");
    const std::string text = fold(norm_text);
    for (const std::string& term : lexicon.terms()) {
        std::size_t from = 0;
        while (true) {
            const std::size_t pos = text.find(term, from);
            if (pos == std::string::npos) break;
            const bool left_ok =
                pos == 0 || !is_word_char(static_cast<unsigned char>(text[pos - 1]));
            const std::size_t end = pos + term.size();
            const bool right_ok =
                end >= text.size() || !is_word_char(static_cast<unsigned char>(text[end]));
            if (left_ok && right_ok) return 1;
            from = pos + 1;
        }
    }
    return 0;
}

} // namespace contextox::evaluation
