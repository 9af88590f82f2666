#include "contextox/textnorm.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <sstream>
#include <unordered_map>

#include "contextox/errors.hpp"

namespace contextox::textnorm {

namespace {

std::string ascii_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool has_whitespace(const std::string& s) {
    return std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

// Matching is done on the already-folded string, so patterns are lowercase.
const std::regex& url_regex() {
    static const std::regex re(R"((https?://[^\s]+|www\.[^\s]+))");
    return re;
}

const std::regex& mention_regex() {
    static const std::regex re(R"(@[a-z0-9_]+)");
    return re;
}

} // namespace

NormRules NormRules::defaults() {
    NormRules rules;
    rules.emoticon_map = default_emoticon_table();
    return rules;
}

void NormRules::validate() const {
    if (url_placeholder.empty() || user_placeholder.empty()) {
        throw ConfigError("normalization placeholders must be non-empty");
    }
    if (has_whitespace(url_placeholder) || has_whitespace(user_placeholder)) {
        throw ConfigError("normalization placeholders must not contain whitespace");
    }
    // Idempotency guard: replacement output must never be re-replaceable.
    auto check_stable = [](const std::string& s, const std::string& what) {
        if (s.find('@') != std::string::npos || s.find("http") != std::string::npos ||
            s.find("www.") != std::string::npos) {
            throw ConfigError(what + " '" + s + "' would itself be rewritten by normalization");
        }
    };
    check_stable(url_placeholder, "url placeholder");
    check_stable(user_placeholder, "user placeholder");

    std::unordered_map<std::string, std::string> seen;
    for (const auto& [emoticon, tag] : emoticon_map) {
        if (emoticon.empty()) throw ConfigError("emoticon table contains an empty key");
        if (has_whitespace(emoticon) || has_whitespace(tag)) {
            throw ConfigError("emoticon entries must not contain whitespace: '" + emoticon + "'");
        }
        check_stable(tag, "emoticon tag");
        const std::string key = lowercase ? ascii_lower(emoticon) : emoticon;
        auto [it, inserted] = seen.emplace(key, tag);
        if (!inserted && it->second != tag) {
            throw ConfigError("emoticon table has conflicting entries for '" + emoticon + "'");
        }
    }
    for (const auto& [emoticon, tag] : emoticon_map) {
        const std::string folded_tag = lowercase ? ascii_lower(tag) : tag;
        auto hit = seen.find(folded_tag);
        if (hit != seen.end() && hit->second != tag) {
            throw ConfigError("emoticon tag '" + tag + "' is also an emoticon key");
        }
    }
}

std::vector<std::pair<std::string, std::string>> load_emoticon_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open emoticon table: " + path);
    std::vector<std::pair<std::string, std::string>> table;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw ParseError("emoticon table line lacks a tab separator", line_no);
        }
        std::string emoticon = line.substr(0, tab);
        std::string tag = line.substr(tab + 1);
        while (!tag.empty() && (tag.back() == '\r' || tag.back() == ' ')) tag.pop_back();
        if (emoticon.empty() || tag.empty()) {
            throw ParseError("emoticon table entry is empty", line_no);
        }
        table.emplace_back(std::move(emoticon), std::move(tag));
    }
    return table;
}

std::string normalize_text(const std::string& raw, const NormRules& rules) {
    rules.validate();

    // Case folding comes first so that every later rule (and the rules'
    // own placeholders/tags) can be matched in folded form; this is what
    // makes the whole pipeline idempotent.
    std::string text = rules.lowercase ? ascii_lower(raw) : raw;
    const std::string url_tag = rules.lowercase ? ascii_lower(rules.url_placeholder) : rules.url_placeholder;
    const std::string user_tag =
        rules.lowercase ? ascii_lower(rules.user_placeholder) : rules.user_placeholder;

    text = std::regex_replace(text, url_regex(), url_tag);
    text = std::regex_replace(text, mention_regex(), user_tag);

    std::unordered_map<std::string, std::string> emap;
    for (const auto& [emoticon, tag] : rules.emoticon_map) {
        const std::string key = rules.lowercase ? ascii_lower(emoticon) : emoticon;
        emap.emplace(key, rules.lowercase ? ascii_lower(tag) : tag);
    }

    // Emoticons are replaced only when they stand alone as a whitespace
    // token; whitespace itself is preserved byte for byte.
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (std::isspace(static_cast<unsigned char>(text[i]))) {
            out.push_back(text[i]);
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        const std::string token = text.substr(i, j - i);
        auto hit = emap.find(token);
        out += (hit != emap.end()) ? hit->second : token;
        i = j;
    }
    return out;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
    return tokens;
}

void throw_concat_budget_error(std::size_t target_len, std::size_t budget) {
    throw ConfigError("token budget " + std::to_string(budget) +
                      " cannot hold the target utterance (" + std::to_string(target_len) +
                      " tokens) plus a separator");
}

} // namespace contextox::textnorm
