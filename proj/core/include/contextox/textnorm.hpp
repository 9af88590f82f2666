#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace contextox::textnorm {

/// Deterministic social-media normalization rules. The bundled emoticon
/// table (see data/emoticons.tsv) maps 40 common emoticons to tag tokens;
/// it can be replaced via NormRules::with_emoticon_table or load_emoticon_table.
struct NormRules {
    std::string url_placeholder = "<url>";
    std::string user_placeholder = "<user>";
    std::vector<std::pair<std::string, std::string>> emoticon_map; // emoticon -> tag
    bool lowercase = true;

    /// Rules with the bundled 40-entry emoticon table.
    static NormRules defaults();

    /// Throws ConfigError if a placeholder contains whitespace or emoticon
    /// keys collide (after case folding when lowercase is on).
    void validate() const;
};

/// Reads a two-column "emoticon<TAB>tag" file. '#' starts a comment line.
std::vector<std::pair<std::string, std::string>> load_emoticon_table(const std::string& path);

/// The bundled table, available without any file on disk.
const std::vector<std::pair<std::string, std::string>>& default_emoticon_table();

/// Replaces URLs and @-mentions with placeholders, folds case, and maps
/// whitespace-delimited emoticon tokens to their tags. Idempotent:
/// normalize_text(normalize_text(x)) == normalize_text(x).
std::string normalize_text(const std::string& raw, const NormRules& rules);

inline std::string normalize_text(const std::string& raw) {
    return normalize_text(raw, NormRules::defaults());
}

/// Whitespace tokenization of a normalized string.
std::vector<std::string> tokenize(const std::string& text);

inline constexpr std::size_t kUtteranceTokenBudget = 150;

/// First max_len tokens; shorter inputs pass through unchanged.
template <typename Token>
std::vector<Token> truncate_utterance(const std::vector<Token>& tokens,
                                      std::size_t max_len = kUtteranceTokenBudget) {
    if (tokens.size() <= max_len) return tokens;
    return std::vector<Token>(tokens.begin(), tokens.begin() + static_cast<long>(max_len));
}

[[noreturn]] void throw_concat_budget_error(std::size_t target_len, std::size_t budget);

/// Builds the early-fusion input: target first, then context utterances
/// most-recent-first, separator-joined, truncated to the budget. The target
/// is never cut and a newer context utterance always survives an older one.
/// Throws ConfigError when the budget cannot hold the target plus one
/// separator slot.
template <typename Token>
std::vector<Token> build_concat_input(const std::vector<Token>& target,
                                      const std::vector<std::vector<Token>>& context_chronological,
                                      std::size_t budget, const Token& separator) {
    if (budget < target.size() + 1) {
        throw_concat_budget_error(target.size(), budget);
    }
    std::vector<Token> out = target;
    for (auto it = context_chronological.rbegin(); it != context_chronological.rend(); ++it) {
        if (out.size() >= budget) break;
        out.push_back(separator);
        for (const Token& tok : *it) {
            if (out.size() >= budget) break;
            out.push_back(tok);
        }
    }
    if (out.size() > budget) out.resize(budget);
    return out;
}

} // namespace contextox::textnorm
