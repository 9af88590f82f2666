#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace contextox {

/// Word-level vocabulary learned from a corpus. Ids 0..5 are reserved for
/// the special tokens below, in this order; remaining ids are assigned by
/// descending frequency (ties alphabetical) for determinism.
class Vocabulary {
public:
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;
    static constexpr int kCls = 2;
    static constexpr int kSep = 3;
    static constexpr int kBos = 4;
    static constexpr int kEos = 5;

    Vocabulary();

    static Vocabulary build(const std::vector<std::string>& texts, std::size_t max_size = 0,
                            std::size_t min_count = 1);

    /// Reconstructs a vocabulary from its token list (checkpoint form).
    static Vocabulary from_tokens(const std::vector<std::string>& tokens);

    int id_or_unk(const std::string& token) const;
    bool contains(const std::string& token) const;
    const std::string& token(int id) const;
    int size() const { return static_cast<int>(tokens_.size()); }
    const std::vector<std::string>& tokens() const { return tokens_; }

    std::vector<int> encode(const std::string& text) const;       // whitespace words
    std::string decode(const std::vector<int>& ids) const;        // specials skipped
    std::uint64_t content_hash() const;

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> index_;

    void append(const std::string& token);
};

} // namespace contextox
