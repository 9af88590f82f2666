#include "contextox/vocab.hpp"

#include <algorithm>
#include <map>

#include "contextox/errors.hpp"
#include "contextox/textnorm.hpp"

namespace contextox {

namespace {
const char* kSpecials[] = {"<pad>", "<unk>", "<cls>", "<sep>", "<bos>", "<eos>"};
}

Vocabulary::Vocabulary() {
    for (const char* s : kSpecials) append(s);
}

void Vocabulary::append(const std::string& token) {
    index_.emplace(token, static_cast<int>(tokens_.size()));
    tokens_.push_back(token);
}

Vocabulary Vocabulary::build(const std::vector<std::string>& texts, std::size_t max_size,
                             std::size_t min_count) {
    // std::map keeps tie-breaking alphabetical without a second sort key pass.
    std::map<std::string, std::size_t> counts;
    for (const std::string& text : texts) {
        for (const std::string& tok : textnorm::tokenize(text)) ++counts[tok];
    }
    std::vector<std::pair<std::string, std::size_t>> entries(counts.begin(), counts.end());
    std::stable_sort(entries.begin(), entries.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });

    Vocabulary v;
    for (const auto& [tok, count] : entries) {
        if (count < min_count) continue;
        if (max_size != 0 && v.tokens_.size() >= max_size) break;
        if (!v.index_.count(tok)) v.append(tok);
    }
    return v;
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens) {
    Vocabulary v;
    if (tokens.size() < 6) throw IntegrityError("vocabulary token list is missing specials");
    for (int i = 0; i < 6; ++i) {
        if (tokens[static_cast<std::size_t>(i)] != kSpecials[i]) {
            throw IntegrityError("vocabulary special token mismatch at id " + std::to_string(i));
        }
    }
    for (std::size_t i = 6; i < tokens.size(); ++i) {
        if (v.index_.count(tokens[i])) {
            throw IntegrityError("duplicate vocabulary token '" + tokens[i] + "'");
        }
        v.append(tokens[i]);
    }
    return v;
}

int Vocabulary::id_or_unk(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(const std::string& token) const { return index_.count(token) > 0; }

const std::string& Vocabulary::token(int id) const {
    if (id < 0 || id >= size()) throw IntegrityError("token id out of range: " + std::to_string(id));
    return tokens_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocabulary::encode(const std::string& text) const {
    std::vector<int> ids;
    for (const std::string& tok : textnorm::tokenize(text)) ids.push_back(id_or_unk(tok));
    return ids;
}

std::string Vocabulary::decode(const std::vector<int>& ids) const {
    std::string out;
    for (int id : ids) {
        if (id <= kEos && id >= kPad) continue;
        if (!out.empty()) out += ' ';
        out += token(id);
    }
    return out;
}

std::uint64_t Vocabulary::content_hash() const {
    // FNV-1a over the token list, separator-framed.
    std::uint64_t h = 1469598103934665603ULL;
    for (const std::string& t : tokens_) {
        for (char c : t) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ULL;
        }
        h ^= 0xff;
        h *= 1099511628211ULL;
    }
    return h;
}

} // namespace contextox
