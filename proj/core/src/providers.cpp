#include <fstream>

#include <json.hpp>

#include "contextox/errors.hpp"
#include "contextox/evaluation.hpp"

namespace contextox::evaluation {

using nlohmann::json;

std::string to_string(Provider p) {
    switch (p) {
        case Provider::PERSPECTIVE: return "perspective";
        case Provider::AZURE: return "azure";
        case Provider::CLARIFAI: return "clarifai";
    }
    return "perspective";
}

Provider provider_from_string(const std::string& s) {
    std::string lower = s;
    for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower == "perspective") return Provider::PERSPECTIVE;
    if (lower == "azure") return Provider::AZURE;
    if (lower == "clarifai") return Provider::CLARIFAI;
    throw ConfigError("unknown provider: '" + s + "'");
}

namespace {

double require_category(const std::map<std::string, double>& scores, const std::string& name,
                        Provider p) {
    auto it = scores.find(name);
    if (it == scores.end()) {
        throw IntegrityError(to_string(p) + " scores are missing category '" + name + "'");
    }
    return it->second;
}

} // namespace

double map_api_scores(Provider provider, const std::map<std::string, double>& category_scores) {
    switch (provider) {
        case Provider::PERSPECTIVE:
            return require_category(category_scores, "toxicity", provider);
        case Provider::AZURE: {
            // Sexually explicit / suggestive / offensive, as exposed by the
            // moderation API; the toxicity score is their maximum.
            const double c1 = require_category(category_scores, "category1", provider);
            const double c2 = require_category(category_scores, "category2", provider);
            const double c3 = require_category(category_scores, "category3", provider);
            return std::max(c1, std::max(c2, c3));
        }
        case Provider::CLARIFAI:
            return require_category(category_scores, "toxic", provider);
    }
    throw ConfigError("unhandled provider");
}

ReplayScoreProvider::ReplayScoreProvider(Provider provider, const std::string& cache_path)
    : provider_(provider) {
    std::ifstream in(cache_path);
    if (!in) throw ConfigError("cannot open provider cache: " + cache_path);
    std::string line;
    long line_no = 0;
    const std::string want = evaluation::to_string(provider);
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(std::string("invalid provider cache record: ") + e.what(), line_no);
        }
        if (!rec.contains("sample_id") || !rec.at("sample_id").is_string() ||
            !rec.contains("provider") || !rec.at("provider").is_string() ||
            !rec.contains("categories") || !rec.at("categories").is_object()) {
            throw ParseError("provider cache record needs sample_id/provider/categories", line_no);
        }
        if (rec.at("provider").get<std::string>() != want) continue;
        std::map<std::string, double> scores;
        for (const auto& [k, v] : rec.at("categories").items()) {
            if (!v.is_number()) throw ParseError("category score must be a number", line_no);
            scores[k] = v.get<double>();
        }
        cache_[rec.at("sample_id").get<std::string>()] = std::move(scores);
    }
}

std::map<std::string, double> ReplayScoreProvider::categories(const std::string& sample_id) const {
    auto it = cache_.find(sample_id);
    if (it == cache_.end()) {
        throw IntegrityError("provider cache has no scores for sample '" + sample_id + "'");
    }
    return it->second;
}

} // namespace contextox::evaluation
