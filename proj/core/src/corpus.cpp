#include "contextox/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "contextox/errors.hpp"
#include "contextox/rng.hpp"
#include "json_detail.hpp"

namespace contextox::corpus {

using detail::json;

std::string to_string(Source s) {
    switch (s) {
        case Source::FBK: return "FBK";
        case Source::BBF: return "BBF";
        case Source::BAD: return "BAD";
        case Source::HQR: return "HQR";
        case Source::HQG: return "HQG";
        case Source::CAD: return "CAD";
        case Source::SYNTHETIC: return "SYNTHETIC";
    }
    return "SYNTHETIC";
}

Source source_from_string(const std::string& s) {
    std::string up = s;
    std::transform(up.begin(), up.end(), up.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (up == "FBK") return Source::FBK;
    if (up == "BBF") return Source::BBF;
    if (up == "BAD") return Source::BAD;
    if (up == "HQR") return Source::HQR;
    if (up == "HQG") return Source::HQG;
    if (up == "CAD") return Source::CAD;
    if (up == "SYNTHETIC") return Source::SYNTHETIC;
    throw IntegrityError("unknown dataset source: '" + s + "'");
}

std::string to_string(Origin o) { return o == Origin::REAL ? "real" : "synthetic"; }

Origin origin_from_string(const std::string& s) {
    if (s == "real") return Origin::REAL;
    if (s == "synthetic") return Origin::SYNTHETIC;
    throw IntegrityError("unknown sample origin: '" + s + "'");
}

std::string to_string(AugSetup s) {
    switch (s) {
        case AugSetup::BALANCE: return "balance";
        case AugSetup::FLIP_10_TARGET: return "flip_10_target";
        case AugSetup::FLIP_01_TARGET: return "flip_01_target";
        case AugSetup::FLIP_CONTEXT: return "flip_context";
    }
    return "balance";
}

AugSetup aug_setup_from_string(const std::string& s) {
    if (s == "balance") return AugSetup::BALANCE;
    if (s == "flip_10_target") return AugSetup::FLIP_10_TARGET;
    if (s == "flip_01_target") return AugSetup::FLIP_01_TARGET;
    if (s == "flip_context") return AugSetup::FLIP_CONTEXT;
    throw IntegrityError("unknown augmentation setup: '" + s + "'");
}

int assigned_label(AugSetup setup) {
    // 1-0 flip targets are the only setup that injects non-toxic labels.
    return setup == AugSetup::FLIP_10_TARGET ? 0 : 1;
}

std::string to_string(SplitName n) {
    switch (n) {
        case SplitName::TRAIN: return "train";
        case SplitName::VALID: return "valid";
        case SplitName::TEST: return "test";
    }
    return "train";
}

// ---------------------------------------------------------------------------
// JSON helpers.
// ---------------------------------------------------------------------------

namespace detail {

json parse_line(const std::string& line, long line_no) {
    try {
        return json::parse(line);
    } catch (const json::exception& e) {
        throw ParseError(std::string("invalid JSON record: ") + e.what(), line_no);
    }
}

std::optional<int> binary_or_null(const json& j, const char* key, long line) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    const json& v = j.at(key);
    if (v.is_number_integer()) {
        const int x = v.get<int>();
        if (x == 0 || x == 1) return x;
    }
    throw ParseError(std::string("field '") + key + "' must be 0, 1 or null", line);
}

std::optional<bool> bool_or_null(const json& j, const char* key, long line) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    const json& v = j.at(key);
    if (!v.is_boolean()) {
        throw ParseError(std::string("field '") + key + "' must be a boolean or null", line);
    }
    return v.get<bool>();
}

json utterance_to_json(const Utterance& u, const TurnLabels& labels) {
    json j;
    j["speaker"] = u.speaker_id;
    j["text"] = u.raw_text;
    j["label"] = labels.label ? json(*labels.label) : json(nullptr);
    if (labels.phase1_label) j["phase1_label"] = *labels.phase1_label;
    if (labels.phase2_label) j["phase2_label"] = *labels.phase2_label;
    if (labels.context_needed) j["context_needed"] = *labels.context_needed;
    return j;
}

json sample_to_json(const Sample& s) {
    json j;
    j["conversation_id"] = s.sample_id;
    j["source"] = to_string(s.source);
    j["origin"] = to_string(s.origin);
    if (s.aug_setup) j["aug_setup"] = to_string(*s.aug_setup);
    json utts = json::array();
    for (const Utterance& c : s.context) {
        TurnLabels empty;
        utts.push_back(utterance_to_json(c, empty));
    }
    TurnLabels tl;
    tl.label = s.label;
    tl.phase1_label = s.phase1_label;
    tl.phase2_label = s.phase2_label;
    tl.context_needed = s.context_needed;
    utts.push_back(utterance_to_json(s.target, tl));
    j["utterances"] = utts;
    return j;
}

} // namespace detail

namespace {

std::string trimmed(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

struct ParsedRecord {
    AnnotatedConversation conv;
    std::optional<Origin> origin;
    std::optional<AugSetup> aug_setup;
};

ParsedRecord parse_conversation_record(const json& rec, long line,
                                       std::optional<Source> expected_source,
                                       const textnorm::NormRules& rules) {
    if (!rec.is_object()) throw ParseError("record is not a JSON object", line);
    if (!rec.contains("conversation_id") || !rec.at("conversation_id").is_string()) {
        throw ParseError("record missing string field 'conversation_id'", line);
    }
    ParsedRecord out;
    AnnotatedConversation& ac = out.conv;
    ac.conversation.conversation_id = rec.at("conversation_id").get<std::string>();
    if (ac.conversation.conversation_id.empty()) {
        throw ParseError("'conversation_id' must be non-empty", line);
    }

    if (rec.contains("source") && !rec.at("source").is_null()) {
        if (!rec.at("source").is_string()) throw ParseError("'source' must be a string", line);
        ac.conversation.source = source_from_string(rec.at("source").get<std::string>());
        if (expected_source && ac.conversation.source != *expected_source) {
            throw IntegrityError("record source " + to_string(ac.conversation.source) +
                                 " conflicts with expected " + to_string(*expected_source) +
                                 " for conversation '" + ac.conversation.conversation_id + "'");
        }
    } else if (expected_source) {
        ac.conversation.source = *expected_source;
    } else {
        throw ParseError("record missing 'source'", line);
    }

    if (!rec.contains("utterances") || !rec.at("utterances").is_array() ||
        rec.at("utterances").empty()) {
        throw ParseError("record missing non-empty 'utterances' array", line);
    }

    int position = 0;
    for (const json& uj : rec.at("utterances")) {
        if (!uj.is_object()) throw ParseError("utterance is not a JSON object", line);
        Utterance u;
        u.position = position++;
        if (uj.contains("speaker") && uj.at("speaker").is_string()) {
            u.speaker_id = uj.at("speaker").get<std::string>();
        }
        if (!uj.contains("text") || !uj.at("text").is_string()) {
            throw ParseError("utterance missing string field 'text'", line);
        }
        u.raw_text = uj.at("text").get<std::string>();
        if (trimmed(u.raw_text).empty()) {
            throw ParseError("utterance text is empty after trimming", line);
        }
        u.norm_text = textnorm::normalize_text(u.raw_text, rules);

        TurnLabels tl;
        tl.label = detail::binary_or_null(uj, "label", line);
        tl.phase1_label = detail::binary_or_null(uj, "phase1_label", line);
        tl.phase2_label = detail::binary_or_null(uj, "phase2_label", line);
        tl.context_needed = detail::bool_or_null(uj, "context_needed", line);

        ac.conversation.utterances.push_back(std::move(u));
        ac.labels.push_back(tl);
    }

    if (rec.contains("origin") && !rec.at("origin").is_null()) {
        if (!rec.at("origin").is_string()) throw ParseError("'origin' must be a string", line);
        out.origin = origin_from_string(rec.at("origin").get<std::string>());
    }
    if (rec.contains("aug_setup") && !rec.at("aug_setup").is_null()) {
        if (!rec.at("aug_setup").is_string()) throw ParseError("'aug_setup' must be a string", line);
        out.aug_setup = aug_setup_from_string(rec.at("aug_setup").get<std::string>());
    }
    return out;
}

} // namespace

namespace detail {

Sample sample_from_json(const json& record, long line, const textnorm::NormRules& rules) {
    ParsedRecord rec = parse_conversation_record(record, line, std::nullopt, rules);
    const Conversation& conv = rec.conv.conversation;
    Sample s;
    s.sample_id = conv.conversation_id;
    s.source = conv.source;
    s.origin = rec.origin.value_or(Origin::REAL);
    s.aug_setup = rec.aug_setup;
    if (s.origin == Origin::SYNTHETIC && !s.aug_setup) {
        throw ParseError("synthetic sample lacks 'aug_setup'", line);
    }
    const std::size_t n = conv.size();
    s.context.assign(conv.utterances.begin(), conv.utterances.end() - 1);
    s.target = conv.utterances[n - 1];
    const TurnLabels& tl = rec.conv.labels[n - 1];
    if (!tl.label) throw ParseError("sample target utterance lacks a label", line);
    s.label = *tl.label;
    s.phase1_label = tl.phase1_label;
    s.phase2_label = tl.phase2_label;
    s.context_needed = tl.context_needed;
    return s;
}

} // namespace detail

std::vector<AnnotatedConversation> load_dataset_stream(std::istream& in,
                                                       std::optional<Source> expected_source,
                                                       const textnorm::NormRules& rules,
                                                       const std::string& origin_name) {
    std::vector<AnnotatedConversation> out;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trimmed(line).empty()) continue;
        json rec = detail::parse_line(line, line_no);
        ParsedRecord parsed = parse_conversation_record(rec, line_no, expected_source, rules);
        const std::string& id = parsed.conv.conversation.conversation_id;
        if (!seen_ids.insert(id).second) {
            throw IntegrityError("duplicate conversation_id '" + id + "' in " + origin_name);
        }
        out.push_back(std::move(parsed.conv));
    }
    return out;
}

std::vector<AnnotatedConversation> load_dataset(const std::string& path,
                                                std::optional<Source> expected_source,
                                                const textnorm::NormRules& rules) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open dataset file: " + path);
    return load_dataset_stream(in, expected_source, rules, path);
}

void write_dataset(const std::string& path, const std::vector<AnnotatedConversation>& data) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write dataset file: " + path);
    for (const AnnotatedConversation& ac : data) {
        json j;
        j["conversation_id"] = ac.conversation.conversation_id;
        j["source"] = to_string(ac.conversation.source);
        json utts = json::array();
        for (std::size_t i = 0; i < ac.conversation.size(); ++i) {
            utts.push_back(detail::utterance_to_json(ac.conversation.utterances[i], ac.labels[i]));
        }
        j["utterances"] = utts;
        out << j.dump() << '\n';
    }
}

std::vector<Sample> load_samples(const std::string& path, const textnorm::NormRules& rules) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open sample file: " + path);
    std::vector<Sample> out;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trimmed(line).empty()) continue;
        json rec = detail::parse_line(line, line_no);
        Sample s = detail::sample_from_json(rec, line_no, rules);
        if (!seen_ids.insert(s.sample_id).second) {
            throw IntegrityError("duplicate sample_id '" + s.sample_id + "' in " + path);
        }
        out.push_back(std::move(s));
    }
    return out;
}

void write_samples(const std::string& path, const std::vector<Sample>& samples) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write sample file: " + path);
    for (const Sample& s : samples) out << detail::sample_to_json(s).dump() << '\n';
}

bool looks_like_sample_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trimmed(line).empty()) continue;
        json rec = detail::parse_line(line, line_no);
        return rec.is_object() && rec.contains("origin");
    }
    return false;
}

// ---------------------------------------------------------------------------
// Turn expansion.
// ---------------------------------------------------------------------------

ExpandOptions ExpandOptions::defaults_for(Source source) {
    ExpandOptions opts;
    // FBK and BBF fix the annotated target as the final turn; the other
    // corpora are broken down so every turn forms a sample.
    if (source == Source::FBK || source == Source::BBF) opts.last_only = true;
    return opts;
}

namespace {

Sample make_sample(const Conversation& conv, int target_pos, int label) {
    Sample s;
    s.sample_id = conv.conversation_id + ":" + std::to_string(target_pos);
    s.source = conv.source;
    s.context.assign(conv.utterances.begin(), conv.utterances.begin() + target_pos);
    s.target = conv.utterances[static_cast<std::size_t>(target_pos)];
    s.label = label;
    s.origin = conv.source == Source::SYNTHETIC ? Origin::SYNTHETIC : Origin::REAL;
    return s;
}

std::vector<int> target_positions(std::size_t len, const ExpandOptions& opts) {
    std::vector<int> positions;
    if (opts.last_only) {
        positions.push_back(static_cast<int>(len) - 1);
        return positions;
    }
    for (int i = opts.min_turn; i < static_cast<int>(len); ++i) positions.push_back(i);
    return positions;
}

} // namespace

std::vector<Sample> expand_turns(const Conversation& conv, const std::vector<int>& labels,
                                 const ExpandOptions& opts) {
    if (labels.size() != conv.size()) {
        throw IntegrityError("label vector length " + std::to_string(labels.size()) +
                             " does not match conversation length " + std::to_string(conv.size()) +
                             " for '" + conv.conversation_id + "'");
    }
    std::vector<Sample> out;
    for (int pos : target_positions(conv.size(), opts)) {
        out.push_back(make_sample(conv, pos, labels[static_cast<std::size_t>(pos)]));
    }
    return out;
}

std::vector<Sample> expand_turns(const AnnotatedConversation& ac, const ExpandOptions& opts) {
    const Conversation& conv = ac.conversation;
    std::vector<Sample> out;
    for (int pos : target_positions(conv.size(), opts)) {
        const TurnLabels& tl = ac.labels[static_cast<std::size_t>(pos)];
        if (!tl.label) {
            throw IntegrityError("utterance " + std::to_string(pos) + " of conversation '" +
                                 conv.conversation_id + "' is a target but has no label");
        }
        Sample s = make_sample(conv, pos, *tl.label);
        s.phase1_label = tl.phase1_label;
        s.phase2_label = tl.phase2_label;
        s.context_needed = tl.context_needed;
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<Sample> expand_corpus(const std::vector<AnnotatedConversation>& data) {
    std::vector<Sample> out;
    for (const AnnotatedConversation& ac : data) {
        auto samples = expand_turns(ac, ExpandOptions::defaults_for(ac.conversation.source));
        out.insert(out.end(), samples.begin(), samples.end());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Revisions.
// ---------------------------------------------------------------------------

std::vector<Revision> load_revisions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open revision file: " + path);
    std::vector<Revision> out;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trimmed(line).empty()) continue;
        json rec = detail::parse_line(line, line_no);
        Revision r;
        if (!rec.contains("sample_id") || !rec.at("sample_id").is_string()) {
            throw ParseError("revision missing string field 'sample_id'", line_no);
        }
        r.sample_id = rec.at("sample_id").get<std::string>();
        if (!rec.contains("action") || !rec.at("action").is_string()) {
            throw ParseError("revision missing string field 'action'", line_no);
        }
        const std::string action = rec.at("action").get<std::string>();
        if (action == "drop") {
            r.action = RevisionAction::DROP;
        } else if (action == "relabel") {
            r.action = RevisionAction::RELABEL;
            r.value = detail::binary_or_null(rec, "value", line_no);
            if (!r.value) throw ParseError("relabel revision requires 'value' of 0 or 1", line_no);
        } else {
            throw ParseError("revision action must be 'drop' or 'relabel'", line_no);
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<Sample> apply_label_revisions(const std::vector<Sample>& samples,
                                          const std::vector<Revision>& revisions) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < samples.size(); ++i) index.emplace(samples[i].sample_id, i);

    std::vector<std::string> unknown;
    std::unordered_set<std::size_t> dropped;
    std::vector<Sample> out = samples;
    for (const Revision& r : revisions) {
        auto it = index.find(r.sample_id);
        if (it == index.end()) {
            unknown.push_back(r.sample_id);
            continue;
        }
        if (r.action == RevisionAction::DROP) {
            dropped.insert(it->second);
        } else {
            Sample& s = out[it->second];
            s.label = *r.value;
            if (s.phase2_label) s.phase2_label = *r.value;
        }
    }
    if (!unknown.empty()) {
        std::ostringstream msg;
        msg << "revisions reference unknown sample ids:";
        for (const std::string& id : unknown) msg << " '" << id << "'";
        throw IntegrityError(msg.str());
    }
    if (!dropped.empty()) {
        std::vector<Sample> kept;
        kept.reserve(out.size() - dropped.size());
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (!dropped.count(i)) kept.push_back(std::move(out[i]));
        }
        out = std::move(kept);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Splits.
// ---------------------------------------------------------------------------

SplitResult split_dataset(const std::vector<Sample>& samples, const SplitRatios& ratios,
                          std::uint64_t seed) {
    if (samples.size() < 3) {
        throw ConfigError("need at least 3 samples to split, got " +
                          std::to_string(samples.size()));
    }
    const double sum = ratios.train + ratios.valid + ratios.test;
    if (ratios.train <= 0 || ratios.valid <= 0 || ratios.test <= 0) {
        throw ConfigError("split ratios must be positive");
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError("split ratios must sum to 1, got " + std::to_string(sum));
    }
    {
        std::unordered_set<std::string> ids;
        for (const Sample& s : samples) {
            if (!ids.insert(s.sample_id).second) {
                throw IntegrityError("duplicate sample_id '" + s.sample_id + "' in split input");
            }
        }
    }

    // Strata: (label, flipped-flag).
    std::array<std::vector<std::size_t>, 4> strata;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const int key = samples[i].label * 2 + (samples[i].flipped() ? 1 : 0);
        strata[static_cast<std::size_t>(key)].push_back(i);
    }
    for (std::size_t k = 0; k < strata.size(); ++k) {
        Rng rng(mix_seed(seed, k));
        rng.shuffle(strata[k]);
    }

    // Descending stratum size; ties broken by stratum key for determinism.
    std::vector<std::size_t> order = {0, 1, 2, 3};
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (strata[a].size() != strata[b].size()) return strata[a].size() > strata[b].size();
        return a < b;
    });

    const double r[3] = {ratios.train, ratios.valid, ratios.test};
    SplitResult result;
    result.train.name = SplitName::TRAIN;
    result.valid.name = SplitName::VALID;
    result.test.name = SplitName::TEST;
    std::vector<Sample>* buckets[3] = {&result.train.samples, &result.valid.samples,
                                       &result.test.samples};

    std::size_t round_robin = 0;
    for (std::size_t key : order) {
        const std::vector<std::size_t>& members = strata[key];
        if (members.empty()) continue;
        std::size_t counts[3] = {0, 0, 0};
        std::size_t remaining = members.size();
        if (members.size() >= 3) {
            counts[0] = counts[1] = counts[2] = 1;
            remaining -= 3;
        }
        std::size_t assigned = 0;
        for (int b = 0; b < 3; ++b) {
            const auto extra = static_cast<std::size_t>(
                std::floor(r[b] * static_cast<double>(remaining)));
            counts[b] += extra;
            assigned += extra;
        }
        for (std::size_t leftover = remaining - assigned; leftover > 0; --leftover) {
            counts[round_robin % 3] += 1;
            ++round_robin;
        }
        std::size_t cursor = 0;
        for (int b = 0; b < 3; ++b) {
            for (std::size_t j = 0; j < counts[b]; ++j) {
                buckets[b]->push_back(samples[members[cursor++]]);
            }
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Statistics.
// ---------------------------------------------------------------------------

namespace {

std::size_t word_count(const std::string& text) { return textnorm::tokenize(text).size(); }

} // namespace

DatasetStats compute_stats(
    const std::vector<std::pair<std::string, const std::vector<Sample>*>>& named_splits) {
    if (named_splits.empty()) throw ConfigError("compute_stats requires at least one split");
    DatasetStats stats;
    double context_words = 0.0;
    double target_words = 0.0;
    for (const auto& [name, samples] : named_splits) {
        SplitStats ss;
        ss.count = samples->size();
        for (const Sample& s : *samples) {
            ss.toxic_count += static_cast<std::size_t>(s.label == 1);
            target_words += static_cast<double>(word_count(s.target.raw_text));
            for (const Utterance& c : s.context) {
                context_words += static_cast<double>(word_count(c.raw_text));
            }
        }
        ss.toxic_ratio =
            ss.count == 0 ? 0.0 : static_cast<double>(ss.toxic_count) / static_cast<double>(ss.count);
        stats.total += ss.count;
        stats.total_toxic += ss.toxic_count;
        stats.per_split.emplace_back(name, ss);
    }
    if (stats.total == 0) throw ConfigError("compute_stats requires non-empty splits");
    stats.avg_context_len_words = context_words / static_cast<double>(stats.total);
    stats.avg_target_len_words = target_words / static_cast<double>(stats.total);
    return stats;
}

DatasetStats compute_stats(const SplitResult& splits) {
    return compute_stats({{"train", &splits.train.samples},
                          {"valid", &splits.valid.samples},
                          {"test", &splits.test.samples}});
}

FlipAnalysis flip_analysis(const std::vector<Sample>& samples) {
    FlipAnalysis fa;
    for (const Sample& s : samples) {
        if (!s.phase1_label || !s.phase2_label) {
            throw IntegrityError("sample '" + s.sample_id +
                                 "' lacks a phase label required for flip analysis");
        }
        if (*s.phase1_label != *s.phase2_label) {
            ++fa.n_flipped;
            if (*s.phase1_label == 1) {
                ++fa.n_1to0;
            } else {
                ++fa.n_0to1;
            }
        }
    }
    fa.fraction_of_total =
        samples.empty() ? 0.0 : static_cast<double>(fa.n_flipped) / static_cast<double>(samples.size());
    return fa;
}

} // namespace contextox::corpus
