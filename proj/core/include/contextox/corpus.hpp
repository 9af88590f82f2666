#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "contextox/textnorm.hpp"

namespace contextox::corpus {

enum class Source { FBK, BBF, BAD, HQR, HQG, CAD, SYNTHETIC };

std::string to_string(Source s);
Source source_from_string(const std::string& s);

enum class Origin { REAL, SYNTHETIC };

std::string to_string(Origin o);
Origin origin_from_string(const std::string& s);

/// Augmentation setup a synthetic sample was produced under. The assigned
/// label is a pure function of the setup (see assigned_label).
enum class AugSetup { BALANCE, FLIP_10_TARGET, FLIP_01_TARGET, FLIP_CONTEXT };

std::string to_string(AugSetup s);
AugSetup aug_setup_from_string(const std::string& s);
int assigned_label(AugSetup setup);

/// One conversation turn.
struct Utterance {
    std::string speaker_id;
    std::string raw_text;
    std::string norm_text; // filled by textnorm at load time
    int position = 0;      // 0-based, contiguous within the conversation
};

struct Conversation {
    std::string conversation_id;
    Source source = Source::SYNTHETIC;
    std::vector<Utterance> utterances;

    std::size_t size() const { return utterances.size(); }
};

/// Per-turn annotation carried by the canonical JSONL schema.
struct TurnLabels {
    std::optional<int> label;
    std::optional<int> phase1_label;
    std::optional<int> phase2_label;
    std::optional<bool> context_needed;
};

struct AnnotatedConversation {
    Conversation conversation;
    std::vector<TurnLabels> labels; // parallel to conversation.utterances
};

/// One classification unit: a target utterance plus its chronological
/// context.
struct Sample {
    std::string sample_id;
    Source source = Source::SYNTHETIC;
    std::vector<Utterance> context; // chronological, possibly empty
    Utterance target;
    int label = 0; // 0 non-toxic, 1 toxic
    std::optional<int> phase1_label;
    std::optional<int> phase2_label;
    std::optional<bool> context_needed;
    Origin origin = Origin::REAL;
    std::optional<AugSetup> aug_setup;

    /// Both phase labels present and unequal.
    bool flipped() const {
        return phase1_label && phase2_label && *phase1_label != *phase2_label;
    }
};

enum class SplitName { TRAIN, VALID, TEST };

std::string to_string(SplitName n);

struct DatasetSplit {
    SplitName name = SplitName::TRAIN;
    std::vector<Sample> samples;
};

struct SplitStats {
    std::size_t count = 0;
    std::size_t toxic_count = 0;
    double toxic_ratio = 0.0;
};

/// Dataset statistics in the layout of the standard per-dataset summary:
/// per-split counts and toxic ratios, plus dataset-level average context and
/// target lengths in whitespace words of the raw text.
struct DatasetStats {
    std::vector<std::pair<std::string, SplitStats>> per_split;
    double avg_context_len_words = 0.0;
    double avg_target_len_words = 0.0;
    std::size_t total = 0;
    std::size_t total_toxic = 0;
};

struct FlipAnalysis {
    std::size_t n_flipped = 0;
    std::size_t n_1to0 = 0;
    std::size_t n_0to1 = 0;
    double fraction_of_total = 0.0;
};

// ---------------------------------------------------------------------------
// Ingestion. Canonical conversation JSONL, one record per line:
//   {"conversation_id": str, "source": str,
//    "utterances": [{"speaker": str, "text": str, "label": 0|1|null,
//                    "phase1_label": 0|1|null, "phase2_label": 0|1|null,
//                    "context_needed": true|false|null}]}
// Sample records reuse the same schema with the final utterance as the
// target and add "origin" (plus optional "aug_setup"/"provenance").
// ---------------------------------------------------------------------------

/// Loads canonical conversation JSONL. Malformed records raise ParseError
/// with the line number; duplicate conversation ids raise IntegrityError.
/// When expected_source is set, records must carry no conflicting source.
std::vector<AnnotatedConversation> load_dataset(
    const std::string& path, std::optional<Source> expected_source = std::nullopt,
    const textnorm::NormRules& rules = textnorm::NormRules::defaults());

std::vector<AnnotatedConversation> load_dataset_stream(
    std::istream& in, std::optional<Source> expected_source,
    const textnorm::NormRules& rules, const std::string& origin_name);

void write_dataset(const std::string& path, const std::vector<AnnotatedConversation>& data);

/// Loads a sample-per-line file (canonical schema with "origin").
std::vector<Sample> load_samples(
    const std::string& path,
    const textnorm::NormRules& rules = textnorm::NormRules::defaults());

void write_samples(const std::string& path, const std::vector<Sample>& samples);

/// True when the file's records carry an "origin" field, i.e. they are
/// sample records rather than raw conversations.
bool looks_like_sample_file(const std::string& path);

// ---------------------------------------------------------------------------
// Turn expansion.
// ---------------------------------------------------------------------------

struct ExpandOptions {
    int min_turn = 1;       // first position eligible as target
    bool last_only = false; // target is the final utterance only
    static ExpandOptions defaults_for(Source source);
};

/// Expands a conversation into per-turn samples: for every position
/// i >= min_turn the utterance becomes the target and utterances 0..i-1 its
/// context, labelled labels[i]. Labels must cover every utterance.
std::vector<Sample> expand_turns(const Conversation& conv, const std::vector<int>& labels,
                                 const ExpandOptions& opts = {});

/// Expansion from an annotated conversation; targets must carry a label.
std::vector<Sample> expand_turns(const AnnotatedConversation& conv, const ExpandOptions& opts);

/// Expands a whole corpus using per-source default options.
std::vector<Sample> expand_corpus(const std::vector<AnnotatedConversation>& data);

// ---------------------------------------------------------------------------
// Label revisions (drop arbitrary-label samples, correct phase-2 errors).
// ---------------------------------------------------------------------------

enum class RevisionAction { DROP, RELABEL };

struct Revision {
    std::string sample_id;
    RevisionAction action = RevisionAction::DROP;
    std::optional<int> value; // required for RELABEL
};

std::vector<Revision> load_revisions(const std::string& path);

/// DROP removes the sample; RELABEL sets label (and phase2_label when
/// present) to the revision value. Unknown sample ids raise IntegrityError
/// listing every offender.
std::vector<Sample> apply_label_revisions(const std::vector<Sample>& samples,
                                          const std::vector<Revision>& revisions);

// ---------------------------------------------------------------------------
// Splitting and statistics.
// ---------------------------------------------------------------------------

struct SplitRatios {
    double train = 0.8;
    double valid = 0.1;
    double test = 0.1;
};

struct SplitResult {
    DatasetSplit train;
    DatasetSplit valid;
    DatasetSplit test;
};

/// Deterministic stratified split over (label, flipped-flag) strata. Every
/// stratum with at least 3 members is represented in each split; remainders
/// are assigned round-robin over strata in descending size order.
SplitResult split_dataset(const std::vector<Sample>& samples, const SplitRatios& ratios,
                          std::uint64_t seed);

DatasetStats compute_stats(
    const std::vector<std::pair<std::string, const std::vector<Sample>*>>& named_splits);
DatasetStats compute_stats(const SplitResult& splits);

/// Counts phase-1 -> phase-2 label changes. Every sample must carry both
/// phase labels.
FlipAnalysis flip_analysis(const std::vector<Sample>& samples);

} // namespace contextox::corpus
