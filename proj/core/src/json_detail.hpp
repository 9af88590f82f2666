#pragma once

// Internal JSON helpers shared by corpus, augmentation and cli sources.
// Not installed; the public surface stays free of the JSON dependency.

#include <json.hpp>

#include "contextox/corpus.hpp"
#include "contextox/errors.hpp"

namespace contextox::corpus::detail {

using nlohmann::json;

json utterance_to_json(const Utterance& u, const TurnLabels& labels);
json sample_to_json(const Sample& s);
Sample sample_from_json(const json& record, long line, const textnorm::NormRules& rules);
json parse_line(const std::string& line, long line_no);

std::optional<int> binary_or_null(const json& j, const char* key, long line);
std::optional<bool> bool_or_null(const json& j, const char* key, long line);

} // namespace contextox::corpus::detail
