#include "contextox/textnorm.hpp"

namespace contextox::textnorm {

// Bundled 40-entry emoticon table. Mirrors data/emoticons.tsv; the file is
// the overridable form, this is the zero-configuration default.
const std::vector<std::pair<std::string, std::string>>& default_emoticon_table() {
    static const std::vector<std::pair<std::string, std::string>> table = {
        {":)", "<happy>"},      {":-)", "<happy>"},     {"(:", "<happy>"},
        {"=)", "<happy>"},      {":]", "<happy>"},      {"^_^", "<happy>"},
        {":(", "<sad>"},        {":-(", "<sad>"},       {"):", "<sad>"},
        {"=(", "<sad>"},        {":[", "<sad>"},        {":'(", "<cry>"},
        {":'-(", "<cry>"},      {";(", "<cry>"},        {":d", "<laugh>"},
        {":-d", "<laugh>"},     {"=d", "<laugh>"},      {"xd", "<laugh>"},
        {";)", "<wink>"},       {";-)", "<wink>"},      {";d", "<wink>"},
        {":p", "<tongue>"},     {":-p", "<tongue>"},    {"=p", "<tongue>"},
        {":o", "<surprise>"},   {":-o", "<surprise>"},  {"o_o", "<surprise>"},
        {":/", "<annoyed>"},    {":-/", "<annoyed>"},   {":\\", "<annoyed>"},
        {"-_-", "<annoyed>"},   {":|", "<neutral>"},    {":-|", "<neutral>"},
        {":*", "<kiss>"},       {":-*", "<kiss>"},      {"<3", "<heart>"},
        {"</3", "<brokenheart>"}, {"3:)", "<devil>"},   {"o:)", "<angel>"},
        {":s", "<confused>"},
    };
    return table;
}

} // namespace contextox::textnorm
