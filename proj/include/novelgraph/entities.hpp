#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "novelgraph/corpus.hpp"
#include "novelgraph/provider.hpp"

namespace novelgraph {

struct Mention {
    SentenceId sentence;
    std::size_t first_token = 0;  // [first_token, last_token) over text::tokenize(sentence.text)
    std::size_t last_token = 0;
    std::size_t begin = 0;        // byte span inside the sentence text
    std::size_t end = 0;
    std::string surface;
};

struct DealiasConfig {
    double epsilon = 0.3;
    std::size_t min_pts = 2;
    double attach_threshold = 0.3;

    // Throws std::invalid_argument when out of range.
    void validate() const;
};

struct Character {
    std::string id;  // CHARn
    std::string canonical;
    std::vector<std::string> aliases;  // sorted
    std::size_t count = 0;             // total mentions over all aliases
};

struct AliasTable {
    std::vector<Character> characters;           // ordered by id number
    std::map<std::string, std::size_t> frequency;  // surface -> occurrences

    // nullptr when the surface is unknown.
    const Character* find_surface(std::string_view surface) const;
    const Character* find_id(std::string_view id) const;
    std::vector<std::string> surfaces() const;

    // {character_id: {canonical, aliases[], count}}
    nlohmann::ordered_json to_json() const;
    static AliasTable from_json(const nlohmann::json& j);
};

// Person tagger behind the provider wire protocol. Returns byte spans of
// person names inside `sentence`.
class PersonTagger {
public:
    virtual ~PersonTagger() = default;
    virtual std::vector<std::pair<std::size_t, std::size_t>> person_spans(std::string_view sentence) = 0;
};

// Tagger served over the provider wire protocol (op "tag").
class WirePersonTagger final : public PersonTagger {
public:
    explicit WirePersonTagger(std::shared_ptr<WireChannel> channel) : channel_(std::move(channel)) {}
    std::vector<std::pair<std::size_t, std::size_t>> person_spans(std::string_view sentence) override;

private:
    std::shared_ptr<WireChannel> channel_;
};

using Gazetteer = std::set<std::string, std::less<>>;

// Built-in rule when `tagger` is null: a token is a person token when it is
// capitalized and not sentence-initial (and not a title/function word), or it
// is a gazetteer hit anywhere, or it opens a sentence directly followed by
// another person token. Maximal runs of person tokens form one mention.
std::vector<Mention> detect_mentions(const Sentence& sentence, const Gazetteer* gazetteer = nullptr,
                                     PersonTagger* tagger = nullptr);

// Unit-cost edit distance over code points divided by the longer length.
double normalized_levenshtein(std::string_view a, std::string_view b);

// Composite alias distance: min of the full-string normalized distance and,
// when the names share tokens (subset) or one has an initial abbreviating a
// token of the other, the normalized distance between their longest tokens.
double name_distance(std::string_view a, std::string_view b);

// Initial letter used to partition surfaces before density clustering.
std::string partition_key(std::string_view surface);

// Density clustering with attachment over distinct surfaces weighted by
// frequency; ids assigned in descending total frequency.
AliasTable dealias_surfaces(const std::map<std::string, std::size_t>& frequency, const DealiasConfig& config);
AliasTable dealias(std::span<const Mention> mentions, const DealiasConfig& config);

// Lines `surface<TAB>CHARn`; blank lines and lines starting with '#' ignored.
std::vector<std::pair<std::string, std::string>> parse_alias_overrides(std::string_view content);
std::vector<std::pair<std::string, std::string>> read_alias_overrides(const std::filesystem::path& path);
// Moves each surface into the named character (creating it when absent).
void apply_alias_overrides(AliasTable& table, std::span<const std::pair<std::string, std::string>> overrides);

// Replaces every alias occurrence on word boundaries with its character id,
// longest surface first.
std::string canonicalize_text(std::string_view text, const AliasTable& table);
std::vector<Sentence> canonicalize(std::span<const Sentence> sentences, const AliasTable& table);

}  // namespace novelgraph
