#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "novelgraph/corpus.hpp"

namespace novelgraph {

enum class Symmetry { symmetric, asymmetric };

struct RelationalInstance {
    std::string instance_id;  // "<doc>:<index>:<subject>><object>"
    SentenceId sentence;
    std::string subject;
    std::string object;
    std::string inter_text;  // exact bytes between the two character mentions
    bool symmetric = false;
    std::string full_text;  // canonicalized sentence
};

struct CharacterOccurrence {
    std::string id;
    std::size_t begin = 0;
    std::size_t end = 0;
};

// All CHARn tokens of a canonicalized sentence, in order.
std::vector<CharacterOccurrence> character_occurrences(std::string_view text);

std::string make_instance_id(const SentenceId& sentence, std::string_view subject, std::string_view object);

// Keeps sentences with exactly two distinct character ids. The first
// occurrence of each id anchors the pair; the earlier one is the subject.
// The symmetry flag is filled in.
std::vector<RelationalInstance> find_relational(std::span<const Sentence> canonical_sentences);

// Symmetric when the inter-character text, stripped of punctuation, is empty
// or made only of coordination tokens (and, or, nor, ",", "&", with).
Symmetry classify_symmetry(std::string_view inter_text);
Symmetry classify_symmetry(const RelationalInstance& instance);

// Symmetric instances yield both directions; asymmetric ones pass through.
std::vector<RelationalInstance> expand(const RelationalInstance& instance);
// Flat-maps expand() and drops repeated instance ids (first occurrence wins).
std::vector<RelationalInstance> expand_all(std::span<const RelationalInstance> instances);

nlohmann::ordered_json instance_to_json(const RelationalInstance& instance);
RelationalInstance instance_from_json(const nlohmann::json& j);
std::string instances_to_jsonl(std::span<const RelationalInstance> instances);
std::vector<RelationalInstance> instances_from_jsonl(std::string_view jsonl);

}  // namespace novelgraph
