#include "novelgraph/relations.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "novelgraph/text.hpp"

namespace novelgraph {

std::vector<CharacterOccurrence> character_occurrences(std::string_view text) {
    std::vector<CharacterOccurrence> out;
    for (const auto& tok : text::tokenize(text)) {
        const auto w = tok.view(text);
        if (tok.is_word && text::is_character_id(w)) out.push_back({std::string(w), tok.begin, tok.end});
    }
    return out;
}

std::string make_instance_id(const SentenceId& sentence, std::string_view subject, std::string_view object) {
    std::string id = sentence.str();
    id += ':';
    id += subject;
    id += '>';
    id += object;
    return id;
}

std::vector<RelationalInstance> find_relational(std::span<const Sentence> canonical_sentences) {
    std::vector<RelationalInstance> out;
    for (const auto& sentence : canonical_sentences) {
        const auto occurrences = character_occurrences(sentence.text);
        std::vector<const CharacterOccurrence*> firsts;
        for (const auto& occ : occurrences) {
            const bool seen = std::any_of(firsts.begin(), firsts.end(),
                                          [&](const CharacterOccurrence* f) { return f->id == occ.id; });
            if (!seen) firsts.push_back(&occ);
        }
        if (firsts.size() != 2) continue;

        RelationalInstance inst;
        inst.sentence = sentence.id;
        inst.subject = firsts[0]->id;
        inst.object = firsts[1]->id;
        inst.inter_text = sentence.text.substr(firsts[0]->end, firsts[1]->begin - firsts[0]->end);
        inst.full_text = sentence.text;
        inst.instance_id = make_instance_id(inst.sentence, inst.subject, inst.object);
        inst.symmetric = classify_symmetry(inst.inter_text) == Symmetry::symmetric;
        out.push_back(std::move(inst));
    }
    return out;
}

Symmetry classify_symmetry(std::string_view inter_text) {
    static const std::set<std::string, std::less<>> kCoordination{"and", "or", "nor", ",", "&", "with"};
    for (const auto& tok : text::tokenize(inter_text)) {
        const auto w = tok.view(inter_text);
        if (tok.is_word) {
            if (!kCoordination.contains(text::to_lower(w))) return Symmetry::asymmetric;
        }
        // Punctuation, including "," and "&", never breaks symmetry.
    }
    return Symmetry::symmetric;
}

Symmetry classify_symmetry(const RelationalInstance& instance) { return classify_symmetry(instance.inter_text); }

std::vector<RelationalInstance> expand(const RelationalInstance& instance) {
    if (!instance.symmetric) return {instance};
    RelationalInstance reverse = instance;
    std::swap(reverse.subject, reverse.object);
    reverse.instance_id = make_instance_id(reverse.sentence, reverse.subject, reverse.object);
    return {instance, reverse};
}

std::vector<RelationalInstance> expand_all(std::span<const RelationalInstance> instances) {
    std::vector<RelationalInstance> out;
    std::set<std::string> seen;
    for (const auto& inst : instances) {
        for (auto& e : expand(inst)) {
            if (seen.insert(e.instance_id).second) out.push_back(std::move(e));
        }
    }
    return out;
}

nlohmann::ordered_json instance_to_json(const RelationalInstance& instance) {
    nlohmann::ordered_json j;
    j["instance_id"] = instance.instance_id;
    j["doc_id"] = instance.sentence.doc_id;
    j["sentence_index"] = instance.sentence.index;
    j["subject"] = instance.subject;
    j["object"] = instance.object;
    j["inter_text"] = instance.inter_text;
    j["symmetric"] = instance.symmetric;
    j["full_text"] = instance.full_text;
    return j;
}

RelationalInstance instance_from_json(const nlohmann::json& j) {
    RelationalInstance inst;
    inst.instance_id = j.at("instance_id").get<std::string>();
    inst.sentence.doc_id = j.at("doc_id").get<std::string>();
    inst.sentence.index = j.at("sentence_index").get<std::size_t>();
    inst.subject = j.at("subject").get<std::string>();
    inst.object = j.at("object").get<std::string>();
    inst.inter_text = j.at("inter_text").get<std::string>();
    inst.symmetric = j.at("symmetric").get<bool>();
    inst.full_text = j.at("full_text").get<std::string>();
    return inst;
}

std::string instances_to_jsonl(std::span<const RelationalInstance> instances) {
    std::string out;
    for (const auto& inst : instances) {
        out += instance_to_json(inst).dump();
        out += '\n';
    }
    return out;
}

std::vector<RelationalInstance> instances_from_jsonl(std::string_view jsonl) {
    std::vector<RelationalInstance> out;
    for (const auto& line : text::split(jsonl, '\n')) {
        if (text::trim(line).empty()) continue;
        out.push_back(instance_from_json(nlohmann::json::parse(line)));
    }
    return out;
}

}  // namespace novelgraph
