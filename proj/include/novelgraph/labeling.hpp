#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "novelgraph/clustering.hpp"
#include "novelgraph/provider.hpp"
#include "novelgraph/relations.hpp"

namespace novelgraph {

inline constexpr std::string_view kUnlabeled = "UNLABELED";

enum class SummarySource { medoid, provider };

std::string to_string(SummarySource source);

struct ClusterSummary {
    std::size_t cluster_id = 0;
    std::string text;
    SummarySource source = SummarySource::medoid;
    std::string source_instance_id;              // extractive summaries only
    std::optional<std::string> fallback_reason;  // set when a provider failed
};

class Summarizer {
public:
    virtual ~Summarizer() = default;
    virtual std::string summarize(std::span<const std::string> sentences) = 0;
};

// Op "summarize" over the wire protocol.
class WireSummarizer final : public Summarizer {
public:
    explicit WireSummarizer(std::shared_ptr<WireChannel> channel) : channel_(std::move(channel)) {}
    std::string summarize(std::span<const std::string> sentences) override;

private:
    std::shared_ptr<WireChannel> channel_;
};

using InstanceIndex = std::map<std::string, const RelationalInstance*, std::less<>>;

InstanceIndex index_instances(std::span<const RelationalInstance> instances);

// Member sentences (deduplicated, in member order) go to the summarizer when
// one is given; otherwise, or when it fails, the medoid sentence is used.
ClusterSummary summarize_cluster(const RelationCluster& cluster, const InstanceIndex& instances,
                                 Summarizer* summarizer = nullptr);

struct RelationLabel {
    std::size_t cluster_id = 0;
    std::string label;  // lowercase tokens joined by '_', or kUnlabeled
    std::vector<std::string> lemmas;
    bool unlabeled = false;
};

bool is_verb_lemma(std::string_view word);
bool is_auxiliary(std::string_view word);
bool is_particle(std::string_view word);

// Irregular table first, then suffix rules checked against the verb lexicon.
// Words the rules cannot reduce to a known lemma come back unchanged.
std::string lemmatize(std::string_view word);

// Verb tokens of `phrase` with lemmas, following the label rules: lexicon and
// inflection matches, no verb right after a determiner, auxiliaries dropped
// unless nothing else is left.
struct VerbToken {
    std::string surface;
    std::string lemma;
    std::size_t token_index = 0;  // into text::tokenize(phrase)
};
std::vector<VerbToken> find_verbs(std::string_view phrase);

// Label from the text between the two character ids of the summary, or from
// the instance's inter-character text when the summary does not hold two ids.
RelationLabel extract_label(const ClusterSummary& summary, const RelationalInstance& instance);

// The phrase a label is read from.
std::string label_phrase(const ClusterSummary& summary, const RelationalInstance& instance);

// cluster_id<TAB>label<TAB>summary per line, ordered by cluster id.
std::string labels_to_tsv(std::span<const RelationLabel> labels, std::span<const ClusterSummary> summaries);

struct LabelRow {
    std::size_t cluster_id = 0;
    std::string label;
    std::string summary;
};
std::vector<LabelRow> labels_from_tsv(std::string_view tsv);

}  // namespace novelgraph
