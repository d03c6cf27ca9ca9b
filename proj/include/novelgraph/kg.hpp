#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "novelgraph/clustering.hpp"
#include "novelgraph/entities.hpp"
#include "novelgraph/labeling.hpp"
#include "novelgraph/relations.hpp"

namespace novelgraph {

struct Provenance {
    std::string sentence;  // "doc:index"
    std::string instance_id;

    bool operator==(const Provenance&) const = default;
};

struct Triplet {
    std::string subject;
    std::string relation;
    std::string object;
    std::vector<Provenance> provenance;
    std::size_t weight = 0;  // == provenance.size()
};

struct Node {
    std::string id;  // CHARn
    std::string name;
    std::vector<std::string> aliases;
};

struct KnowledgeGraph {
    std::vector<Node> nodes;      // characters that appear on an edge, by id number
    std::vector<Triplet> edges;   // sorted by (subject, relation, object)
    std::size_t noise = 0;        // instances left out as clustering noise

    const Node* find_node(std::string_view id) const;
    std::size_t total_weight() const;
};

// `labels` must cover every non-noise cluster of `assignment`, whose labels
// are aligned with `instances`.
KnowledgeGraph build_graph(std::span<const RelationalInstance> instances, const ClusterAssignment& assignment,
                           std::span<const RelationLabel> labels, const AliasTable& aliases);

// Undirected components, each sorted by id number, ordered by smallest member.
std::vector<std::vector<std::string>> connected_components(const KnowledgeGraph& graph);

enum class GraphFormat { tsv, json, dot };

// "triples-tsv" (or "tsv"), "json", "dot".
GraphFormat parse_format(std::string_view name);

std::string export_graph(const KnowledgeGraph& graph, GraphFormat format);
std::string to_tsv(const KnowledgeGraph& graph);
std::string to_dot(const KnowledgeGraph& graph);
nlohmann::ordered_json to_json(const KnowledgeGraph& graph);
KnowledgeGraph graph_from_json(const nlohmann::json& j);

}  // namespace novelgraph
