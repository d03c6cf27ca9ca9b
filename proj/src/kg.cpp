#include "novelgraph/kg.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <tuple>

#include "novelgraph/text.hpp"

namespace novelgraph {

const Node* KnowledgeGraph::find_node(std::string_view id) const {
    for (const auto& n : nodes) {
        if (n.id == id) return &n;
    }
    return nullptr;
}

std::size_t KnowledgeGraph::total_weight() const {
    std::size_t total = 0;
    for (const auto& e : edges) total += e.weight;
    return total;
}

namespace {

struct IdLess {
    bool operator()(const std::string& a, const std::string& b) const { return text::character_id_less(a, b); }
};

}  // namespace

KnowledgeGraph build_graph(std::span<const RelationalInstance> instances, const ClusterAssignment& assignment,
                           std::span<const RelationLabel> labels, const AliasTable& aliases) {
    if (instances.size() != assignment.labels.size())
        throw std::invalid_argument("assignment does not cover the relational instances");
    std::map<std::size_t, std::string> label_of;
    for (const auto& l : labels) label_of[l.cluster_id] = l.label;

    KnowledgeGraph graph;
    std::map<std::tuple<std::string, std::string, std::string>, Triplet> merged;
    std::set<std::string, IdLess> endpoints;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const int cluster = assignment.labels[i];
        if (cluster == kNoise) {
            ++graph.noise;
            continue;
        }
        const auto it = label_of.find(static_cast<std::size_t>(cluster));
        if (it == label_of.end()) throw std::invalid_argument("cluster " + std::to_string(cluster) + " has no label");
        const auto& inst = instances[i];
        if (inst.subject == inst.object) throw std::invalid_argument("self relation in " + inst.instance_id);
        auto& t = merged[{inst.subject, it->second, inst.object}];
        t.subject = inst.subject;
        t.relation = it->second;
        t.object = inst.object;
        t.provenance.push_back({inst.sentence.str(), inst.instance_id});
        t.weight = t.provenance.size();
        endpoints.insert(inst.subject);
        endpoints.insert(inst.object);
    }
    for (auto& [key, t] : merged) graph.edges.push_back(std::move(t));
    for (const auto& id : endpoints) {
        Node n{id, id, {}};
        if (const auto* c = aliases.find_id(id)) {
            n.name = c->canonical;
            n.aliases = c->aliases;
        }
        graph.nodes.push_back(std::move(n));
    }
    return graph;
}

std::vector<std::vector<std::string>> connected_components(const KnowledgeGraph& graph) {
    std::map<std::string, std::size_t> index;
    for (const auto& n : graph.nodes) index.emplace(n.id, index.size());
    std::vector<std::size_t> parent(index.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& e : graph.edges) {
        const auto a = find(index.at(e.subject));
        const auto b = find(index.at(e.object));
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    std::map<std::size_t, std::vector<std::string>> groups;
    for (const auto& [id, i] : index) groups[find(i)].push_back(id);
    std::vector<std::vector<std::string>> out;
    for (auto& [root, members] : groups) {
        std::sort(members.begin(), members.end(),
                  [](const std::string& a, const std::string& b) { return text::character_id_less(a, b); });
        out.push_back(std::move(members));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return text::character_id_less(a.front(), b.front()); });
    return out;
}

GraphFormat parse_format(std::string_view name) {
    if (name == "triples-tsv" || name == "tsv") return GraphFormat::tsv;
    if (name == "json") return GraphFormat::json;
    if (name == "dot") return GraphFormat::dot;
    throw std::invalid_argument("unknown graph format: " + std::string(name));
}

std::string to_tsv(const KnowledgeGraph& graph) {
    std::vector<std::string> rows;
    for (const auto& e : graph.edges) {
        rows.push_back(e.subject + '\t' + e.relation + '\t' + e.object + '\t' + std::to_string(e.weight));
    }
    std::sort(rows.begin(), rows.end());
    std::string out = "subject\trelation\tobject\tweight\n";
    for (const auto& r : rows) out += r + '\n';
    return out;
}

namespace {

std::string dot_quote(std::string_view s) {
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + '"';
}

}  // namespace

std::string to_dot(const KnowledgeGraph& graph) {
    std::string out = "digraph kg {\n";
    for (const auto& n : graph.nodes) out += "  " + dot_quote(n.id) + " [label=" + dot_quote(n.name) + "];\n";
    for (const auto& e : graph.edges) {
        out += "  " + dot_quote(e.subject) + " -> " + dot_quote(e.object) + " [label=" + dot_quote(e.relation) +
               ", weight=" + std::to_string(e.weight) + "];\n";
    }
    return out + "}\n";
}

nlohmann::ordered_json to_json(const KnowledgeGraph& graph) {
    nlohmann::ordered_json j;
    j["nodes"] = nlohmann::ordered_json::array();
    for (const auto& n : graph.nodes) {
        nlohmann::ordered_json node;
        node["id"] = n.id;
        node["name"] = n.name;
        node["aliases"] = n.aliases;
        j["nodes"].push_back(std::move(node));
    }
    j["edges"] = nlohmann::ordered_json::array();
    for (const auto& e : graph.edges) {
        nlohmann::ordered_json edge;
        edge["subject"] = e.subject;
        edge["relation"] = e.relation;
        edge["object"] = e.object;
        edge["weight"] = e.weight;
        edge["provenance"] = nlohmann::ordered_json::array();
        for (const auto& p : e.provenance) edge["provenance"].push_back({{"sentence", p.sentence}, {"instance", p.instance_id}});
        j["edges"].push_back(std::move(edge));
    }
    j["noise"] = graph.noise;
    return j;
}

KnowledgeGraph graph_from_json(const nlohmann::json& j) {
    KnowledgeGraph g;
    for (const auto& n : j.at("nodes")) {
        g.nodes.push_back({n.at("id").get<std::string>(), n.at("name").get<std::string>(),
                           n.at("aliases").get<std::vector<std::string>>()});
    }
    for (const auto& e : j.at("edges")) {
        Triplet t;
        t.subject = e.at("subject").get<std::string>();
        t.relation = e.at("relation").get<std::string>();
        t.object = e.at("object").get<std::string>();
        for (const auto& p : e.at("provenance")) {
            t.provenance.push_back({p.at("sentence").get<std::string>(), p.at("instance").get<std::string>()});
        }
        t.weight = e.at("weight").get<std::size_t>();
        if (t.weight != t.provenance.size()) throw std::invalid_argument("edge weight does not match its provenance");
        if (g.find_node(t.subject) == nullptr || g.find_node(t.object) == nullptr)
            throw std::invalid_argument("edge endpoint missing from nodes");
        g.edges.push_back(std::move(t));
    }
    g.noise = j.value("noise", std::size_t{0});
    return g;
}

std::string export_graph(const KnowledgeGraph& graph, GraphFormat format) {
    switch (format) {
        case GraphFormat::tsv:
            return to_tsv(graph);
        case GraphFormat::json:
            return to_json(graph).dump(2) + "\n";
        case GraphFormat::dot:
            return to_dot(graph);
    }
    return {};
}

}  // namespace novelgraph
