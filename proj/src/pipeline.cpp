#include "novelgraph/pipeline.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <sstream>

#include "novelgraph/embeddings.hpp"
#include "novelgraph/text.hpp"

namespace novelgraph {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::array<std::pair<Stage, const char*>, 7> kStages{{
    {Stage::corpus, "corpus"},
    {Stage::entities, "entities"},
    {Stage::relations, "relations"},
    {Stage::embeddings, "embeddings"},
    {Stage::clustering, "clustering"},
    {Stage::labeling, "labeling"},
    {Stage::kg, "kg"},
}};

}  // namespace

std::string to_string(Stage stage) {
    for (const auto& [s, name] : kStages) {
        if (s == stage) return name;
    }
    return "unknown";
}

Stage parse_stage(std::string_view name) {
    for (const auto& [s, n] : kStages) {
        if (name == n) return s;
    }
    throw ConfigError("unknown stage: " + std::string(name));
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArtifactError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

// ---- configuration ----

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return (path.is_absolute() ? path : base / path).lexically_normal();
}

std::optional<fs::path> optional_path(const json& j, const char* key, const fs::path& base) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return resolve(base, j[key].get<std::string>());
}

std::optional<ProviderSpec> optional_provider(const json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return ProviderSpec::parse(j[key].get<std::string>());
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
    for (const auto& [key, _] : j.items()) {
        if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
            throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

json provider_json(const std::optional<ProviderSpec>& spec) { return spec ? json(spec->str()) : json(nullptr); }

json path_json(const std::optional<fs::path>& p) { return p ? json(p->string()) : json(nullptr); }

}  // namespace

PipelineConfig PipelineConfig::from_json(const json& j, const fs::path& base_dir) {
    PipelineConfig c;
    try {
        if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
        reject_unknown(j,
                       {"inputs", "output_dir", "dealias", "alias_overrides", "gazetteer", "tagger", "embedding",
                        "clustering", "summarization", "classifier"},
                       "configuration");
        for (const auto& p : j.at("inputs")) c.inputs.push_back(resolve(base_dir, p.get<std::string>()));
        c.output_dir = j.contains("output_dir") && !j["output_dir"].is_null()
                           ? resolve(base_dir, j["output_dir"].get<std::string>())
                           : base_dir.lexically_normal();
        if (j.contains("dealias")) {
            const auto& d = j["dealias"];
            reject_unknown(d, {"epsilon", "min_pts", "attach_threshold"}, "dealias");
            c.dealias.epsilon = d.value("epsilon", c.dealias.epsilon);
            c.dealias.min_pts = d.value("min_pts", c.dealias.min_pts);
            c.dealias.attach_threshold = d.value("attach_threshold", c.dealias.attach_threshold);
        }
        c.alias_overrides = optional_path(j, "alias_overrides", base_dir);
        c.gazetteer = optional_path(j, "gazetteer", base_dir);
        c.tagger = optional_provider(j, "tagger");
        if (j.contains("embedding")) {
            const auto& e = j["embedding"];
            reject_unknown(e, {"provider", "cache_dir", "batch_size", "timeout_ms"}, "embedding");
            if (e.contains("provider")) c.embedding = ProviderSpec::parse(e["provider"].get<std::string>());
            c.embedding_cache = optional_path(e, "cache_dir", base_dir);
            c.batch_size = e.value("batch_size", c.batch_size);
            if (e.contains("timeout_ms")) c.embedding.timeout = std::chrono::milliseconds(e["timeout_ms"].get<long long>());
        }
        if (j.contains("clustering")) {
            const auto& k = j["clustering"];
            reject_unknown(k, {"algorithm", "k", "eps", "min_pts", "metric", "seed", "k_grid", "eps_sweep", "sweep_min_pts"},
                           "clustering");
            auto& cc = c.clustering;
            if (k.contains("algorithm")) cc.algorithm = parse_algorithm(k["algorithm"].get<std::string>());
            cc.k = k.value("k", cc.k);
            cc.eps = k.value("eps", cc.eps);
            cc.min_pts = k.value("min_pts", cc.min_pts);
            if (k.contains("metric")) cc.metric = parse_metric(k["metric"].get<std::string>());
            cc.seed = k.value("seed", cc.seed);
            cc.k_grid = k.value("k_grid", cc.k_grid);
            cc.eps_sweep = k.value("eps_sweep", cc.eps_sweep);
            cc.sweep_min_pts = k.value("sweep_min_pts", cc.sweep_min_pts);
        }
        if (j.contains("summarization")) {
            reject_unknown(j["summarization"], {"provider"}, "summarization");
            c.summarizer = optional_provider(j["summarization"], "provider");
        }
        if (j.contains("classifier")) {
            reject_unknown(j["classifier"], {"tau"}, "classifier");
            c.tau = j["classifier"].value("tau", c.tau);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid configuration: ") + e.what());
    }
    c.validate();
    return c;
}

PipelineConfig PipelineConfig::load(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot read configuration " + file.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("configuration is not valid JSON: " + std::string(e.what()));
    }
    return from_json(j, fs::absolute(file).parent_path());
}

void PipelineConfig::validate() const {
    if (inputs.empty()) throw ConfigError("no input documents configured");
    try {
        dealias.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (batch_size == 0) throw ConfigError("embedding batch_size must be positive");
    const auto& cc = clustering;
    if (cc.algorithm == Algorithm::kmeans && cc.k == 0) throw ConfigError("clustering k must be positive");
    if (cc.algorithm == Algorithm::dbscan && !(cc.eps > 0.0)) throw ConfigError("clustering eps must be positive");
    if (cc.min_pts == 0 || cc.sweep_min_pts == 0) throw ConfigError("min_pts must be at least 1");
    for (const auto k : cc.k_grid) {
        if (k < 2) throw ConfigError("k_grid values must be at least 2");
    }
    for (const auto e : cc.eps_sweep) {
        if (!(e > 0.0)) throw ConfigError("eps_sweep values must be positive");
    }
    if (!(tau >= 0.0)) throw ConfigError("classifier tau must be non-negative");
}

ordered_json PipelineConfig::to_json() const {
    ordered_json j;
    j["inputs"] = ordered_json::array();
    for (const auto& p : inputs) j["inputs"].push_back(p.string());
    j["dealias"] = {{"epsilon", dealias.epsilon}, {"min_pts", dealias.min_pts}, {"attach_threshold", dealias.attach_threshold}};
    j["alias_overrides"] = path_json(alias_overrides);
    j["gazetteer"] = path_json(gazetteer);
    j["tagger"] = provider_json(tagger);
    j["embedding"] = {{"provider", embedding.str()},
                      {"cache_dir", path_json(embedding_cache)},
                      {"batch_size", batch_size},
                      {"timeout_ms", embedding.timeout.count()}};
    const auto& cc = clustering;
    j["clustering"] = {{"algorithm", to_string(cc.algorithm)},
                       {"k", cc.k},
                       {"eps", cc.eps},
                       {"min_pts", cc.min_pts},
                       {"metric", to_string(cc.metric)},
                       {"seed", cc.seed},
                       {"k_grid", cc.k_grid},
                       {"eps_sweep", cc.eps_sweep},
                       {"sweep_min_pts", cc.sweep_min_pts}};
    j["summarization"] = {{"provider", provider_json(summarizer)}};
    j["classifier"] = {{"tau", tau}};
    return j;
}

// ---- artifact serialization ----

namespace {

ordered_json selection_json(const KSelection& s) {
    ordered_json j;
    j["grid"] = s.grid;
    j["scores"] = s.scores;
    j["best_k"] = s.k;
    j["monotone"] = s.monotone;
    return j;
}

ordered_json sweep_json(const std::vector<SweepPoint>& sweep) {
    ordered_json arr = ordered_json::array();
    for (const auto& p : sweep) {
        ordered_json j;
        j["eps"] = p.eps;
        j["clusters"] = p.clusters;
        j["singleton_clusters"] = p.singleton_clusters;
        j["largest_cluster"] = p.largest_cluster;
        j["noise"] = p.noise;
        j["singleton_fraction"] = p.singleton_fraction;
        arr.push_back(std::move(j));
    }
    return arr;
}

}  // namespace

ordered_json ClusteringDiagnostics::to_json() const {
    ordered_json j;
    j["distinct_points"] = distinct_points;
    j["requested_k"] = requested_k;
    j["k_selection"] = selection ? selection_json(*selection) : ordered_json(nullptr);
    j["k_selection_used"] = selection_used;
    j["eps_sweep"] = sweep_json(sweep);
    j["silhouette"] = silhouette ? ordered_json(*silhouette) : ordered_json(nullptr);
    return j;
}

ClusteringDiagnostics ClusteringDiagnostics::from_json(const json& j) {
    ClusteringDiagnostics d;
    d.distinct_points = j.at("distinct_points").get<std::size_t>();
    d.requested_k = j.at("requested_k").get<std::size_t>();
    if (!j.at("k_selection").is_null()) {
        const auto& s = j["k_selection"];
        KSelection sel;
        sel.grid = s.at("grid").get<std::vector<std::size_t>>();
        sel.scores = s.at("scores").get<std::vector<double>>();
        sel.k = s.at("best_k").get<std::size_t>();
        sel.monotone = s.at("monotone").get<bool>();
        d.selection = sel;
    }
    d.selection_used = j.at("k_selection_used").get<bool>();
    for (const auto& p : j.at("eps_sweep")) {
        SweepPoint sp;
        sp.eps = p.at("eps").get<double>();
        sp.clusters = p.at("clusters").get<std::size_t>();
        sp.singleton_clusters = p.at("singleton_clusters").get<std::size_t>();
        sp.largest_cluster = p.at("largest_cluster").get<std::size_t>();
        sp.noise = p.at("noise").get<std::size_t>();
        sp.singleton_fraction = p.at("singleton_fraction").get<double>();
        d.sweep.push_back(sp);
    }
    if (!j.at("silhouette").is_null()) d.silhouette = j["silhouette"].get<double>();
    return d;
}

ordered_json clusters_to_json(const ClusterSet& clusters) {
    ordered_json j;
    j["clusters"] = ordered_json::array();
    for (const auto& c : clusters.clusters) {
        ordered_json cj;
        cj["cluster_id"] = c.cluster_id;
        cj["size"] = c.members.size();
        cj["medoid"] = c.medoid;
        cj["members"] = c.members;
        cj["centroid"] = c.centroid.values;
        j["clusters"].push_back(std::move(cj));
    }
    j["noise"] = clusters.noise;
    return j;
}

ClusterSet clusters_from_json(const json& j) {
    ClusterSet out;
    for (const auto& cj : j.at("clusters")) {
        RelationCluster c;
        c.cluster_id = cj.at("cluster_id").get<std::size_t>();
        c.medoid = cj.at("medoid").get<std::string>();
        c.members = cj.at("members").get<std::vector<std::string>>();
        c.centroid = Vector(cj.at("centroid").get<std::vector<double>>());
        out.clusters.push_back(std::move(c));
    }
    out.noise = j.at("noise").get<std::vector<std::string>>();
    return out;
}

ordered_json summaries_to_json(std::span<const ClusterSummary> summaries, std::span<const RelationLabel> labels) {
    ordered_json arr = ordered_json::array();
    for (std::size_t i = 0; i < summaries.size(); ++i) {
        const auto& s = summaries[i];
        const auto& l = labels[i];
        ordered_json j;
        j["cluster_id"] = s.cluster_id;
        j["label"] = l.label;
        j["lemmas"] = l.lemmas;
        j["unlabeled"] = l.unlabeled;
        j["summary"] = s.text;
        j["summary_source"] = to_string(s.source);
        j["source_instance_id"] = s.source_instance_id;
        j["fallback_reason"] = s.fallback_reason ? ordered_json(*s.fallback_reason) : ordered_json(nullptr);
        arr.push_back(std::move(j));
    }
    return arr;
}

void summaries_from_json(const json& j, std::vector<ClusterSummary>& summaries, std::vector<RelationLabel>& labels) {
    for (const auto& e : j) {
        ClusterSummary s;
        s.cluster_id = e.at("cluster_id").get<std::size_t>();
        s.text = e.at("summary").get<std::string>();
        s.source = e.at("summary_source").get<std::string>() == "provider" ? SummarySource::provider : SummarySource::medoid;
        s.source_instance_id = e.at("source_instance_id").get<std::string>();
        if (!e.at("fallback_reason").is_null()) s.fallback_reason = e["fallback_reason"].get<std::string>();
        RelationLabel l;
        l.cluster_id = s.cluster_id;
        l.label = e.at("label").get<std::string>();
        l.lemmas = e.at("lemmas").get<std::vector<std::string>>();
        l.unlabeled = e.at("unlabeled").get<bool>();
        summaries.push_back(std::move(s));
        labels.push_back(std::move(l));
    }
}

// ---- report ----

std::string RunReport::summary_line() const {
    return std::to_string(relational_sentences) + " suitable sentences out of " + std::to_string(sentences) +
           ", grouped in " + std::to_string(clusters) + " clusters";
}

ordered_json RunReport::to_json() const {
    ordered_json j;
    j["run_id"] = run_id;
    j["summary"] = summary_line();
    j["documents"] = documents;
    j["sentences"] = sentences;
    j["characters"] = characters;
    j["relational_sentences"] = relational_sentences;
    j["symmetric_sentences"] = symmetric_sentences;
    j["instances"] = instances;
    j["embedding_dim"] = embedding_dim;
    j["algorithm"] = algorithm;
    j["metric"] = metric;
    j["clusters"] = clusters;
    j["singleton_clusters"] = singleton_clusters;
    j["singleton_fraction"] = singleton_fraction;
    j["noise"] = noise;
    j["diagnostics"] = diagnostics.to_json();
    j["labeled_clusters"] = labeled_clusters;
    j["unlabeled_clusters"] = unlabeled_clusters;
    j["edges"] = edges;
    j["total_weight"] = total_weight;
    j["components"] = components;
    j["warnings"] = warnings;
    return j;
}

namespace {

struct RunState {
    PipelineConfig config;
    std::vector<Sentence> sentences;
    AliasTable aliases;
    std::vector<Sentence> canonical;
    std::vector<RelationalInstance> instances;
    std::vector<EmbeddedSentence> embedded;
    ClusterAssignment assignment;
    ClusterSet clusters;
    ClusteringDiagnostics diagnostics;
    std::vector<ClusterSummary> summaries;
    std::vector<RelationLabel> labels;
    KnowledgeGraph graph;
};

std::string run_id_of(const RunState& s) {
    auto h = text::fnv1a64(s.config.to_json().dump());
    h = text::fnv1a64(sentences_to_tsv(s.sentences), h);
    return text::hex64(h);
}

// Everything here is derived from artifacts so a report can be rebuilt later.
RunReport make_report(const RunState& s) {
    RunReport r;
    r.run_id = run_id_of(s);
    std::set<std::string> docs;
    for (const auto& sent : s.sentences) docs.insert(sent.id.doc_id);
    r.documents = docs.size();
    r.sentences = s.sentences.size();
    r.characters = s.aliases.characters.size();
    std::set<SentenceId> relational;
    std::set<SentenceId> symmetric;
    for (const auto& inst : s.instances) {
        relational.insert(inst.sentence);
        if (inst.symmetric) symmetric.insert(inst.sentence);
    }
    r.relational_sentences = relational.size();
    r.symmetric_sentences = symmetric.size();
    r.instances = s.instances.size();
    r.embedding_dim = s.embedded.empty() ? 0 : s.embedded.front().vector.dim();
    r.algorithm = to_string(s.assignment.algorithm);
    r.metric = to_string(s.assignment.metric);
    r.clusters = s.assignment.k;
    const auto sizes = s.assignment.cluster_sizes();
    r.singleton_clusters = static_cast<std::size_t>(std::count(sizes.begin(), sizes.end(), std::size_t{1}));
    r.singleton_fraction = singleton_fraction(s.assignment);
    r.noise = s.assignment.noise_count();
    r.diagnostics = s.diagnostics;
    for (const auto& l : s.labels) (l.unlabeled ? r.unlabeled_clusters : r.labeled_clusters)++;
    r.edges = s.graph.edges.size();
    r.total_weight = s.graph.total_weight();
    r.components = connected_components(s.graph);

    auto& w = r.warnings;
    if (s.instances.empty()) w.push_back("no relational sentences found; the graph is empty");
    std::size_t empty_vectors = 0;
    for (const auto& e : s.embedded) {
        if (norm(e.vector) == 0.0) ++empty_vectors;
    }
    if (empty_vectors > 0) w.push_back(std::to_string(empty_vectors) + " sentences produced no embedding features");
    const auto& d = s.diagnostics;
    if (s.assignment.algorithm == Algorithm::kmeans && d.requested_k > s.assignment.k && !d.selection_used && !s.instances.empty())
        w.push_back("k = " + std::to_string(d.requested_k) + " exceeds the " + std::to_string(d.distinct_points) +
                    " distinct embeddings; using k = " + std::to_string(s.assignment.k));
    if (d.selection && d.selection->monotone)
        w.push_back("silhouette scores are monotone over the k grid; keeping the configured k");
    if (r.clusters > 0 && r.singleton_fraction > 0.5)
        w.push_back(std::to_string(r.singleton_clusters) + " of " + std::to_string(r.clusters) +
                    " clusters are single-sentence clusters");
    for (const auto& p : d.sweep) {
        if (p.singleton_fraction > 0.5) {
            w.push_back("eps sweep: more than half of the clusters are single-sentence clusters at eps = " +
                        ordered_json(p.eps).dump());
            break;
        }
    }
    for (const auto& sum : s.summaries) {
        if (sum.fallback_reason)
            w.push_back("cluster " + std::to_string(sum.cluster_id) + ": summarizer failed, used medoid (" +
                        *sum.fallback_reason + ")");
    }
    if (r.unlabeled_clusters > 0)
        w.push_back(std::to_string(r.unlabeled_clusters) + " clusters have no verb label and need annotation");
    return r;
}

std::vector<std::string> instance_ids(const std::vector<RelationalInstance>& instances) {
    std::vector<std::string> ids;
    ids.reserve(instances.size());
    for (const auto& i : instances) ids.push_back(i.instance_id);
    return ids;
}

json read_json(const fs::path& p) {
    const auto content = read_file(p);
    try {
        return json::parse(content);
    } catch (const json::parse_error& e) {
        throw ArtifactError("malformed " + p.string() + ": " + e.what());
    }
}

// Loads the artifacts produced by every stage before `upto`.
void load_artifacts(RunState& s, const fs::path& dir, Stage upto) {
    auto need = [&](const char* name) {
        const auto p = dir / name;
        if (!fs::exists(p)) throw ArtifactError("missing artifact " + p.string());
        return p;
    };
    if (upto > Stage::corpus) s.sentences = sentences_from_tsv(read_file(need(artifact::sentences)));
    if (upto > Stage::entities) {
        s.aliases = AliasTable::from_json(read_json(need(artifact::aliases)));
        s.canonical = sentences_from_tsv(read_file(need(artifact::canonical)));
    }
    if (upto > Stage::relations) s.instances = instances_from_jsonl(read_file(need(artifact::instances)));
    if (upto > Stage::embeddings) s.embedded = embedded_from_jsonl(read_file(need(artifact::embeddings)));
    if (upto > Stage::clustering) {
        s.assignment = assignment_from_json(read_json(need(artifact::assignment)), instance_ids(s.instances));
        s.clusters = clusters_from_json(read_json(need(artifact::clusters)));
        s.diagnostics = ClusteringDiagnostics::from_json(read_json(need(artifact::diagnostics)));
    }
    if (upto > Stage::labeling) summaries_from_json(read_json(need(artifact::labels)), s.summaries, s.labels);
    if (upto > Stage::kg) s.graph = graph_from_json(read_json(need(artifact::graph)));
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

// ---- stages ----

void stage_corpus(RunState& s) {
    for (const auto& p : s.config.inputs) {
        if (!fs::exists(p)) throw CorpusError("input not found: " + p.string());
    }
    const auto corpus = load_corpus(s.config.inputs);
    s.sentences = segment_corpus(corpus);
    write_file(s.config.output_dir / artifact::sentences, sentences_to_tsv(s.sentences));
}

void stage_entities(RunState& s) {
    const auto& c = s.config;
    Gazetteer gazetteer;
    if (c.gazetteer) {
        for (const auto& line : text::split(read_file(*c.gazetteer), '\n')) {
            const auto name = text::trim(line);
            if (name.empty() || name.front() == '#') continue;
            for (const auto& w : text::split_whitespace(name)) gazetteer.emplace(w);
        }
    }
    std::unique_ptr<PersonTagger> tagger;
    if (c.tagger) tagger = std::make_unique<WirePersonTagger>(open_channel(*c.tagger));

    std::vector<Mention> mentions;
    if (tagger) {
        for (const auto& sent : s.sentences) {
            auto m = detect_mentions(sent, nullptr, tagger.get());
            mentions.insert(mentions.end(), m.begin(), m.end());
        }
    } else {
        // Names found mid-sentence also count where they open a sentence.
        Gazetteer learned = gazetteer;
        for (const auto& sent : s.sentences) {
            for (const auto& m : detect_mentions(sent, &gazetteer)) {
                for (const auto& w : text::split_whitespace(m.surface)) learned.emplace(w);
            }
        }
        for (const auto& sent : s.sentences) {
            auto m = detect_mentions(sent, &learned);
            mentions.insert(mentions.end(), m.begin(), m.end());
        }
    }

    std::map<std::string, std::size_t> frequency;
    for (const auto& m : mentions) ++frequency[m.surface];
    s.aliases = dealias_surfaces(frequency, c.dealias);
    if (c.alias_overrides) apply_alias_overrides(s.aliases, read_alias_overrides(*c.alias_overrides));
    s.canonical = canonicalize(s.sentences, s.aliases);
    write_file(c.output_dir / artifact::aliases, dump(s.aliases.to_json()));
    write_file(c.output_dir / artifact::canonical, sentences_to_tsv(s.canonical));
}

void stage_relations(RunState& s) {
    s.instances = expand_all(find_relational(s.canonical));
    write_file(s.config.output_dir / artifact::instances, instances_to_jsonl(s.instances));
}

void stage_embeddings(RunState& s) {
    const auto& c = s.config;
    s.embedded.clear();
    if (!s.instances.empty()) {
        auto provider = make_embedding_provider(c.embedding, c.embedding_cache);
        std::vector<std::string> texts;
        texts.reserve(s.instances.size());
        for (const auto& i : s.instances) texts.push_back(i.full_text);
        auto vectors = embed_batch(texts, *provider, c.batch_size);
        for (std::size_t i = 0; i < vectors.size(); ++i) s.embedded.push_back({s.instances[i].instance_id, std::move(vectors[i])});
    }
    write_file(c.output_dir / artifact::embeddings, embedded_to_jsonl(s.embedded));
}

std::size_t count_distinct(const std::vector<Vector>& points, Metric metric) {
    std::set<std::vector<double>> seen;
    for (const auto& p : points) seen.insert(metric == Metric::cosine ? normalized(p).values : p.values);
    return seen.size();
}

void stage_clustering(RunState& s) {
    const auto& cc = s.config.clustering;
    if (s.embedded.size() != s.instances.size()) throw std::runtime_error("embeddings do not match the relational instances");
    std::vector<Vector> points;
    for (const auto& e : s.embedded) points.push_back(e.vector);

    s.diagnostics = {};
    s.diagnostics.requested_k = cc.algorithm == Algorithm::kmeans ? cc.k : 0;
    s.diagnostics.distinct_points = count_distinct(points, cc.metric);
    if (cc.metric == Metric::cosine) {
        for (const auto& p : points) {
            if (norm(p) == 0.0) throw std::domain_error("cosine metric needs non-zero embeddings; use the euclidean metric");
        }
    }

    if (points.empty()) {
        s.assignment = {};
        s.assignment.algorithm = cc.algorithm;
        s.assignment.metric = cc.metric;
        s.assignment.seed = cc.seed;
    } else if (cc.algorithm == Algorithm::kmeans) {
        std::size_t k = std::min(cc.k, s.diagnostics.distinct_points);
        std::vector<std::size_t> grid;
        for (const auto g : cc.k_grid) {
            if (g <= s.diagnostics.distinct_points) grid.push_back(g);
        }
        if (!grid.empty()) {
            s.diagnostics.selection = select_k(points, grid, cc.metric, cc.seed);
            if (!s.diagnostics.selection->monotone) {
                k = s.diagnostics.selection->k;
                s.diagnostics.selection_used = true;
            }
        }
        s.assignment = kmeans(points, k, cc.metric, cc.seed);
    } else {
        s.assignment = dbscan(points, cc.eps, cc.min_pts, cc.metric);
        s.assignment.seed = cc.seed;
    }
    if (!cc.eps_sweep.empty() && !points.empty())
        s.diagnostics.sweep = dbscan_sweep(points, cc.eps_sweep, cc.sweep_min_pts, cc.metric);
    if (s.assignment.k >= 2) s.diagnostics.silhouette = silhouette(points, s.assignment);
    s.clusters = build_clusters(s.assignment, s.embedded);

    const auto& dir = s.config.output_dir;
    write_file(dir / artifact::assignment, dump(assignment_to_json(s.assignment, instance_ids(s.instances))));
    write_file(dir / artifact::clusters, dump(clusters_to_json(s.clusters)));
    write_file(dir / artifact::diagnostics, dump(s.diagnostics.to_json()));
}

void stage_labeling(RunState& s) {
    std::unique_ptr<Summarizer> summarizer;
    if (s.config.summarizer) summarizer = std::make_unique<WireSummarizer>(open_channel(*s.config.summarizer));
    const auto index = index_instances(s.instances);
    s.summaries.clear();
    s.labels.clear();
    for (const auto& cluster : s.clusters.clusters) {
        auto summary = summarize_cluster(cluster, index, summarizer.get());
        s.labels.push_back(extract_label(summary, *index.at(cluster.medoid)));
        s.summaries.push_back(std::move(summary));
    }
    const auto& dir = s.config.output_dir;
    write_file(dir / artifact::labels, dump(summaries_to_json(s.summaries, s.labels)));
    write_file(dir / artifact::labels_tsv, labels_to_tsv(s.labels, s.summaries));
}

void stage_kg(RunState& s) {
    s.graph = build_graph(s.instances, s.assignment, s.labels, s.aliases);
    const auto& dir = s.config.output_dir;
    write_file(dir / artifact::graph, export_graph(s.graph, GraphFormat::json));
    write_file(dir / artifact::triples, export_graph(s.graph, GraphFormat::tsv));
    write_file(dir / artifact::dot, export_graph(s.graph, GraphFormat::dot));
}

void run_stage(Stage stage, RunState& s) {
    try {
        switch (stage) {
            case Stage::corpus:
                return stage_corpus(s);
            case Stage::entities:
                return stage_entities(s);
            case Stage::relations:
                return stage_relations(s);
            case Stage::embeddings:
                return stage_embeddings(s);
            case Stage::clustering:
                return stage_clustering(s);
            case Stage::labeling:
                return stage_labeling(s);
            case Stage::kg:
                return stage_kg(s);
        }
    } catch (const ProviderError& e) {
        throw StageError(stage, e.what(), true);
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what(), false);
    }
}

}  // namespace

RunReport run(const PipelineConfig& config, const RunOptions& options) {
    config.validate();
    RunState s;
    s.config = config;
    fs::create_directories(config.output_dir);
    const Stage first = options.from_stage.value_or(Stage::corpus);
    if (first != Stage::corpus) {
        try {
            load_artifacts(s, config.output_dir, first);
        } catch (const std::exception& e) {
            throw StageError(first, std::string("cannot resume: ") + e.what(), false);
        }
    }
    write_file(config.output_dir / artifact::config, dump(config.to_json()));
    for (const auto& [stage, name] : kStages) {
        if (stage >= first) run_stage(stage, s);
    }
    auto report = make_report(s);
    write_file(config.output_dir / artifact::report, dump(report.to_json()));
    return report;
}

RunReport stats(const fs::path& run_dir) {
    RunState s;
    const auto config_path = run_dir / artifact::config;
    if (!fs::exists(config_path)) throw ArtifactError("missing artifact " + config_path.string());
    try {
        s.config = PipelineConfig::from_json(read_json(config_path), fs::absolute(run_dir));
    } catch (const ConfigError& e) {
        throw ArtifactError(std::string("unusable ") + config_path.string() + ": " + e.what());
    }
    try {
        load_artifacts(s, run_dir, static_cast<Stage>(static_cast<int>(Stage::kg) + 1));
    } catch (const ArtifactError&) {
        throw;
    } catch (const std::exception& e) {
        throw ArtifactError(e.what());
    }
    return make_report(s);
}

}  // namespace novelgraph
