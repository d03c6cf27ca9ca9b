#include "novelgraph/service.hpp"

#include <algorithm>

#include <httplib.h>

#include "novelgraph/text.hpp"

namespace novelgraph {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

json load_json(const fs::path& p) {
    if (!fs::exists(p)) throw ArtifactError("missing artifact " + p.string());
    return json::parse(read_file(p));
}

}  // namespace

AnnotationService::AnnotationService(const fs::path& run_dir, Options options)
    : run_dir_(run_dir), options_(std::move(options)) {
    config_ = PipelineConfig::from_json(load_json(run_dir / artifact::config), fs::absolute(run_dir));
    report_ = load_json(run_dir / artifact::report);
    run_id_ = report_.at("run_id").get<std::string>();
    aliases_ = AliasTable::from_json(load_json(run_dir / artifact::aliases));
    clusters_ = clusters_from_json(load_json(run_dir / artifact::clusters));
    instances_ = instances_from_jsonl(read_file(run_dir / artifact::instances));
    index_ = index_instances(instances_);
    summaries_from_json(load_json(run_dir / artifact::labels), summaries_, labels_);
    graph_ = graph_from_json(load_json(run_dir / artifact::graph));

    std::map<std::size_t, std::string> automatic;
    for (const auto& l : labels_) automatic[l.cluster_id] = l.label;
    store_ = std::make_unique<AnnotationStore>(options_.annotations_dir.value_or(run_dir / "annotations"), run_id_,
                                               std::move(automatic), options_.clock);
}

AnnotationService::~AnnotationService() { stop(); }

ordered_json AnnotationService::view(const RelationCluster& c, bool with_members) const {
    const auto a = store_->get(c.cluster_id);
    ordered_json j;
    j["cluster_id"] = c.cluster_id;
    j["size"] = c.members.size();
    const auto label = std::find_if(labels_.begin(), labels_.end(), [&](const RelationLabel& l) { return l.cluster_id == c.cluster_id; });
    const auto summary = std::find_if(summaries_.begin(), summaries_.end(), [&](const ClusterSummary& s) { return s.cluster_id == c.cluster_id; });
    j["label"] = label != labels_.end() ? label->label : std::string(kUnlabeled);
    j["lemmas"] = label != labels_.end() ? label->lemmas : std::vector<std::string>{};
    j["unlabeled"] = label == labels_.end() || label->unlabeled;
    j["summary"] = summary != summaries_.end() ? summary->text : std::string();
    j["summary_source"] = summary != summaries_.end() ? to_string(summary->source) : std::string("medoid");
    j["medoid"] = c.medoid;
    j["status"] = to_string(a.status);
    j["final_label"] = a.final_label;
    j["note"] = a.note;
    j["version"] = a.version;
    j["timestamp"] = a.timestamp;
    if (with_members) {
        j["members"] = ordered_json::array();
        for (const auto& id : c.members) {
            const auto& inst = *index_.at(id);
            ordered_json m;
            m["instance_id"] = inst.instance_id;
            m["sentence_id"] = inst.sentence.str();
            m["subject"] = inst.subject;
            m["object"] = inst.object;
            m["text"] = inst.full_text;
            j["members"].push_back(std::move(m));
        }
    }
    return j;
}

ordered_json AnnotationService::list_clusters(std::optional<AnnotationStatus> status, const std::string& sort,
                                              std::size_t page) const {
    if (sort != "cluster_id" && sort != "size") throw std::invalid_argument("sort must be cluster_id or size");
    if (page == 0) throw std::invalid_argument("page numbers start at 1");
    std::vector<const RelationCluster*> selected;
    for (const auto& c : clusters_.clusters) {
        if (!status || store_->get(c.cluster_id).status == *status) selected.push_back(&c);
    }
    if (sort == "size") {
        std::stable_sort(selected.begin(), selected.end(),
                         [](const auto* a, const auto* b) { return a->members.size() > b->members.size(); });
    }
    const auto size = options_.page_size;
    ordered_json j;
    j["run_id"] = run_id_;
    j["total"] = selected.size();
    j["page"] = page;
    j["page_size"] = size;
    j["pages"] = (selected.size() + size - 1) / size;
    j["clusters"] = ordered_json::array();
    for (std::size_t i = (page - 1) * size; i < selected.size() && i < page * size; ++i)
        j["clusters"].push_back(view(*selected[i], true));
    return j;
}

ordered_json AnnotationService::cluster(std::size_t cluster_id) const {
    for (const auto& c : clusters_.clusters) {
        if (c.cluster_id == cluster_id) {
            auto j = view(c, true);
            ordered_json out;
            out["run_id"] = run_id_;
            out["cluster"] = std::move(j);
            return out;
        }
    }
    throw NotFoundError("no cluster " + std::to_string(cluster_id));
}

ordered_json AnnotationService::annotate(std::size_t cluster_id, const json& body) {
    if (!body.is_object() || !body.contains("decision") || !body["decision"].is_string())
        throw std::invalid_argument("body needs a decision: validate, edit or reject");
    const auto decision = parse_decision(body["decision"].get<std::string>());
    std::optional<std::string> label;
    if (body.contains("label") && body["label"].is_string()) label = body["label"].get<std::string>();
    std::optional<std::uint64_t> expected;
    if (body.contains("version") && body["version"].is_number_unsigned()) expected = body["version"].get<std::uint64_t>();
    const auto note = body.contains("note") && body["note"].is_string() ? body["note"].get<std::string>() : std::string();
    const auto r = store_->annotate(cluster_id, decision, label, note, expected);
    ordered_json j;
    j["run_id"] = run_id_;
    j["annotation"] = r.annotation.to_json();
    j["conflict"] = r.conflict;
    j["previous_version"] = r.previous_version;
    return j;
}

std::shared_ptr<const RelationClassifier> AnnotationService::current_classifier() {
    std::lock_guard lock(classifier_mutex_);
    const auto generation = store_->generation();
    if (!classifier_ || generation != classifier_generation_) {
        const auto annotations = store_->all();
        classifier_ = std::make_shared<const RelationClassifier>(RelationClassifier::build(
            clusters_, labels_, annotations, config_.clustering.metric, options_.tau.value_or(config_.tau)));
        classifier_generation_ = generation;
    }
    return classifier_;
}

ordered_json AnnotationService::classify(const std::string& sentence) {
    Vector v;
    {
        std::lock_guard lock(embed_mutex_);
        if (!embedder_) embedder_ = make_embedding_provider(options_.embedding.value_or(config_.embedding), config_.embedding_cache);
        const std::string texts[] = {sentence};
        v = embed_batch(texts, *embedder_).front();
    }
    const auto classifier = current_classifier();
    const auto c = classifier->classify(v);
    ordered_json j;
    j["run_id"] = run_id_;
    j["label"] = c.label;
    j["source"] = c.source;
    j["distance"] = c.distance;
    j["cluster_id"] = c.cluster_id;
    j["tau"] = classifier->tau();
    return j;
}

ordered_json AnnotationService::report() const {
    ordered_json j;
    j["run_id"] = run_id_;
    j["report"] = report_;
    return j;
}

ordered_json AnnotationService::aliases() const {
    ordered_json j;
    j["run_id"] = run_id_;
    j["aliases"] = aliases_.to_json();
    return j;
}

std::string AnnotationService::graph(GraphFormat format) const { return export_graph(graph_, format); }

namespace {

void send_json(httplib::Response& res, const ordered_json& j, int status = 200) {
    res.status = status;
    res.set_content(j.dump(), "application/json");
}

}  // namespace

void AnnotationService::mount(httplib::Server& server) {
    auto guarded = [this](auto handler) {
        return [this, handler](const httplib::Request& req, httplib::Response& res) {
            res.set_header("X-Run-Id", run_id_);
            auto error = [&](int status, const std::string& message) {
                send_json(res, {{"run_id", run_id_}, {"error", message}}, status);
            };
            try {
                handler(req, res);
            } catch (const NotFoundError& e) {
                error(404, e.what());
            } catch (const json::exception& e) {
                error(400, std::string("bad request: ") + e.what());
            } catch (const std::invalid_argument& e) {
                error(400, e.what());
            } catch (const ProviderError& e) {
                error(502, e.what());
            } catch (const std::exception& e) {
                error(500, e.what());
            }
        };
    };

    server.Get("/clusters", guarded([this](const httplib::Request& req, httplib::Response& res) {
        std::optional<AnnotationStatus> status;
        if (req.has_param("status") && !req.get_param_value("status").empty())
            status = parse_status(req.get_param_value("status"));
        const auto sort = req.has_param("sort") && !req.get_param_value("sort").empty() ? req.get_param_value("sort") : "cluster_id";
        std::size_t page = 1;
        if (req.has_param("page")) {
            try {
                page = std::stoul(req.get_param_value("page"));
            } catch (const std::exception&) {
                throw std::invalid_argument("page must be a positive integer");
            }
        }
        send_json(res, list_clusters(status, sort, page));
    }));
    server.Get(R"(/clusters/(\d+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
        send_json(res, cluster(std::stoul(req.matches[1])));
    }));
    server.Post(R"(/clusters/(\d+)/annotation)", guarded([this](const httplib::Request& req, httplib::Response& res) {
        send_json(res, annotate(std::stoul(req.matches[1]), json::parse(req.body)));
    }));
    server.Post("/classify", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const auto body = json::parse(req.body);
        if (!body.contains("text") || !body["text"].is_string()) throw std::invalid_argument("body needs a text field");
        send_json(res, classify(body["text"].get<std::string>()));
    }));
    server.Get("/graph", guarded([this](const httplib::Request& req, httplib::Response& res) {
        const auto name = req.has_param("format") ? req.get_param_value("format") : "json";
        const auto format = parse_format(name);
        if (format == GraphFormat::json) {
            ordered_json j;
            j["run_id"] = run_id_;
            j["graph"] = to_json(graph_);
            send_json(res, j);
        } else {
            res.set_content(graph(format), format == GraphFormat::dot ? "text/vnd.graphviz" : "text/tab-separated-values");
        }
    }));
    server.Get("/run/report", guarded([this](const httplib::Request&, httplib::Response& res) { send_json(res, report()); }));
    server.Get("/aliases", guarded([this](const httplib::Request&, httplib::Response& res) { send_json(res, aliases()); }));
    if (options_.ui_dir) server.set_mount_point("/", options_.ui_dir->string());
}

void AnnotationService::listen(const std::string& host, int port) {
    server_ = std::make_unique<httplib::Server>();
    mount(*server_);
    if (!server_->listen(host, port)) throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
}

int AnnotationService::start_background(const std::string& host) {
    server_ = std::make_unique<httplib::Server>();
    mount(*server_);
    const int port = server_->bind_to_any_port(host);
    if (port <= 0) throw std::runtime_error("cannot bind " + host);
    thread_ = std::make_unique<std::thread>([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port;
}

void AnnotationService::stop() {
    if (server_) server_->stop();
    if (thread_ && thread_->joinable()) thread_->join();
    thread_.reset();
}

}  // namespace novelgraph
