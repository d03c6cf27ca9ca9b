#include "novelgraph/annotation.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>

#include "novelgraph/text.hpp"

namespace novelgraph {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(AnnotationStatus status) {
    switch (status) {
        case AnnotationStatus::pending:
            return "pending";
        case AnnotationStatus::validated:
            return "validated";
        case AnnotationStatus::edited:
            return "edited";
        case AnnotationStatus::rejected:
            return "rejected";
    }
    return "pending";
}

AnnotationStatus parse_status(std::string_view name) {
    if (name == "pending") return AnnotationStatus::pending;
    if (name == "validated") return AnnotationStatus::validated;
    if (name == "edited") return AnnotationStatus::edited;
    if (name == "rejected") return AnnotationStatus::rejected;
    throw std::invalid_argument("unknown annotation status: " + std::string(name));
}

Decision parse_decision(std::string_view name) {
    if (name == "validate") return Decision::validate;
    if (name == "edit") return Decision::edit;
    if (name == "reject") return Decision::reject;
    throw std::invalid_argument("unknown decision: " + std::string(name));
}

nlohmann::ordered_json Annotation::to_json() const {
    nlohmann::ordered_json j;
    j["cluster_id"] = cluster_id;
    j["status"] = to_string(status);
    j["final_label"] = final_label;
    j["note"] = note;
    j["timestamp"] = timestamp;
    j["version"] = version;
    return j;
}

Annotation Annotation::from_json(const json& j) {
    Annotation a;
    a.cluster_id = j.at("cluster_id").get<std::size_t>();
    a.status = parse_status(j.at("status").get<std::string>());
    a.final_label = j.at("final_label").get<std::string>();
    a.note = j.value("note", "");
    a.timestamp = j.value("timestamp", "");
    a.version = j.at("version").get<std::uint64_t>();
    return a;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

AnnotationStore::AnnotationStore(fs::path dir, std::string run_id, std::map<std::size_t, std::string> automatic_labels,
                                 Clock clock)
    : dir_(std::move(dir)), run_id_(std::move(run_id)), automatic_(std::move(automatic_labels)), clock_(std::move(clock)) {
    if (!clock_) clock_ = utc_timestamp;
    fs::create_directories(dir_);
    for (const auto& [id, label] : automatic_) current_[id] = Annotation{id, AnnotationStatus::pending, label, {}, {}, 0};
    load();
}

void AnnotationStore::load() {
    if (fs::exists(snapshot_path())) {
        std::ifstream in(snapshot_path());
        const auto j = json::parse(in);
        if (j.at("run_id").get<std::string>() != run_id_)
            throw std::runtime_error("annotations in " + dir_.string() + " belong to run " + j["run_id"].get<std::string>());
        for (const auto& e : j.at("annotations")) {
            auto a = Annotation::from_json(e);
            if (current_.contains(a.cluster_id)) current_[a.cluster_id] = a;
        }
    }
    // Replay log entries newer than the snapshot.
    std::ifstream log(log_path());
    std::string line;
    while (std::getline(log, line)) {
        if (text::trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error&) {
            continue;  // torn last line after a crash
        }
        if (j.value("run_id", "") != run_id_) continue;
        auto a = Annotation::from_json(j);
        const auto it = current_.find(a.cluster_id);
        if (it != current_.end() && a.version > it->second.version) it->second = a;
    }
}

Annotation AnnotationStore::get(std::size_t cluster_id) const {
    std::lock_guard lock(mutex_);
    const auto it = current_.find(cluster_id);
    if (it == current_.end()) throw NotFoundError("no cluster " + std::to_string(cluster_id));
    return it->second;
}

std::vector<Annotation> AnnotationStore::all() const {
    std::lock_guard lock(mutex_);
    std::vector<Annotation> out;
    for (const auto& [id, a] : current_) out.push_back(a);
    return out;
}

std::uint64_t AnnotationStore::generation() const {
    std::lock_guard lock(mutex_);
    return generation_;
}

std::string AnnotationStore::snapshot() const {
    nlohmann::ordered_json j;
    j["run_id"] = run_id_;
    j["annotations"] = nlohmann::ordered_json::array();
    for (const auto& [id, a] : current_) {
        if (a.version > 0) j["annotations"].push_back(a.to_json());
    }
    return j.dump(2) + "\n";
}

void AnnotationStore::write_snapshot() const {
    const auto tmp = snapshot_path().string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        out << snapshot();
        if (!out) throw std::runtime_error("cannot write " + tmp);
    }
    fs::rename(tmp, snapshot_path());
}

AnnotateResult AnnotationStore::annotate(std::size_t cluster_id, Decision decision, std::optional<std::string> label,
                                         std::string note, std::optional<std::uint64_t> expected_version) {
    std::lock_guard lock(mutex_);
    const auto it = current_.find(cluster_id);
    if (it == current_.end()) throw NotFoundError("no cluster " + std::to_string(cluster_id));
    const auto& automatic = automatic_.at(cluster_id);

    Annotation next = it->second;
    next.note = std::move(note);
    switch (decision) {
        case Decision::validate:
            next.status = AnnotationStatus::validated;
            next.final_label = automatic;
            break;
        case Decision::reject:
            next.status = AnnotationStatus::rejected;
            next.final_label = automatic;
            break;
        case Decision::edit: {
            const auto trimmed = label ? std::string(text::trim(*label)) : std::string();
            if (trimmed.empty()) throw std::invalid_argument("an edit needs a non-empty label");
            if (trimmed.find_first_of("\t\n\r") != std::string::npos)
                throw std::invalid_argument("labels cannot contain tabs or line breaks");
            next.final_label = trimmed;
            next.status = trimmed == automatic ? AnnotationStatus::validated : AnnotationStatus::edited;
            break;
        }
    }
    AnnotateResult result;
    result.previous_version = it->second.version;
    result.conflict = expected_version && *expected_version != it->second.version;
    next.version = it->second.version + 1;
    next.timestamp = clock_();

    auto entry = next.to_json();
    entry["run_id"] = run_id_;
    {
        std::ofstream log(log_path(), std::ios::app);
        log << entry.dump() << '\n';
        log.flush();
        if (!log) throw std::runtime_error("cannot append to " + log_path().string());
    }
    it->second = next;
    ++generation_;
    write_snapshot();
    result.annotation = next;
    return result;
}

RelationClassifier::RelationClassifier(std::vector<Entry> entries, Metric metric, double tau)
    : entries_(std::move(entries)), metric_(metric), tau_(tau) {}

RelationClassifier RelationClassifier::build(const ClusterSet& clusters, std::span<const RelationLabel> labels,
                                             std::span<const Annotation> annotations, Metric metric, double tau) {
    std::map<std::size_t, std::string> automatic;
    for (const auto& l : labels) automatic[l.cluster_id] = l.label;
    std::map<std::size_t, const Annotation*> annotation_of;
    for (const auto& a : annotations) annotation_of[a.cluster_id] = &a;

    std::vector<Entry> entries;
    for (const auto& c : clusters.clusters) {
        if (c.members.empty()) continue;
        Entry e;
        e.cluster_id = c.cluster_id;
        e.centroid = c.centroid;
        e.automatic_label = automatic.count(c.cluster_id) ? automatic[c.cluster_id] : std::string(kUnlabeled);
        e.final_label = e.automatic_label;
        if (const auto it = annotation_of.find(c.cluster_id); it != annotation_of.end()) {
            const auto& a = *it->second;
            if (a.status == AnnotationStatus::rejected) continue;
            if (a.status == AnnotationStatus::validated || a.status == AnnotationStatus::edited) {
                e.validated = true;
                e.final_label = a.final_label;
            }
        }
        entries.push_back(std::move(e));
    }
    return RelationClassifier(std::move(entries), metric, tau);
}

Classification RelationClassifier::classify(const Vector& v) const {
    if (entries_.empty()) throw std::runtime_error("the classifier has no usable clusters");
    const Entry* best_validated = nullptr;
    double best_validated_d = std::numeric_limits<double>::infinity();
    const Entry* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& e : entries_) {
        const double d = distance(metric_, v, e.centroid);
        if (d < best_d) {
            best_d = d;
            best = &e;
        }
        if (e.validated && d < best_validated_d) {
            best_validated_d = d;
            best_validated = &e;
        }
    }
    if (best_validated != nullptr && best_validated_d <= tau_)
        return {best_validated->final_label, "validated", best_validated_d, best_validated->cluster_id};
    return {best->automatic_label, "automatic", best_d, best->cluster_id};
}

}  // namespace novelgraph
