#include "novelgraph/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "novelgraph/text.hpp"

namespace novelgraph {

using nlohmann::json;

std::string to_string(Metric metric) { return metric == Metric::cosine ? "cosine" : "euclidean"; }

Metric parse_metric(std::string_view name) {
    if (name == "cosine") return Metric::cosine;
    if (name == "euclidean") return Metric::euclidean;
    throw std::invalid_argument("unknown metric: " + std::string(name));
}

namespace {

void require_same_dim(const Vector& u, const Vector& v) {
    if (u.dim() != v.dim())
        throw std::invalid_argument("dimension mismatch: " + std::to_string(u.dim()) + " vs " + std::to_string(v.dim()));
}

}  // namespace

double dot(const Vector& u, const Vector& v) {
    require_same_dim(u, v);
    double s = 0.0;
    for (std::size_t i = 0; i < u.dim(); ++i) s += u.values[i] * v.values[i];
    return s;
}

double norm(const Vector& v) {
    double s = 0.0;
    for (const double x : v.values) s += x * x;
    return std::sqrt(s);
}

Vector normalized(const Vector& v) {
    const double n = norm(v);
    if (n == 0.0) return v;
    Vector out = v;
    for (double& x : out.values) x /= n;
    return out;
}

double cosine_distance(const Vector& u, const Vector& v) {
    require_same_dim(u, v);
    const double nu = norm(u);
    const double nv = norm(v);
    if (nu == 0.0 || nv == 0.0) throw std::domain_error("cosine distance undefined for a zero vector");
    const double d = 1.0 - dot(u, v) / (nu * nv);
    return std::clamp(d, 0.0, 2.0);
}

double euclidean_distance(const Vector& u, const Vector& v) {
    require_same_dim(u, v);
    double s = 0.0;
    for (std::size_t i = 0; i < u.dim(); ++i) {
        const double d = u.values[i] - v.values[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double distance(Metric metric, const Vector& u, const Vector& v) {
    return metric == Metric::cosine ? cosine_distance(u, v) : euclidean_distance(u, v);
}

HashEmbedding hash_embed(std::string_view sentence, std::size_t dim) {
    if (dim < 16) throw std::invalid_argument("hash embedding dimension must be >= 16");
    std::vector<std::string> tokens;
    for (const auto& w : text::words(sentence)) tokens.push_back(text::is_character_id(w) ? "CHAR" : text::to_lower(w));

    HashEmbedding out{Vector(dim), tokens.empty()};
    auto add = [&](const std::string& feature) {
        const auto h = text::fnv1a64(feature);
        const auto sign_bits = text::fnv1a64(feature, 0x84222325cbf29ce4ULL);
        out.vector.values[h % dim] += (sign_bits >> 63) != 0 ? -1.0 : 1.0;
    };
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        add("u:" + tokens[i]);
        if (i + 1 < tokens.size()) add("b:" + tokens[i] + " " + tokens[i + 1]);
    }
    out.vector = normalized(out.vector);
    return out;
}

HashEmbeddingProvider::HashEmbeddingProvider(std::size_t dim) : dim_(dim) {
    if (dim < 16) throw std::invalid_argument("hash embedding dimension must be >= 16");
}

std::string HashEmbeddingProvider::id() const { return "builtin-hash-" + std::to_string(dim_); }

std::vector<Vector> HashEmbeddingProvider::embed(std::span<const std::string> texts) {
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        auto e = hash_embed(t, dim_);
        if (e.empty) ++empty_inputs_;
        out.push_back(std::move(e.vector));
    }
    return out;
}

WireEmbeddingProvider::WireEmbeddingProvider(std::shared_ptr<WireChannel> channel, std::string id)
    : channel_(std::move(channel)), id_(std::move(id)) {}

std::size_t WireEmbeddingProvider::dim() {
    if (!dim_) {
        const auto r = channel_->call_one({{"op", "dim"}});
        if (!r.contains("dim") || !r["dim"].is_number_unsigned() || r["dim"].get<std::size_t>() == 0)
            throw ProviderError("protocol violation: dim response without a positive dim");
        dim_ = r["dim"].get<std::size_t>();
    }
    return *dim_;
}

std::vector<Vector> WireEmbeddingProvider::embed(std::span<const std::string> texts) {
    const std::size_t expected = dim();
    std::vector<json> requests;
    requests.reserve(texts.size());
    for (const auto& t : texts) requests.push_back({{"op", "embed"}, {"text", t}});
    const auto responses = channel_->call(std::move(requests));
    std::vector<Vector> out;
    out.reserve(responses.size());
    for (const auto& r : responses) {
        if (!r.contains("vector") || !r["vector"].is_array())
            throw ProviderError("protocol violation: embed response without vector");
        Vector v;
        try {
            v = Vector(r["vector"].get<std::vector<double>>());
        } catch (const json::exception&) {
            // NaN and infinity arrive as null.
            throw ProviderError("protocol violation: non-numeric vector component");
        }
        if (v.dim() != expected)
            throw ProviderError("dimension mismatch: provider reported " + std::to_string(expected) + ", sent " +
                                std::to_string(v.dim()));
        out.push_back(std::move(v));
    }
    return out;
}

namespace {

std::string cache_key(std::string_view s) { return text::hex64(text::fnv1a64(s)) + "-" + std::to_string(s.size()); }

}  // namespace

CachedEmbeddingProvider::CachedEmbeddingProvider(std::unique_ptr<EmbeddingProvider> inner,
                                                 std::filesystem::path cache_dir)
    : inner_(std::move(inner)) {
    std::filesystem::create_directories(cache_dir);
    file_ = cache_dir / (inner_->id() + ".jsonl");
    std::ifstream in(file_);
    std::string line;
    while (std::getline(in, line)) {
        if (text::trim(line).empty()) continue;
        try {
            const auto j = json::parse(line);
            cache_[j.at("key").get<std::string>()] = Vector(j.at("vector").get<std::vector<double>>());
        } catch (const json::exception&) {
            // A torn final line from an interrupted run; the entry is recomputed.
        }
    }
}

std::vector<Vector> CachedEmbeddingProvider::embed(std::span<const std::string> texts) {
    std::vector<Vector> out(texts.size());
    std::vector<std::string> misses;
    std::vector<std::size_t> miss_index;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        const auto it = cache_.find(cache_key(texts[i]));
        if (it != cache_.end()) {
            out[i] = it->second;
            ++hits_;
        } else {
            misses.push_back(texts[i]);
            miss_index.push_back(i);
        }
    }
    if (misses.empty()) return out;
    auto fresh = inner_->embed(misses);
    std::ofstream append(file_, std::ios::app);
    for (std::size_t m = 0; m < fresh.size(); ++m) {
        const auto key = cache_key(misses[m]);
        append << json{{"key", key}, {"vector", fresh[m].values}}.dump() << '\n';
        cache_[key] = fresh[m];
        out[miss_index[m]] = std::move(fresh[m]);
    }
    return out;
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const ProviderSpec& spec,
                                                           const std::optional<std::filesystem::path>& cache_dir) {
    if (spec.kind == ProviderKind::builtin) return std::make_unique<HashEmbeddingProvider>(spec.dim);
    std::unique_ptr<EmbeddingProvider> wire = std::make_unique<WireEmbeddingProvider>(open_channel(spec), spec.id());
    if (cache_dir) return std::make_unique<CachedEmbeddingProvider>(std::move(wire), *cache_dir);
    return wire;
}

std::vector<Vector> embed_batch(std::span<const std::string> texts, EmbeddingProvider& provider, std::size_t batch_size) {
    if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
    std::vector<Vector> out;
    out.reserve(texts.size());
    if (texts.empty()) return out;
    std::size_t dim = 0;
    try {
        dim = provider.dim();
    } catch (const ProviderError& e) {
        throw EmbeddingError(0, e.what());
    }
    for (std::size_t start = 0, batch = 0; start < texts.size(); start += batch_size, ++batch) {
        const auto slice = texts.subspan(start, std::min(batch_size, texts.size() - start));
        std::vector<Vector> vectors;
        try {
            vectors = provider.embed(slice);
        } catch (const EmbeddingError&) {
            throw;
        } catch (const ProviderError& e) {
            throw EmbeddingError(batch, e.what());
        }
        if (vectors.size() != slice.size())
            throw EmbeddingError(batch, "provider returned " + std::to_string(vectors.size()) + " vectors for " +
                                            std::to_string(slice.size()) + " texts");
        for (auto& v : vectors) {
            if (v.dim() != dim) throw EmbeddingError(batch, "dimension mismatch within batch");
            for (const double x : v.values) {
                if (!std::isfinite(x)) throw EmbeddingError(batch, "non-finite vector component");
            }
            out.push_back(std::move(v));
        }
    }
    return out;
}

std::string embedded_to_jsonl(std::span<const EmbeddedSentence> embedded) {
    std::string out;
    for (const auto& e : embedded) {
        nlohmann::ordered_json j;
        j["instance_id"] = e.instance_id;
        j["vector"] = e.vector.values;
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<EmbeddedSentence> embedded_from_jsonl(std::string_view jsonl) {
    std::vector<EmbeddedSentence> out;
    for (const auto& line : text::split(jsonl, '\n')) {
        if (text::trim(line).empty()) continue;
        const auto j = json::parse(line);
        out.push_back({j.at("instance_id").get<std::string>(), Vector(j.at("vector").get<std::vector<double>>())});
    }
    return out;
}

}  // namespace novelgraph
