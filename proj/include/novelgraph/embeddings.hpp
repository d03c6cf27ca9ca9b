#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "novelgraph/provider.hpp"

namespace novelgraph {

struct Vector {
    std::vector<double> values;

    Vector() = default;
    explicit Vector(std::vector<double> v) : values(std::move(v)) {}
    explicit Vector(std::size_t dim) : values(dim, 0.0) {}

    std::size_t dim() const { return values.size(); }
    bool operator==(const Vector&) const = default;
};

struct EmbeddedSentence {
    std::string instance_id;
    Vector vector;
};

enum class Metric { euclidean, cosine };

std::string to_string(Metric metric);
Metric parse_metric(std::string_view name);

double dot(const Vector& u, const Vector& v);
double norm(const Vector& v);
Vector normalized(const Vector& v);  // zero vectors stay zero

// 1 - u.v / (|u||v|), clamped to [0, 2]. Throws std::domain_error on a zero
// vector and std::invalid_argument on a dimension mismatch.
double cosine_distance(const Vector& u, const Vector& v);
double euclidean_distance(const Vector& u, const Vector& v);
double distance(Metric metric, const Vector& u, const Vector& v);

inline constexpr std::size_t kDefaultHashDim = 256;

struct HashEmbedding {
    Vector vector;
    bool empty = false;  // no features: zero vector returned
};

// Offline stand-in for a sentence encoder: signed feature hashing of
// lowercased word unigrams and bigrams, with CHARn tokens masked to CHAR,
// then L2-normalized. Requires dim >= 16.
HashEmbedding hash_embed(std::string_view text, std::size_t dim = kDefaultHashDim);

class EmbeddingError : public ProviderError {
public:
    EmbeddingError(std::size_t batch_index, const std::string& what)
        : ProviderError("embedding batch " + std::to_string(batch_index) + ": " + what), batch_index_(batch_index) {}
    std::size_t batch_index() const { return batch_index_; }

private:
    std::size_t batch_index_;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::string id() const = 0;
    virtual std::size_t dim() = 0;
    virtual std::vector<Vector> embed(std::span<const std::string> texts) = 0;
};

class HashEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit HashEmbeddingProvider(std::size_t dim = kDefaultHashDim);
    std::string id() const override;
    std::size_t dim() override { return dim_; }
    std::vector<Vector> embed(std::span<const std::string> texts) override;
    // Number of inputs so far that produced no features.
    std::size_t empty_inputs() const { return empty_inputs_; }

private:
    std::size_t dim_;
    std::size_t empty_inputs_ = 0;
};

class WireEmbeddingProvider final : public EmbeddingProvider {
public:
    WireEmbeddingProvider(std::shared_ptr<WireChannel> channel, std::string id);
    std::string id() const override { return id_; }
    std::size_t dim() override;
    std::vector<Vector> embed(std::span<const std::string> texts) override;

private:
    std::shared_ptr<WireChannel> channel_;
    std::string id_;
    std::optional<std::size_t> dim_;
};

// Disk cache in front of another provider, keyed by (provider id, content
// hash). One JSON line per vector in <dir>/<provider id>.jsonl.
class CachedEmbeddingProvider final : public EmbeddingProvider {
public:
    CachedEmbeddingProvider(std::unique_ptr<EmbeddingProvider> inner, std::filesystem::path cache_dir);
    std::string id() const override { return inner_->id(); }
    std::size_t dim() override { return inner_->dim(); }
    std::vector<Vector> embed(std::span<const std::string> texts) override;
    std::size_t hits() const { return hits_; }

private:
    std::unique_ptr<EmbeddingProvider> inner_;
    std::filesystem::path file_;
    std::map<std::string, Vector> cache_;
    std::size_t hits_ = 0;
};

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const ProviderSpec& spec,
                                                           const std::optional<std::filesystem::path>& cache_dir = {});

// Embeds in batches of `batch_size`; output order matches input order and
// every vector has the provider's dimension.
std::vector<Vector> embed_batch(std::span<const std::string> texts, EmbeddingProvider& provider,
                                std::size_t batch_size = 64);

std::string embedded_to_jsonl(std::span<const EmbeddedSentence> embedded);
std::vector<EmbeddedSentence> embedded_from_jsonl(std::string_view jsonl);

}  // namespace novelgraph
