#pragma once

#include <Eigen/Core>
#include <array>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "pterisk/serializer.hpp"

namespace pterisk {

enum class PoolingStrategy { kMean, kCls, kMax };

const std::string& pooling_name(PoolingStrategy s);
PoolingStrategy pooling_from_name(const std::string& name);

struct TokenEmbeddingMatrix {
  std::vector<std::string> tokens;  // first entry is the sequence-start marker
  Eigen::MatrixXf vectors;          // token_count x dim, 32-bit storage precision
};

struct PooledEmbedding {
  Eigen::VectorXf vector;
  PoolingStrategy strategy = PoolingStrategy::kMean;
  std::string backend_id;
  AspectId aspect = AspectId::kGcs;
};

enum class BackendKind { kRemote, kHash };
enum class ResponseLevel { kToken, kPooled };

struct BackendDescriptor {
  std::string backend_id;
  int dim = 256;
  BackendKind kind = BackendKind::kHash;
  std::string endpoint;  // remote only
  int max_batch = 16;

  // Remote transport knobs (config-sourced).
  int timeout_ms = 10000;
  int max_retries = 3;
  int max_in_flight = 1;

  // Remote services may return pre-pooled vectors; such backends support only
  // the strategy the service applied.
  ResponseLevel level = ResponseLevel::kToken;
  PoolingStrategy pooled_strategy = PoolingStrategy::kMean;

  uint64_t hash_seed = 20566;  // hash backend expansion seed
};

void validate_backend(const BackendDescriptor& d);
bool backend_supports_pooling(const BackendDescriptor& d, PoolingStrategy s);

// Lowercase tokens: maximal runs of ASCII [a-z0-9], preceded by the
// sequence-start marker "<s>".
std::vector<std::string> tokenize(const std::string& text);

// Documented hash expansion: with h = fnv1a64(token) and golden-ratio stride
// g = 0x9e3779b97f4a7c15, coordinate j is
//   x = splitmix64((h ^ seed) + j * g)
//   value = 2 * ((x >> 11) / 2^53) - 1        (signed, in [-1, 1))
// computed in double and stored as float32.
Eigen::VectorXf hash_token_vector(const std::string& token, uint64_t seed, int dim);

// mean: element-wise average over all rows; cls: first row; max: element-wise
// maximum over all rows.
Eigen::VectorXf pool(const TokenEmbeddingMatrix& matrix, PoolingStrategy strategy);

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  virtual const BackendDescriptor& descriptor() const = 0;
  // One matrix per input text, in input order.
  virtual std::vector<TokenEmbeddingMatrix> embed_batch(
      const std::vector<std::string>& texts) = 0;
};

class HashBackend final : public EmbeddingBackend {
 public:
  explicit HashBackend(BackendDescriptor descriptor);
  const BackendDescriptor& descriptor() const override { return descriptor_; }
  std::vector<TokenEmbeddingMatrix> embed_batch(const std::vector<std::string>& texts) override;

 private:
  BackendDescriptor descriptor_;
};

// HTTP client for the embedding wire protocol:
//   POST endpoint  {"texts": [...], "level": "token"|"pooled"}
//   -> {"dim": d, "embeddings": [...]}  (token level nests one matrix per text)
// Bounded retries with exponential backoff; batches of at most max_batch texts
// issued with at most max_in_flight concurrent requests.
class RemoteBackend final : public EmbeddingBackend {
 public:
  explicit RemoteBackend(BackendDescriptor descriptor);
  const BackendDescriptor& descriptor() const override { return descriptor_; }
  std::vector<TokenEmbeddingMatrix> embed_batch(const std::vector<std::string>& texts) override;

 private:
  std::vector<TokenEmbeddingMatrix> request_batch(const std::vector<std::string>& texts);
  BackendDescriptor descriptor_;
};

std::unique_ptr<EmbeddingBackend> make_backend(const BackendDescriptor& descriptor);

// Directory of content-addressed binary entries keyed by
// sha256(backend_id, text); entries carry backend_id, dim, token_count and
// value precision in their header and survive process restarts. Corrupt
// entries degrade to misses with a warning.
class EmbeddingCache {
 public:
  explicit EmbeddingCache(std::filesystem::path dir);

  std::optional<TokenEmbeddingMatrix> lookup(const std::string& backend_id,
                                             const std::string& text);
  void store(const std::string& backend_id, const std::string& text,
             const TokenEmbeddingMatrix& matrix);

  size_t hits() const { return hits_; }
  size_t misses() const { return misses_; }

  static std::string entry_key(const std::string& backend_id, const std::string& text);

 private:
  std::filesystem::path dir_;
  std::mutex write_mutex_;
  size_t hits_ = 0;
  size_t misses_ = 0;
};

// Cache-aware batch embedding front end.
class Embedder {
 public:
  Embedder(std::shared_ptr<EmbeddingBackend> backend, EmbeddingCache* cache = nullptr);

  const BackendDescriptor& descriptor() const { return backend_->descriptor(); }

  TokenEmbeddingMatrix embed_tokens(const AspectParagraph& paragraph);
  std::vector<TokenEmbeddingMatrix> embed_texts(const std::vector<std::string>& texts);

  // Per-aspect pooled embeddings in fixed aspect order; never partial.
  std::array<PooledEmbedding, kAspectCount> embed_subject(
      const std::array<AspectParagraph, kAspectCount>& paragraphs, PoolingStrategy strategy);

 private:
  std::shared_ptr<EmbeddingBackend> backend_;
  EmbeddingCache* cache_;
};

}  // namespace pterisk
