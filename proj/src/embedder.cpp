#include "pterisk/embedder.hpp"

#include <chrono>
#include <cstring>
#include <fstream>
#include <iostream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "pterisk/errors.hpp"
#include "pterisk/hashing.hpp"
#include "pterisk/io_util.hpp"

namespace pterisk {

using json = nlohmann::json;

namespace {
constexpr const char* kStartMarker = "<s>";
constexpr uint64_t kGoldenStride = 0x9e3779b97f4a7c15ull;
constexpr uint32_t kCacheMagic = 0x50544542;  // "PTEB"
constexpr uint32_t kCacheVersion = 1;
}  // namespace

const std::string& pooling_name(PoolingStrategy s) {
  static const std::array<std::string, 3> names = {"mean", "cls", "max"};
  return names[static_cast<size_t>(s)];
}

PoolingStrategy pooling_from_name(const std::string& name) {
  if (name == "mean") return PoolingStrategy::kMean;
  if (name == "cls") return PoolingStrategy::kCls;
  if (name == "max") return PoolingStrategy::kMax;
  throw ConfigError("unknown pooling strategy: " + name);
}

void validate_backend(const BackendDescriptor& d) {
  if (d.backend_id.empty()) throw ConfigError("backend_id must be non-empty");
  if (d.dim <= 0) throw ConfigError("backend dim must be positive");
  if (d.max_batch <= 0) throw ConfigError("backend max_batch must be positive");
  if (d.kind == BackendKind::kRemote && d.endpoint.empty())
    throw ConfigError("remote backend requires an endpoint");
  if (d.kind == BackendKind::kHash && !d.endpoint.empty())
    throw ConfigError("hash backend must not set an endpoint");
}

bool backend_supports_pooling(const BackendDescriptor& d, PoolingStrategy s) {
  if (d.level == ResponseLevel::kToken) return true;
  return s == d.pooled_strategy;
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  tokens.emplace_back(kStartMarker);
  std::string current;
  for (unsigned char c : text) {
    char lc = static_cast<char>(std::tolower(c));
    if ((lc >= 'a' && lc <= 'z') || (lc >= '0' && lc <= '9')) {
      current.push_back(lc);
    } else if (!current.empty()) {
      tokens.push_back(current);
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(current);
  return tokens;
}

Eigen::VectorXf hash_token_vector(const std::string& token, uint64_t seed, int dim) {
  Eigen::VectorXf v(dim);
  const uint64_t base = fnv1a64(token) ^ seed;
  for (int j = 0; j < dim; ++j) {
    uint64_t x = splitmix64(base + static_cast<uint64_t>(j) * kGoldenStride);
    double unit = static_cast<double>(x >> 11) * 0x1.0p-53;
    v(j) = static_cast<float>(2.0 * unit - 1.0);
  }
  return v;
}

Eigen::VectorXf pool(const TokenEmbeddingMatrix& matrix, PoolingStrategy strategy) {
  if (matrix.vectors.rows() < 1) throw DataError("cannot pool an empty embedding matrix");
  switch (strategy) {
    case PoolingStrategy::kMean: return matrix.vectors.colwise().mean();
    case PoolingStrategy::kCls: return matrix.vectors.row(0);
    case PoolingStrategy::kMax: return matrix.vectors.colwise().maxCoeff();
  }
  throw DataError("unknown pooling strategy");
}

// --- hash backend --------------------------------------------------------

HashBackend::HashBackend(BackendDescriptor descriptor) : descriptor_(std::move(descriptor)) {
  validate_backend(descriptor_);
}

std::vector<TokenEmbeddingMatrix> HashBackend::embed_batch(
    const std::vector<std::string>& texts) {
  std::vector<TokenEmbeddingMatrix> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    if (text.empty()) throw DataError("cannot embed empty text");
    TokenEmbeddingMatrix m;
    m.tokens = tokenize(text);
    m.vectors.resize(static_cast<Eigen::Index>(m.tokens.size()), descriptor_.dim);
    for (size_t i = 0; i < m.tokens.size(); ++i)
      m.vectors.row(static_cast<Eigen::Index>(i)) =
          hash_token_vector(m.tokens[i], descriptor_.hash_seed, descriptor_.dim).transpose();
    out.push_back(std::move(m));
  }
  return out;
}

// --- remote backend ------------------------------------------------------

RemoteBackend::RemoteBackend(BackendDescriptor descriptor) : descriptor_(std::move(descriptor)) {
  validate_backend(descriptor_);
}

namespace {

// "http://host:port/path" -> {"http://host:port", "/path"}
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
  auto scheme = endpoint.find("://");
  size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
  auto path_start = endpoint.find('/', host_start);
  if (path_start == std::string::npos) return {endpoint, "/"};
  return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

TokenEmbeddingMatrix matrix_from_rows(const json& rows, int dim, bool pooled) {
  TokenEmbeddingMatrix m;
  const json& data = pooled ? json::array({rows}) : rows;
  auto count = static_cast<Eigen::Index>(data.size());
  if (count < 1) throw BackendError("backend returned an empty embedding", 0, false);
  m.vectors.resize(count, dim);
  m.tokens.reserve(static_cast<size_t>(count));
  for (Eigen::Index i = 0; i < count; ++i) {
    const json& row = data[static_cast<size_t>(i)];
    if (static_cast<int>(row.size()) != dim)
      throw BackendError("backend dimension mismatch: expected " + std::to_string(dim) +
                             ", got " + std::to_string(row.size()),
                         0, false);
    for (int j = 0; j < dim; ++j)
      m.vectors(i, j) = row[static_cast<size_t>(j)].get<float>();
    m.tokens.push_back(i == 0 ? std::string(kStartMarker) : "<t" + std::to_string(i) + ">");
  }
  return m;
}

}  // namespace

std::vector<TokenEmbeddingMatrix> RemoteBackend::request_batch(
    const std::vector<std::string>& texts) {
  auto [base, path] = split_endpoint(descriptor_.endpoint);
  json body;
  body["texts"] = texts;
  body["level"] = descriptor_.level == ResponseLevel::kToken ? "token" : "pooled";
  const std::string payload = body.dump();

  // Credentials come through the environment only, never through config.
  const char* token = std::getenv("PTERISK_BACKEND_TOKEN");

  std::string last_error;
  for (int attempt = 1; attempt <= std::max(1, descriptor_.max_retries); ++attempt) {
    httplib::Client client(base);
    client.set_connection_timeout(0, descriptor_.timeout_ms * 1000);
    client.set_read_timeout(descriptor_.timeout_ms / 1000, (descriptor_.timeout_ms % 1000) * 1000);
    if (token) client.set_default_headers({{"Authorization", std::string("Bearer ") + token}});
    auto res = client.Post(path, payload, "application/json");
    if (res && res->status == 200) {
      json reply;
      try {
        reply = json::parse(res->body);
      } catch (const json::exception& e) {
        throw BackendError(std::string("unparseable backend response: ") + e.what(), attempt,
                           false);
      }
      int dim = reply.at("dim").get<int>();
      if (dim != descriptor_.dim)
        throw BackendError("backend dimension mismatch: descriptor says " +
                               std::to_string(descriptor_.dim) + ", service says " +
                               std::to_string(dim),
                           attempt, false);
      const json& embeddings = reply.at("embeddings");
      if (embeddings.size() != texts.size())
        throw BackendError("backend returned " + std::to_string(embeddings.size()) +
                               " embeddings for " + std::to_string(texts.size()) + " texts",
                           attempt, false);
      std::vector<TokenEmbeddingMatrix> out;
      out.reserve(texts.size());
      for (const auto& entry : embeddings)
        out.push_back(matrix_from_rows(entry, dim, descriptor_.level == ResponseLevel::kPooled));
      return out;
    }
    if (res && res->status >= 400 && res->status < 500)
      throw BackendError("backend rejected request with status " + std::to_string(res->status),
                         attempt, false);
    last_error = res ? "status " + std::to_string(res->status)
                     : "transport error " + httplib::to_string(res.error());
    if (attempt < descriptor_.max_retries)
      std::this_thread::sleep_for(std::chrono::milliseconds(50 * (1 << (attempt - 1))));
  }
  throw BackendError("backend unreachable after " + std::to_string(descriptor_.max_retries) +
                         " attempts: " + last_error,
                     descriptor_.max_retries, true);
}

std::vector<TokenEmbeddingMatrix> RemoteBackend::embed_batch(
    const std::vector<std::string>& texts) {
  for (const auto& t : texts)
    if (t.empty()) throw DataError("cannot embed empty text");

  std::vector<std::pair<size_t, std::vector<std::string>>> chunks;
  for (size_t start = 0; start < texts.size(); start += static_cast<size_t>(descriptor_.max_batch)) {
    size_t end = std::min(texts.size(), start + static_cast<size_t>(descriptor_.max_batch));
    chunks.emplace_back(start, std::vector<std::string>(texts.begin() + static_cast<long>(start),
                                                        texts.begin() + static_cast<long>(end)));
  }

  std::vector<TokenEmbeddingMatrix> out(texts.size());
  const int workers = std::max(1, std::min<int>(descriptor_.max_in_flight,
                                                static_cast<int>(chunks.size())));
  if (workers == 1) {
    for (auto& [offset, chunk] : chunks) {
      auto batch = request_batch(chunk);
      for (size_t i = 0; i < batch.size(); ++i) out[offset + i] = std::move(batch[i]);
    }
    return out;
  }

  // Results land by index, so completion order cannot affect output.
  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    while (true) {
      size_t idx = next.fetch_add(1);
      if (idx >= chunks.size()) return;
      try {
        auto batch = request_batch(chunks[idx].second);
        for (size_t i = 0; i < batch.size(); ++i) out[chunks[idx].first + i] = std::move(batch[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

std::unique_ptr<EmbeddingBackend> make_backend(const BackendDescriptor& descriptor) {
  validate_backend(descriptor);
  if (descriptor.kind == BackendKind::kHash) return std::make_unique<HashBackend>(descriptor);
  return std::make_unique<RemoteBackend>(descriptor);
}

// --- cache ----------------------------------------------------------------

EmbeddingCache::EmbeddingCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::string EmbeddingCache::entry_key(const std::string& backend_id, const std::string& text) {
  std::string keyed = backend_id;
  keyed.push_back('\0');
  keyed += text;
  return sha256_hex(keyed);
}

namespace {

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

struct ByteReader {
  const std::string& data;
  size_t pos = 0;
  bool read_u32(uint32_t& v) {
    if (pos + 4 > data.size()) return false;
    v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<uint32_t>(static_cast<unsigned char>(data[pos + static_cast<size_t>(i)]))
           << (8 * i);
    pos += 4;
    return true;
  }
  bool read_bytes(void* dst, size_t n) {
    if (pos + n > data.size()) return false;
    std::memcpy(dst, data.data() + pos, n);
    pos += n;
    return true;
  }
  bool read_string(std::string& s) {
    uint32_t len;
    if (!read_u32(len) || pos + len > data.size()) return false;
    s.assign(data, pos, len);
    pos += len;
    return true;
  }
};

}  // namespace

std::optional<TokenEmbeddingMatrix> EmbeddingCache::lookup(const std::string& backend_id,
                                                           const std::string& text) {
  auto path = dir_ / (entry_key(backend_id, text) + ".emb");
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ++misses_;
    return std::nullopt;
  }
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ByteReader r{content};
  uint32_t magic = 0, version = 0, dim = 0, token_count = 0, precision = 0;
  std::string stored_backend;
  auto corrupt = [&]() -> std::optional<TokenEmbeddingMatrix> {
    std::cerr << "warning: corrupt cache entry treated as miss: " << path.string() << "\n";
    ++misses_;
    return std::nullopt;
  };
  if (!r.read_u32(magic) || magic != kCacheMagic) return corrupt();
  if (!r.read_u32(version) || version != kCacheVersion) return corrupt();
  if (!r.read_string(stored_backend) || stored_backend != backend_id) return corrupt();
  if (!r.read_u32(dim) || !r.read_u32(token_count) || !r.read_u32(precision)) return corrupt();
  if (precision != sizeof(float) || token_count == 0 || dim == 0) return corrupt();

  TokenEmbeddingMatrix m;
  m.tokens.resize(token_count);
  for (auto& t : m.tokens)
    if (!r.read_string(t)) return corrupt();
  m.vectors.resize(token_count, dim);
  if (!r.read_bytes(m.vectors.data(), sizeof(float) * token_count * dim)) return corrupt();
  if (r.pos != content.size()) return corrupt();
  ++hits_;
  return m;
}

void EmbeddingCache::store(const std::string& backend_id, const std::string& text,
                           const TokenEmbeddingMatrix& matrix) {
  std::string out;
  put_u32(out, kCacheMagic);
  put_u32(out, kCacheVersion);
  put_u32(out, static_cast<uint32_t>(backend_id.size()));
  out += backend_id;
  put_u32(out, static_cast<uint32_t>(matrix.vectors.cols()));
  put_u32(out, static_cast<uint32_t>(matrix.vectors.rows()));
  put_u32(out, sizeof(float));
  for (const auto& t : matrix.tokens) {
    put_u32(out, static_cast<uint32_t>(t.size()));
    out += t;
  }
  out.append(reinterpret_cast<const char*>(matrix.vectors.data()),
             sizeof(float) * static_cast<size_t>(matrix.vectors.size()));
  std::lock_guard<std::mutex> lock(write_mutex_);
  atomic_write_file(dir_ / (entry_key(backend_id, text) + ".emb"), out);
}

// --- facade ----------------------------------------------------------------

Embedder::Embedder(std::shared_ptr<EmbeddingBackend> backend, EmbeddingCache* cache)
    : backend_(std::move(backend)), cache_(cache) {}

TokenEmbeddingMatrix Embedder::embed_tokens(const AspectParagraph& paragraph) {
  return embed_texts({paragraph.text}).front();
}

std::vector<TokenEmbeddingMatrix> Embedder::embed_texts(const std::vector<std::string>& texts) {
  std::vector<TokenEmbeddingMatrix> out(texts.size());
  std::vector<size_t> pending;
  const std::string& backend_id = backend_->descriptor().backend_id;
  for (size_t i = 0; i < texts.size(); ++i) {
    if (cache_) {
      if (auto hit = cache_->lookup(backend_id, texts[i])) {
        out[i] = std::move(*hit);
        continue;
      }
    }
    pending.push_back(i);
  }
  if (!pending.empty()) {
    std::vector<std::string> missing;
    missing.reserve(pending.size());
    for (size_t i : pending) missing.push_back(texts[i]);
    auto computed = backend_->embed_batch(missing);
    for (size_t k = 0; k < pending.size(); ++k) {
      if (cache_) cache_->store(backend_id, missing[k], computed[k]);
      out[pending[k]] = std::move(computed[k]);
    }
  }
  return out;
}

std::array<PooledEmbedding, kAspectCount> Embedder::embed_subject(
    const std::array<AspectParagraph, kAspectCount>& paragraphs, PoolingStrategy strategy) {
  const BackendDescriptor& d = backend_->descriptor();
  if (!backend_supports_pooling(d, strategy))
    throw ConfigError("backend '" + d.backend_id + "' serves pre-pooled '" +
                      pooling_name(d.pooled_strategy) + "' vectors; cannot pool with '" +
                      pooling_name(strategy) + "'");
  std::vector<std::string> texts;
  texts.reserve(kAspectCount);
  for (const auto& p : paragraphs) texts.push_back(p.text);
  auto matrices = embed_texts(texts);
  std::array<PooledEmbedding, kAspectCount> out;
  for (size_t i = 0; i < kAspectCount; ++i) {
    out[i].vector = pool(matrices[i], strategy);
    out[i].strategy = strategy;
    out[i].backend_id = d.backend_id;
    out[i].aspect = paragraphs[i].aspect;
  }
  return out;
}

}  // namespace pterisk
