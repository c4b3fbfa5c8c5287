#pragma once

// Clients for embedding and chat-completion services, plus local stand-ins
// (feature-hashing embedder, scripted LLM) that make the full pipeline run
// offline and deterministically. Every provider is safe to call from
// several threads at once.

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace slidesync {

using Embedding = std::vector<double>;

inline constexpr std::size_t kMaxEmbedTextBytes = 8192;
inline constexpr std::size_t kMaxPromptBytes = 32 * 1024;
inline constexpr const char* kApiTokenEnv = "SLIDESYNC_API_TOKEN";

enum class EmbeddingProviderKind { http, file, hashing };
enum class LlmProviderKind { http, scripted };

struct EmbeddingProviderSpec {
  EmbeddingProviderKind kind = EmbeddingProviderKind::hashing;
  std::string endpoint_url;
  std::string model_name = "hashing-char3";
  std::size_t vector_dim = 256;
  std::optional<std::filesystem::path> cache_path;  // directory of cached vectors
  double timeout_s = 30;
  int max_retries = 2;
};

struct LlmProviderSpec {
  LlmProviderKind kind = LlmProviderKind::scripted;
  std::string endpoint_url;
  std::string model_name;
  std::optional<std::filesystem::path> script_path;
  double timeout_s = 60;
  int max_retries = 2;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  /// One vector per text, in input order. Vectors have unit L2 norm except
  /// for empty texts, which map to the zero vector.
  virtual std::vector<Embedding> embed(std::span<const std::string> texts) = 0;

  virtual std::string model_tag() const = 0;
  virtual std::size_t dimension() const = 0;
};

class LlmProvider {
 public:
  virtual ~LlmProvider() = default;
  virtual std::string complete(std::string_view prompt) = 0;
  virtual std::string model_tag() const = 0;
};

/// Signed feature hashing of character 3-grams. Each 3-code-point window of
/// the UTF-8 text is hashed with 64-bit FNV-1a; the low bits pick the bucket
/// (h mod dim) and the top bit the sign. Texts shorter than three code points
/// hash as a single gram. The count vector is L2-normalized.
Embedding hashing_embedding(std::string_view text, std::size_t dim);

class HashingEmbedder final : public EmbeddingProvider {
 public:
  explicit HashingEmbedder(std::size_t dim = 256);
  std::vector<Embedding> embed(std::span<const std::string> texts) override;
  std::string model_tag() const override;
  std::size_t dimension() const override { return dim_; }

 private:
  std::size_t dim_;
};

/// Replies keyed by the SHA-256 hex digest of the exact prompt bytes.
class ScriptedLlm final : public LlmProvider {
 public:
  explicit ScriptedLlm(std::map<std::string, std::string> replies, std::string model = "scripted");
  static ScriptedLlm from_file(const std::filesystem::path& path);

  std::string complete(std::string_view prompt) override;
  std::string model_tag() const override { return model_; }

 private:
  std::map<std::string, std::string> replies_;
  std::string model_;
};

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const EmbeddingProviderSpec& spec);
std::unique_ptr<LlmProvider> make_llm_provider(const LlmProviderSpec& spec);

/// {"embedding": {...}, "llm": {...}}; either block may be absent. Relative
/// paths resolve against `base_dir`.
struct ProviderConfig {
  std::optional<EmbeddingProviderSpec> embedding;
  std::optional<LlmProviderSpec> llm;
};
ProviderConfig parse_provider_config(std::string_view bytes, const std::filesystem::path& base_dir);

std::string sha256_hex(std::string_view bytes);

/// Lowercase hex digest identifying a cached vector for (model, text).
std::string embedding_cache_key(std::string_view model, std::string_view text);

}  // namespace slidesync
