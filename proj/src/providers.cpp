#include "slidesync/providers.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "json_util.hpp"
#include "slidesync/error.hpp"
#include "slidesync/ingest.hpp"
#include "slidesync/kernels/kernels.hpp"
#include "slidesync/text.hpp"

namespace slidesync {

namespace fs = std::filesystem;
using detail::json;

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string embedding_cache_key(std::string_view model, std::string_view text) {
  std::string material(model);
  material.push_back('\n');
  material.append(text);
  return sha256_hex(material);
}

namespace {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

void normalize_in_place(Embedding& v) {
  const double norm = std::sqrt(kernels::dot(v, v));
  if (norm == 0) return;
  for (auto& x : v) x /= norm;
}

void check_text_size(std::span<const std::string> texts) {
  for (const auto& t : texts)
    if (t.size() > kMaxEmbedTextBytes) throw ProviderError("embedding input exceeds 8192 bytes");
}

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ProviderError("endpoint_url must include a scheme: " + url);
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

/// POSTs a JSON body, retrying transport failures and 5xx responses.
json post_json(const std::string& url, const json& body, double timeout_s, int max_retries) {
  const Endpoint ep = split_url(url);
  httplib::Headers headers;
  if (const char* token = std::getenv(kApiTokenEnv); token && *token)
    headers.emplace("Authorization", std::string("Bearer ") + token);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::duration<double>(timeout_s));
  const std::string payload = body.dump();

  std::string last_error;
  const int attempts = std::max(0, max_retries) + 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(50 * attempt));
    httplib::Client client(ep.origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    auto res = client.Post(ep.path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) throw ProviderError(url + " returned HTTP " + std::to_string(res->status));
    try {
      return json::parse(res->body);
    } catch (const json::parse_error& e) {
      throw ProviderError(std::string("protocol error: response is not JSON: ") + e.what());
    }
  }
  throw ProviderError(url + ": " + last_error + " after " + std::to_string(attempts) + " attempt(s)");
}

std::optional<Embedding> read_cached(const fs::path& dir, const std::string& key, std::size_t dim) {
  const fs::path file = dir / (key + ".json");
  std::error_code ec;
  if (!fs::exists(file, ec)) return std::nullopt;
  try {
    const json j = json::parse(read_file(file));
    Embedding v = j.at("vector").get<Embedding>();
    if (v.size() != dim) throw ProviderError("cached vector " + file.string() + " has wrong dimension");
    return v;
  } catch (const json::exception& e) {
    throw ProviderError("corrupt cache entry " + file.string() + ": " + e.what());
  }
}

void write_cached(const fs::path& dir, const std::string& key, const Embedding& v) {
  write_file_atomic(dir / (key + ".json"), json{{"vector", v}}.dump());
}

class CachedEmbedder final : public EmbeddingProvider {
 public:
  explicit CachedEmbedder(EmbeddingProviderSpec spec) : spec_(std::move(spec)) {}

  std::vector<Embedding> embed(std::span<const std::string> texts) override {
    check_text_size(texts);
    std::vector<Embedding> out(texts.size());
    std::vector<std::size_t> missing;
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (texts[i].empty()) {
        out[i].assign(spec_.vector_dim, 0.0);
        continue;
      }
      std::optional<Embedding> hit;
      if (spec_.cache_path) hit = read_cached(*spec_.cache_path, embedding_cache_key(spec_.model_name, texts[i]), spec_.vector_dim);
      if (hit) {
        out[i] = std::move(*hit);
      } else {
        missing.push_back(i);
      }
    }
    if (missing.empty()) return out;
    if (spec_.kind == EmbeddingProviderKind::file)
      throw ProviderError("no cached embedding for text \"" + texts[missing.front()].substr(0, 60) + "\"");

    json body = {{"model", spec_.model_name}, {"texts", json::array()}};
    for (auto i : missing) body["texts"].push_back(texts[i]);
    const json reply = post_json(spec_.endpoint_url, body, spec_.timeout_s, spec_.max_retries);
    if (!reply.contains("vectors") || !reply["vectors"].is_array() || reply["vectors"].size() != missing.size())
      throw ProviderError("protocol error: expected " + std::to_string(missing.size()) + " vectors");
    for (std::size_t k = 0; k < missing.size(); ++k) {
      const json& jv = reply["vectors"][k];
      if (!jv.is_array() || jv.size() != spec_.vector_dim)
        throw ProviderError("protocol error: vector dimension mismatch (expected " + std::to_string(spec_.vector_dim) + ")");
      Embedding v;
      v.reserve(spec_.vector_dim);
      for (const auto& x : jv) {
        if (!x.is_number()) throw ProviderError("protocol error: non-numeric vector component");
        v.push_back(x.get<double>());
      }
      normalize_in_place(v);
      if (spec_.cache_path) write_cached(*spec_.cache_path, embedding_cache_key(spec_.model_name, texts[missing[k]]), v);
      out[missing[k]] = std::move(v);
    }
    return out;
  }

  std::string model_tag() const override { return spec_.model_name; }
  std::size_t dimension() const override { return spec_.vector_dim; }

 private:
  EmbeddingProviderSpec spec_;
};

class HttpLlm final : public LlmProvider {
 public:
  explicit HttpLlm(LlmProviderSpec spec) : spec_(std::move(spec)) {}

  std::string complete(std::string_view prompt) override {
    if (prompt.size() > kMaxPromptBytes) throw ProviderError("prompt exceeds 32 KiB");
    const json body = {{"model", spec_.model_name}, {"prompt", std::string(prompt)}, {"temperature", 0}};
    const json reply = post_json(spec_.endpoint_url, body, spec_.timeout_s, spec_.max_retries);
    if (!reply.contains("text") || !reply["text"].is_string()) throw ProviderError("protocol error: response lacks \"text\"");
    return reply["text"].get<std::string>();
  }

  std::string model_tag() const override { return spec_.model_name; }

 private:
  LlmProviderSpec spec_;
};

}  // namespace

Embedding hashing_embedding(std::string_view text, std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("hashing_embedding: dim must be positive");
  Embedding v(dim, 0.0);
  if (text.empty()) return v;
  const auto cps = to_codepoints(text);
  auto add = [&](std::span<const std::uint32_t> gram) {
    const std::uint64_t h = fnv1a64(from_codepoints(gram));
    v[h % dim] += (h >> 63) ? -1.0 : 1.0;
  };
  if (cps.size() < 3) {
    add(cps);
  } else {
    for (std::size_t i = 0; i + 3 <= cps.size(); ++i) add(std::span(cps).subspan(i, 3));
  }
  normalize_in_place(v);
  return v;
}

HashingEmbedder::HashingEmbedder(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw std::invalid_argument("hashing embedder requires vector_dim > 0");
}

std::vector<Embedding> HashingEmbedder::embed(std::span<const std::string> texts) {
  check_text_size(texts);
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(hashing_embedding(t, dim_));
  return out;
}

std::string HashingEmbedder::model_tag() const { return "hashing-char3-d" + std::to_string(dim_); }

ScriptedLlm::ScriptedLlm(std::map<std::string, std::string> replies, std::string model)
    : replies_(std::move(replies)), model_(std::move(model)) {}

ScriptedLlm ScriptedLlm::from_file(const fs::path& path) {
  const json root = detail::parse_json(read_file(path));
  if (!root.is_object()) throw SchemaError(path.string(), "scripted replies must be an object");
  std::map<std::string, std::string> replies;
  for (const auto& [k, v] : root.items()) {
    if (!v.is_string()) throw SchemaError(path.string() + "." + k, "reply must be a string");
    replies.emplace(k, v.get<std::string>());
  }
  return ScriptedLlm(std::move(replies), "scripted:" + path.filename().string());
}

std::string ScriptedLlm::complete(std::string_view prompt) {
  if (prompt.size() > kMaxPromptBytes) throw ProviderError("prompt exceeds 32 KiB");
  const std::string digest = sha256_hex(prompt);
  auto it = replies_.find(digest);
  if (it == replies_.end()) throw UnscriptedPromptError(digest);
  return it->second;
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const EmbeddingProviderSpec& spec) {
  if (spec.vector_dim == 0) throw SchemaError("embedding.vector_dim", "must be positive");
  switch (spec.kind) {
    case EmbeddingProviderKind::hashing:
      return std::make_unique<HashingEmbedder>(spec.vector_dim);
    case EmbeddingProviderKind::file:
      if (!spec.cache_path) throw SchemaError("embedding.cache_path", "required for kind file");
      return std::make_unique<CachedEmbedder>(spec);
    case EmbeddingProviderKind::http:
      if (spec.endpoint_url.empty()) throw SchemaError("embedding.endpoint_url", "required for kind http");
      return std::make_unique<CachedEmbedder>(spec);
  }
  throw SchemaError("embedding.kind", "unknown provider kind");
}

std::unique_ptr<LlmProvider> make_llm_provider(const LlmProviderSpec& spec) {
  switch (spec.kind) {
    case LlmProviderKind::scripted:
      if (!spec.script_path) throw SchemaError("llm.script_path", "required for kind scripted");
      return std::make_unique<ScriptedLlm>(ScriptedLlm::from_file(*spec.script_path));
    case LlmProviderKind::http:
      if (spec.endpoint_url.empty()) throw SchemaError("llm.endpoint_url", "required for kind http");
      return std::make_unique<HttpLlm>(spec);
  }
  throw SchemaError("llm.kind", "unknown provider kind");
}

ProviderConfig parse_provider_config(std::string_view bytes, const fs::path& base_dir) {
  const json root = detail::parse_json(bytes);
  if (!root.is_object()) throw SchemaError("provider_config", "must be an object");
  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : (base_dir / path).lexically_normal();
  };
  auto number_or = [](const json& obj, const char* key, const std::string& ctx, double fallback) {
    auto it = obj.find(key);
    return it == obj.end() ? fallback : detail::as_number(*it, ctx + "." + key);
  };

  ProviderConfig cfg;
  if (auto e = root.find("embedding"); e != root.end() && !e->is_null()) {
    EmbeddingProviderSpec spec;
    const std::string kind = detail::require_string(*e, "kind", "embedding");
    if (kind == "http") spec.kind = EmbeddingProviderKind::http;
    else if (kind == "file") spec.kind = EmbeddingProviderKind::file;
    else if (kind == "hashing") spec.kind = EmbeddingProviderKind::hashing;
    else throw SchemaError("embedding.kind", "must be http, file or hashing");
    spec.endpoint_url = detail::optional_string(*e, "endpoint_url", "embedding");
    spec.model_name = detail::optional_string(*e, "model", "embedding", spec.model_name);
    const double dim = number_or(*e, "vector_dim", "embedding", static_cast<double>(spec.vector_dim));
    if (dim < 1 || dim != std::floor(dim)) throw SchemaError("embedding.vector_dim", "must be a positive integer");
    spec.vector_dim = static_cast<std::size_t>(dim);
    if (auto c = detail::optional_string(*e, "cache_path", "embedding"); !c.empty()) spec.cache_path = resolve(c);
    spec.timeout_s = number_or(*e, "timeout", "embedding", spec.timeout_s);
    spec.max_retries = static_cast<int>(number_or(*e, "max_retries", "embedding", spec.max_retries));
    if (spec.kind == EmbeddingProviderKind::http && spec.endpoint_url.empty())
      throw SchemaError("embedding.endpoint_url", "required for kind http");
    if (spec.kind == EmbeddingProviderKind::file && !spec.cache_path)
      throw SchemaError("embedding.cache_path", "required for kind file");
    cfg.embedding = spec;
  }
  if (auto l = root.find("llm"); l != root.end() && !l->is_null()) {
    LlmProviderSpec spec;
    const std::string kind = detail::require_string(*l, "kind", "llm");
    if (kind == "http") spec.kind = LlmProviderKind::http;
    else if (kind == "scripted") spec.kind = LlmProviderKind::scripted;
    else throw SchemaError("llm.kind", "must be http or scripted");
    spec.endpoint_url = detail::optional_string(*l, "endpoint_url", "llm");
    spec.model_name = detail::optional_string(*l, "model", "llm");
    if (auto s = detail::optional_string(*l, "script_path", "llm"); !s.empty()) spec.script_path = resolve(s);
    spec.timeout_s = number_or(*l, "timeout", "llm", spec.timeout_s);
    spec.max_retries = static_cast<int>(number_or(*l, "max_retries", "llm", spec.max_retries));
    if (spec.kind == LlmProviderKind::http && spec.endpoint_url.empty())
      throw SchemaError("llm.endpoint_url", "required for kind http");
    if (spec.kind == LlmProviderKind::scripted && !spec.script_path)
      throw SchemaError("llm.script_path", "required for kind scripted");
    cfg.llm = spec;
  }
  return cfg;
}

}  // namespace slidesync
