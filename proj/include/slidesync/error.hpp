#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace slidesync {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input bytes are not well-formed JSON. `offset()` is the byte position
/// reported by the parser.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Well-formed JSON that violates a schema rule.
class SchemaError : public Error {
 public:
  SchemaError(std::string field, std::string rule)
      : Error(field + ": " + rule), field_(std::move(field)), rule_(std::move(rule)) {}
  const std::string& field() const noexcept { return field_; }
  const std::string& rule() const noexcept { return rule_; }

 private:
  std::string field_;
  std::string rule_;
};

class ProviderError : public Error {
 public:
  using Error::Error;
};

/// Raised by the scripted LLM provider when a prompt has no recorded reply.
class UnscriptedPromptError : public ProviderError {
 public:
  explicit UnscriptedPromptError(const std::string& digest)
      : ProviderError("unscripted prompt (sha256 " + digest + ")") {}
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace slidesync
