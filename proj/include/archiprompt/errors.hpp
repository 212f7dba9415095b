#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace archiprompt {

// Error codes surfaced over the HTTP API. Every library error maps to one.
enum class ErrorCode {
  illegal_transition,
  word_limit,
  unknown_role,
  not_found,
  validation,
  upstream,
  conflict,
};

std::string_view to_string(ErrorCode code);
int http_status(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, nlohmann::json detail = nullptr)
      : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

  ErrorCode code() const noexcept { return code_; }
  const nlohmann::json& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  nlohmann::json detail_;
};

#define ARCHIPROMPT_DEFINE_ERROR(Name, Code)                                   \
  class Name : public ::archiprompt::Error {                                  \
   public:                                                                     \
    explicit Name(const std::string& message, nlohmann::json detail = nullptr) \
        : ::archiprompt::Error(::archiprompt::ErrorCode::Code, message,        \
                               std::move(detail)) {}                           \
  }

// Shared by several modules.
ARCHIPROMPT_DEFINE_ERROR(ConfigError, validation);
ARCHIPROMPT_DEFINE_ERROR(NotFound, not_found);

}  // namespace archiprompt
