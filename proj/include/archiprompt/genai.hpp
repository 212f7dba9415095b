#pragma once

// Boundary to external generative services (text suggestions and
// text-to-image). MockClient is deterministic and never touches the network;
// RemoteClient speaks a small JSON protocol over HTTP(S).

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "archiprompt/errors.hpp"

namespace archiprompt::genai {

ARCHIPROMPT_DEFINE_ERROR(InvalidRequest, validation);
ARCHIPROMPT_DEFINE_ERROR(Timeout, upstream);
ARCHIPROMPT_DEFINE_ERROR(AuthFailure, upstream);
ARCHIPROMPT_DEFINE_ERROR(ProviderError, upstream);

class RateLimited : public Error {
 public:
  RateLimited(const std::string& message, std::chrono::milliseconds retry_after)
      : Error(ErrorCode::upstream, message, {{"retry_after_ms", retry_after.count()}}),
        retry_after_(retry_after) {}
  std::chrono::milliseconds retry_after() const noexcept { return retry_after_; }

 private:
  std::chrono::milliseconds retry_after_;
};

enum class Kind { text, image };
enum class Provider { mock, remote };

std::string_view to_string(Kind kind);
std::string_view to_string(Provider provider);

struct GenRequest {
  Kind kind = Kind::text;
  std::string system_instruction;
  std::string user_content;
  int timeout_ms = 30000;
  std::string model_id;
  // Where image bytes land (remote) or placeholders are written (mock).
  std::filesystem::path artifact_dir;
};

struct GenResult {
  Kind kind = Kind::text;
  std::string content;  // text payload, or the image id for Kind::image
  std::optional<std::filesystem::path> local_path;
  std::int64_t latency_ms = 0;
  Provider provider = Provider::mock;
};

/// Throws InvalidRequest when the request breaks its invariants.
void check_request(const GenRequest& req, Kind expected);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

class Client {
 public:
  virtual ~Client() = default;
  virtual GenResult generate_text(const GenRequest& req) = 0;
  virtual GenResult generate_image(const GenRequest& req) = 0;
  virtual Provider provider() const noexcept = 0;
};

class MockClient final : public Client {
 public:
  explicit MockClient(bool write_placeholders = false) : write_placeholders_(write_placeholders) {}

  GenResult generate_text(const GenRequest& req) override;
  /// image id is "mock-" + 16 hex digits of the prompt hash.
  GenResult generate_image(const GenRequest& req) override;
  Provider provider() const noexcept override { return Provider::mock; }

  static std::string image_id_for(std::string_view prompt);

 private:
  bool write_placeholders_;
};

struct RemoteConfig {
  std::string provider_url;  // http(s)://host[:port]/path
  std::string model_id;
  std::string credential_env = "ARCHIPROMPT_API_KEY";
  int timeout_ms = 30000;
};

/// JSON protocol:
///   POST provider_url  {"model", "kind", "system", "input"}
///   text  -> {"content": "..."}
///   image -> {"image_id": "...", "b64": "..."} or {"image_id", "url"}
/// 401/403 map to AuthFailure, 429 to RateLimited (one retry honoring
/// Retry-After), other failures to ProviderError, socket timeouts to Timeout.
class RemoteClient final : public Client {
 public:
  explicit RemoteClient(RemoteConfig config);

  GenResult generate_text(const GenRequest& req) override;
  GenResult generate_image(const GenRequest& req) override;
  Provider provider() const noexcept override { return Provider::remote; }

  const RemoteConfig& config() const noexcept { return config_; }

 private:
  struct Response {
    std::string body;
    std::int64_t latency_ms;
  };
  Response post(const GenRequest& req);
  Response post_once(const GenRequest& req, const std::string& credential);

  RemoteConfig config_;
};

}  // namespace archiprompt::genai
