#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <openssl/evp.h>

#include "archiprompt/genai.hpp"

namespace archiprompt::genai {
namespace {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Url split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ProviderError("provider url lacks a scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::string base64_decode(std::string_view in) {
  std::string out(3 * (in.size() / 4) + 3, '\0');
  int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                          reinterpret_cast<const unsigned char*>(in.data()), static_cast<int>(in.size()));
  if (n < 0) throw ProviderError("image payload is not valid base64");
  std::size_t pad = 0;
  for (auto it = in.rbegin(); it != in.rend() && *it == '='; ++it) ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

std::unique_ptr<httplib::Client> make_client(const std::string& origin, int timeout_ms) {
  auto cli = std::make_unique<httplib::Client>(origin);
  if (!cli->is_valid()) throw ProviderError("unsupported provider url: " + origin);
  const auto t = std::chrono::milliseconds(timeout_ms);
  cli->set_connection_timeout(t);
  cli->set_read_timeout(t);
  cli->set_write_timeout(t);
  return cli;
}

[[noreturn]] void throw_transport(httplib::Error err, std::int64_t elapsed_ms, int timeout_ms) {
  const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                         ((err == httplib::Error::Read || err == httplib::Error::Write) &&
                          elapsed_ms + 50 >= timeout_ms);
  if (timed_out)
    throw Timeout("provider did not answer within " + std::to_string(timeout_ms) + " ms",
                  {{"timeout_ms", timeout_ms}});
  throw ProviderError("transport error: " + httplib::to_string(err));
}

std::int64_t ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

RemoteClient::RemoteClient(RemoteConfig config) : config_(std::move(config)) {}

RemoteClient::Response RemoteClient::post_once(const GenRequest& req, const std::string& credential) {
  const auto url = split_url(config_.provider_url);
  auto cli = make_client(url.origin, req.timeout_ms);
  nlohmann::json body{
      {"model", req.model_id.empty() ? config_.model_id : req.model_id},
      {"kind", to_string(req.kind)},
      {"system", req.system_instruction},
      {"input", req.user_content},
  };
  httplib::Headers headers{{"Authorization", "Bearer " + credential}};
  const auto start = std::chrono::steady_clock::now();
  auto res = cli->Post(url.path, headers, body.dump(), "application/json");
  const auto elapsed = ms_since(start);
  if (!res) throw_transport(res.error(), elapsed, req.timeout_ms);

  if (res->status == 401 || res->status == 403)
    throw AuthFailure("provider rejected the credential (HTTP " + std::to_string(res->status) + ")");
  if (res->status == 429) {
    long long seconds = 1;
    if (res->has_header("Retry-After")) {
      try {
        seconds = std::stoll(res->get_header_value("Retry-After"));
      } catch (const std::exception&) {
      }
    }
    throw RateLimited("provider rate limit hit", std::chrono::seconds(std::max(0LL, seconds)));
  }
  if (res->status < 200 || res->status >= 300)
    throw ProviderError("provider answered HTTP " + std::to_string(res->status),
                        {{"status", res->status}, {"body", res->body.substr(0, 512)}});
  return {res->body, elapsed};
}

RemoteClient::Response RemoteClient::post(const GenRequest& req) {
  const char* credential = std::getenv(config_.credential_env.c_str());
  if (!credential || !*credential)
    throw AuthFailure("credential environment variable " + config_.credential_env + " is not set");
  try {
    return post_once(req, credential);
  } catch (const RateLimited& e) {
    std::this_thread::sleep_for(e.retry_after());
    return post_once(req, credential);
  }
}

GenResult RemoteClient::generate_text(const GenRequest& req) {
  check_request(req, Kind::text);
  auto resp = post(req);
  nlohmann::json j = nlohmann::json::parse(resp.body, nullptr, false);
  if (j.is_discarded() || !j.contains("content") || !j["content"].is_string())
    throw ProviderError("provider response lacks a string 'content' field");
  GenResult r;
  r.kind = Kind::text;
  r.content = j["content"].get<std::string>();
  r.latency_ms = resp.latency_ms;
  r.provider = Provider::remote;
  return r;
}

GenResult RemoteClient::generate_image(const GenRequest& req) {
  check_request(req, Kind::image);
  auto resp = post(req);
  nlohmann::json j = nlohmann::json::parse(resp.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ProviderError("provider response is not a JSON object");

  GenResult r;
  r.kind = Kind::image;
  r.provider = Provider::remote;
  r.latency_ms = resp.latency_ms;
  r.content = j.value("image_id", "remote-" + sha256_hex(req.user_content).substr(0, 16));

  std::string bytes;
  if (j.contains("b64") && j["b64"].is_string()) {
    bytes = base64_decode(j["b64"].get<std::string>());
  } else if (j.contains("url") && j["url"].is_string()) {
    const auto url = split_url(j["url"].get<std::string>());
    auto cli = make_client(url.origin, req.timeout_ms);
    const auto start = std::chrono::steady_clock::now();
    auto res = cli->Get(url.path);
    if (!res) throw_transport(res.error(), ms_since(start), req.timeout_ms);
    if (res->status != 200) throw ProviderError("image download answered HTTP " + std::to_string(res->status));
    bytes = std::move(res->body);
  } else {
    throw ProviderError("provider response has neither 'b64' nor 'url'");
  }

  if (!req.artifact_dir.empty()) {
    std::filesystem::create_directories(req.artifact_dir);
    auto path = req.artifact_dir / (r.content + ".png");
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    r.local_path = path;
  }
  return r;
}

}  // namespace archiprompt::genai
