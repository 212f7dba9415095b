#include <array>

#include <openssl/evp.h>

#include "archiprompt/genai.hpp"

namespace archiprompt::genai {

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string_view to_string(Kind kind) { return kind == Kind::text ? "text" : "image"; }
std::string_view to_string(Provider provider) { return provider == Provider::mock ? "mock" : "remote"; }

void check_request(const GenRequest& req, Kind expected) {
  if (req.kind != expected)
    throw InvalidRequest(std::string("expected a ") + std::string(to_string(expected)) + " request");
  if (req.user_content.empty()) throw InvalidRequest("user_content must not be empty");
  if (req.timeout_ms < 1) throw InvalidRequest("timeout_ms must be at least 1");
}

}  // namespace archiprompt::genai
