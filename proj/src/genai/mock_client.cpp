#include <fstream>

#include "archiprompt/genai.hpp"

namespace archiprompt::genai {

GenResult MockClient::generate_text(const GenRequest& req) {
  check_request(req, Kind::text);
  // Length-prefixing keeps ("ab","c") and ("a","bc") apart.
  const auto key = std::to_string(req.system_instruction.size()) + ":" + req.system_instruction +
                   req.user_content;
  GenResult r;
  r.kind = Kind::text;
  r.content = "mock-text-" + sha256_hex(key).substr(0, 16);
  r.provider = Provider::mock;
  return r;
}

std::string MockClient::image_id_for(std::string_view prompt) {
  return "mock-" + sha256_hex(prompt).substr(0, 16);
}

GenResult MockClient::generate_image(const GenRequest& req) {
  check_request(req, Kind::image);
  GenResult r;
  r.kind = Kind::image;
  r.content = image_id_for(req.user_content);
  r.provider = Provider::mock;
  if (write_placeholders_ && !req.artifact_dir.empty()) {
    std::filesystem::create_directories(req.artifact_dir);
    auto path = req.artifact_dir / (r.content + ".txt");
    std::ofstream(path) << "placeholder image for prompt:\n" << req.user_content << "\n";
    r.local_path = path;
  }
  return r;
}

}  // namespace archiprompt::genai
