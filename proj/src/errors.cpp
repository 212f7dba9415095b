#include "archiprompt/errors.hpp"

namespace archiprompt {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::illegal_transition: return "illegal_transition";
    case ErrorCode::word_limit: return "word_limit";
    case ErrorCode::unknown_role: return "unknown_role";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::validation: return "validation";
    case ErrorCode::upstream: return "upstream";
    case ErrorCode::conflict: return "conflict";
  }
  return "validation";
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::illegal_transition: return 409;
    case ErrorCode::word_limit: return 422;
    case ErrorCode::unknown_role: return 404;
    case ErrorCode::not_found: return 404;
    case ErrorCode::validation: return 400;
    case ErrorCode::upstream: return 502;
    case ErrorCode::conflict: return 409;
  }
  return 500;
}

}  // namespace archiprompt
