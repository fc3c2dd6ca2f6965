#include "omg/llm/backend.hpp"

#include <cctype>

#include "omg/core/text.hpp"
#include "omg/error.hpp"

namespace omg {

std::string_view to_string(Provider p) { return p == Provider::Mock ? "mock" : "remote"; }

Provider parse_provider(std::string_view s) {
  if (text::iequals(s, "mock")) return Provider::Mock;
  if (text::iequals(s, "remote") || text::iequals(s, "remote_http") || text::iequals(s, "remotehttp")) {
    return Provider::RemoteHTTP;
  }
  throw Error(ErrorCode::Config, "unknown provider '" + std::string(s) + "'");
}

void ModelBackend::validate() const {
  if (backend_id.empty()) throw Error(ErrorCode::Config, "backend: empty backend_id");
  if (decoding.temperature < 0) throw Error(ErrorCode::Config, "backend " + backend_id + ": negative temperature");
  if (decoding.max_output_tokens <= 0) {
    throw Error(ErrorCode::Config, "backend " + backend_id + ": max_output_tokens must be positive");
  }
  if (provider == Provider::RemoteHTTP) {
    if (!endpoint || endpoint->empty()) throw Error(ErrorCode::Config, "backend " + backend_id + ": missing endpoint");
    if (credential_ref.empty()) throw Error(ErrorCode::Config, "backend " + backend_id + ": missing credential_ref");
  } else if (!script) {
    throw Error(ErrorCode::Config, "backend " + backend_id + ": mock backend without a script");
  }
}

std::string default_credential_ref(std::string_view backend_id) {
  std::string out = "OMG_BACKEND_";
  for (char c : backend_id) {
    auto u = static_cast<unsigned char>(c);
    out += std::isalnum(u) ? static_cast<char>(std::toupper(u)) : '_';
  }
  return out + "_KEY";
}

}  // namespace omg
