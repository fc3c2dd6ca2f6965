#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "omg/llm/mock.hpp"

namespace omg {

enum class Provider { RemoteHTTP, Mock };

std::string_view to_string(Provider p);
Provider parse_provider(std::string_view s);

struct Decoding {
  double temperature = 0.0;
  int max_output_tokens = 1024;
  std::optional<std::int64_t> seed;
};

struct ModelBackend {
  std::string backend_id;
  Provider provider = Provider::Mock;
  std::string model_name;
  Decoding decoding;
  std::optional<std::string> endpoint;  // chat-completions URL
  std::string credential_ref;           // env var holding the API key
  std::shared_ptr<const MockScript> script;

  int max_in_flight = 4;
  double requests_per_second = 0.0;  // <= 0 disables the token bucket
  int burst = 4;

  /// Throws Error{Config} when the provider-specific requirements are unmet.
  void validate() const;
};

/// OMG_BACKEND_<ID>_KEY with the id upper-cased and non-alphanumerics mapped
/// to '_'.
std::string default_credential_ref(std::string_view backend_id);

}  // namespace omg
