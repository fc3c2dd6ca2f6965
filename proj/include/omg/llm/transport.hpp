#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace omg {

using HeaderList = std::vector<std::pair<std::string, std::string>>;

struct HttpResponse {
  int status = 0;  // 0 when the request never produced an HTTP response
  std::string body;
  std::string error;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post_json(const std::string& url, const HeaderList& headers, const std::string& body,
                                 std::chrono::milliseconds timeout) = 0;
};

/// cpp-httplib client, http and https.
std::shared_ptr<HttpTransport> make_http_transport();

}  // namespace omg
