#include <httplib.h>

#include "omg/llm/transport.hpp"

#include <regex>

namespace omg {

namespace {

class HttplibTransport final : public HttpTransport {
 public:
  HttpResponse post_json(const std::string& url, const HeaderList& headers, const std::string& body,
                         std::chrono::milliseconds timeout) override {
    static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)", std::regex::icase);
    std::smatch m;
    if (!std::regex_match(url, m, kUrl)) return {0, {}, "malformed endpoint URL: " + url};
    std::string path = m[2].matched ? m[2].str() : "/";

    httplib::Client client(m[1].str());
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout).count();
    client.set_connection_timeout(static_cast<time_t>(std::max<long long>(secs, 1)), 0);
    client.set_read_timeout(static_cast<time_t>(std::max<long long>(secs, 1)), 0);

    httplib::Headers hs;
    for (const auto& [k, v] : headers) hs.emplace(k, v);
    auto res = client.Post(path, hs, body, "application/json");
    if (!res) return {0, {}, httplib::to_string(res.error())};
    return {res->status, res->body, {}};
  }
};

}  // namespace

std::shared_ptr<HttpTransport> make_http_transport() { return std::make_shared<HttplibTransport>(); }

}  // namespace omg
