#pragma once

#include <chrono>
#include <string>

#include <nlohmann/json.hpp>

namespace ripple {

struct RetryPolicy {
    int max_attempts = 4;
    std::chrono::milliseconds initial_backoff{200};
    double backoff_factor = 2.0;
    std::chrono::seconds timeout{60};
};

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;    // begins with '/'
};

/// Splits an absolute http(s) URL. Throws ArgumentError on anything else.
SplitUrl split_url(const std::string& url);

/// POSTs a JSON body with bearer auth (if `api_key` is non-empty) and returns
/// the parsed JSON reply. Connection failures, 429 and 5xx are retried with
/// exponential backoff; other non-2xx statuses fail immediately. Throws
/// TransportError when no usable reply arrives.
nlohmann::json post_json(const std::string& url, const nlohmann::json& body,
                         const std::string& api_key, const RetryPolicy& policy);

/// Value of an environment variable, or empty.
std::string env_or_empty(const char* name);

}  // namespace ripple
