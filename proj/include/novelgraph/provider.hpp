#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

// Client side of the model-provider wire protocol: newline-delimited JSON
// requests, each carrying an integer "id" that its response echoes. Ops:
//   {"op":"dim"}                              -> {"dim":N}
//   {"op":"embed","id":k,"text":s}            -> {"id":k,"vector":[...]}
//   {"op":"summarize","id":k,"sentences":[]}  -> {"id":k,"summary":s}
//   {"op":"tag","id":k,"text":s}              -> {"id":k,"spans":[[b,e],...]}
// An {"id":k,"error":msg} response fails request k.
namespace novelgraph {

class ProviderError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ProviderKind { builtin, process, http };

struct ProviderSpec {
    ProviderKind kind = ProviderKind::builtin;
    std::string endpoint;  // shell command for process, URL for http
    std::size_t dim = 256;  // builtin only
    std::chrono::milliseconds timeout{30000};

    // "builtin", "builtin:<dim>", "process:<command>", "http://host:port/path".
    static ProviderSpec parse(std::string_view spec);
    std::string str() const;
    // Stable identifier used to key the vector cache.
    std::string id() const;
};

class WireChannel {
public:
    virtual ~WireChannel() = default;

    // Assigns ids, sends every request and returns the responses in request
    // order regardless of arrival order. Throws ProviderError on timeouts,
    // malformed or missing responses, and error responses.
    std::vector<nlohmann::json> call(std::vector<nlohmann::json> requests);
    nlohmann::json call_one(nlohmann::json request);

protected:
    // Raw transport: deliver one line per request, collect `requests.size()`
    // response objects in any order.
    virtual std::vector<nlohmann::json> exchange(const std::vector<nlohmann::json>& requests) = 0;

private:
    std::mutex mutex_;
    long long next_id_ = 0;
};

// Runs `/bin/sh -c command` and talks over its stdin/stdout.
class ProcessChannel final : public WireChannel {
public:
    ProcessChannel(std::string command, std::chrono::milliseconds timeout);
    ~ProcessChannel() override;
    ProcessChannel(const ProcessChannel&) = delete;
    ProcessChannel& operator=(const ProcessChannel&) = delete;

protected:
    std::vector<nlohmann::json> exchange(const std::vector<nlohmann::json>& requests) override;

private:
    std::string command_;
    std::chrono::milliseconds timeout_;
    int pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string pending_;  // partial line carried between reads
};

// POSTs the newline-delimited batch to a local endpoint; the body of the reply
// holds one response per line.
class HttpChannel final : public WireChannel {
public:
    HttpChannel(std::string url, std::chrono::milliseconds timeout);

protected:
    std::vector<nlohmann::json> exchange(const std::vector<nlohmann::json>& requests) override;

private:
    std::string scheme_host_port_;
    std::string path_;
    std::chrono::milliseconds timeout_;
};

std::shared_ptr<WireChannel> open_channel(const ProviderSpec& spec);

}  // namespace novelgraph
