#include "novelgraph/provider.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <map>
#include <optional>
#include <thread>

#include <httplib.h>

#include "novelgraph/text.hpp"

namespace novelgraph {

using nlohmann::json;

ProviderSpec ProviderSpec::parse(std::string_view spec) {
    ProviderSpec out;
    if (spec == "builtin") return out;
    if (spec.starts_with("builtin:")) {
        try {
            out.dim = std::stoul(std::string(spec.substr(8)));
        } catch (const std::exception&) {
            throw std::invalid_argument("bad builtin provider dimension: " + std::string(spec));
        }
        if (out.dim < 16) throw std::invalid_argument("builtin provider dimension must be >= 16");
        return out;
    }
    if (spec.starts_with("process:")) {
        out.kind = ProviderKind::process;
        out.endpoint = std::string(text::trim(spec.substr(8)));
        if (out.endpoint.empty()) throw std::invalid_argument("process provider needs a command");
        return out;
    }
    if (spec.starts_with("http://")) {
        out.kind = ProviderKind::http;
        out.endpoint = std::string(spec);
        return out;
    }
    throw std::invalid_argument("unrecognized provider spec: " + std::string(spec));
}

std::string ProviderSpec::str() const {
    switch (kind) {
        case ProviderKind::builtin:
            return dim == 256 ? "builtin" : "builtin:" + std::to_string(dim);
        case ProviderKind::process:
            return "process:" + endpoint;
        case ProviderKind::http:
            return endpoint;
    }
    return {};
}

std::string ProviderSpec::id() const {
    if (kind == ProviderKind::builtin) return "builtin-hash-" + std::to_string(dim);
    return (kind == ProviderKind::process ? "process-" : "http-") + text::hex64(text::fnv1a64(endpoint));
}

std::vector<json> WireChannel::call(std::vector<json> requests) {
    std::lock_guard lock(mutex_);
    std::map<long long, std::size_t> index_of;
    for (std::size_t i = 0; i < requests.size(); ++i) {
        const long long id = next_id_++;
        requests[i]["id"] = id;
        index_of[id] = i;
    }
    if (requests.empty()) return {};

    auto responses = exchange(requests);
    std::vector<std::optional<json>> ordered(requests.size());
    for (auto& r : responses) {
        if (!r.is_object()) throw ProviderError("protocol violation: response is not an object");
        std::size_t idx = 0;
        if (r.contains("id") && r["id"].is_number_integer()) {
            const auto it = index_of.find(r["id"].get<long long>());
            if (it == index_of.end()) throw ProviderError("protocol violation: unexpected response id " + r["id"].dump());
            idx = it->second;
        } else if (requests.size() == 1) {
            idx = 0;
        } else {
            throw ProviderError("protocol violation: response without id");
        }
        if (ordered[idx]) throw ProviderError("protocol violation: duplicate response for request " + std::to_string(idx));
        ordered[idx] = std::move(r);
    }
    std::vector<json> out;
    out.reserve(ordered.size());
    for (std::size_t i = 0; i < ordered.size(); ++i) {
        if (!ordered[i]) throw ProviderError("protocol violation: no response for request " + std::to_string(i));
        if (ordered[i]->contains("error")) {
            throw ProviderError("provider rejected request " + std::to_string(i) + ": " +
                                (*ordered[i])["error"].dump());
        }
        out.push_back(std::move(*ordered[i]));
    }
    return out;
}

json WireChannel::call_one(json request) {
    std::vector<json> batch;
    batch.push_back(std::move(request));
    return std::move(call(std::move(batch)).front());
}

ProcessChannel::ProcessChannel(std::string command, std::chrono::milliseconds timeout)
    : command_(std::move(command)), timeout_(timeout) {
    // A provider that dies mid-write must surface as an error, not a signal.
    ::signal(SIGPIPE, SIG_IGN);

    int in_pipe[2];
    int out_pipe[2];
    if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0)
        throw ProviderError(std::string("cannot create provider pipes: ") + std::strerror(errno));
    pid_ = ::fork();
    if (pid_ < 0) throw ProviderError(std::string("cannot start provider: ") + std::strerror(errno));
    if (pid_ == 0) {
        ::dup2(in_pipe[0], STDIN_FILENO);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::close(in_pipe[0]);
        ::close(in_pipe[1]);
        ::close(out_pipe[0]);
        ::close(out_pipe[1]);
        ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];
    ::fcntl(to_child_, F_SETFL, ::fcntl(to_child_, F_GETFL) | O_NONBLOCK);
    ::fcntl(to_child_, F_SETFD, FD_CLOEXEC);
    ::fcntl(from_child_, F_SETFD, FD_CLOEXEC);
}

ProcessChannel::~ProcessChannel() {
    if (to_child_ >= 0) ::close(to_child_);
    if (from_child_ >= 0) ::close(from_child_);
    if (pid_ <= 0) return;
    for (int i = 0; i < 50; ++i) {
        if (::waitpid(pid_, nullptr, WNOHANG) == pid_) return;
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    ::kill(pid_, SIGTERM);
    ::waitpid(pid_, nullptr, 0);
}

std::vector<json> ProcessChannel::exchange(const std::vector<json>& requests) {
    std::string outgoing;
    for (const auto& r : requests) {
        outgoing += r.dump();
        outgoing += '\n';
    }
    std::size_t written = 0;
    std::vector<json> responses;
    const auto deadline = std::chrono::steady_clock::now() + timeout_;

    auto take_lines = [&] {
        std::size_t nl;
        while ((nl = pending_.find('\n')) != std::string::npos) {
            const std::string line = pending_.substr(0, nl);
            pending_.erase(0, nl + 1);
            if (text::trim(line).empty()) continue;
            try {
                responses.push_back(json::parse(line));
            } catch (const json::parse_error&) {
                throw ProviderError("protocol violation: malformed response line: " + line.substr(0, 200));
            }
        }
    };

    while (responses.size() < requests.size()) {
        const auto now = std::chrono::steady_clock::now();
        if (now >= deadline) throw ProviderError("provider timed out after " + std::to_string(timeout_.count()) + " ms");
        const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();

        pollfd fds[2];
        nfds_t nfds = 0;
        fds[nfds++] = {from_child_, POLLIN, 0};
        if (written < outgoing.size()) fds[nfds++] = {to_child_, POLLOUT, 0};
        const int ready = ::poll(fds, nfds, static_cast<int>(remaining));
        if (ready < 0) {
            if (errno == EINTR) continue;
            throw ProviderError(std::string("poll failed: ") + std::strerror(errno));
        }
        if (nfds == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP)) != 0) {
            const auto n = ::write(to_child_, outgoing.data() + written, outgoing.size() - written);
            if (n < 0 && errno != EAGAIN && errno != EINTR)
                throw ProviderError(std::string("provider closed its input: ") + std::strerror(errno));
            if (n > 0) written += static_cast<std::size_t>(n);
        }
        if ((fds[0].revents & (POLLIN | POLLHUP | POLLERR)) != 0) {
            char buf[65536];
            const auto n = ::read(from_child_, buf, sizeof buf);
            if (n < 0 && errno != EINTR) throw ProviderError(std::string("provider read failed: ") + std::strerror(errno));
            if (n == 0) {
                take_lines();
                if (responses.size() < requests.size()) throw ProviderError("provider exited before answering");
                break;
            }
            if (n > 0) {
                pending_.append(buf, static_cast<std::size_t>(n));
                take_lines();
            }
        }
    }
    return responses;
}

HttpChannel::HttpChannel(std::string url, std::chrono::milliseconds timeout) : timeout_(timeout) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw std::invalid_argument("provider URL needs a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    scheme_host_port_ = url.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
}

std::vector<json> HttpChannel::exchange(const std::vector<json>& requests) {
    httplib::Client client(scheme_host_port_);
    const auto secs = timeout_.count() / 1000;
    const auto usecs = (timeout_.count() % 1000) * 1000;
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    std::string body;
    for (const auto& r : requests) {
        body += r.dump();
        body += '\n';
    }
    auto res = client.Post(path_, body, "application/x-ndjson");
    if (!res) throw ProviderError("provider unreachable at " + scheme_host_port_ + ": " + httplib::to_string(res.error()));
    if (res->status != 200) throw ProviderError("provider answered HTTP " + std::to_string(res->status));

    std::vector<json> responses;
    for (const auto& line : text::split(res->body, '\n')) {
        if (text::trim(line).empty()) continue;
        try {
            responses.push_back(json::parse(line));
        } catch (const json::parse_error&) {
            throw ProviderError("protocol violation: malformed response line: " + line.substr(0, 200));
        }
    }
    return responses;
}

std::shared_ptr<WireChannel> open_channel(const ProviderSpec& spec) {
    switch (spec.kind) {
        case ProviderKind::process:
            return std::make_shared<ProcessChannel>(spec.endpoint, spec.timeout);
        case ProviderKind::http:
            return std::make_shared<HttpChannel>(spec.endpoint, spec.timeout);
        case ProviderKind::builtin:
            break;
    }
    throw std::invalid_argument("the builtin provider has no wire channel");
}

}  // namespace novelgraph
