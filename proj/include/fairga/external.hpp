//
// Copyright 2026 The fairga Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Predictor backed by an out-of-process model adapter.
//
// Protocol: newline-delimited JSON over the adapter's stdin/stdout or a TCP
// stream, one object per line.
//
//   {"op":"hello"}                         -> {"op":"hello","labels":[...]}
//   {"op":"predict","id":N,"x":[...]}      -> {"op":"probs","id":N,"p":[...]}
//                                          or {"op":"error","id":N,"msg":"..."}
//
// Requests on one connection are serialized.

#ifndef FAIRGA_EXTERNAL_HPP_
#define FAIRGA_EXTERNAL_HPP_

#include <netdb.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <memory>
#include <mutex>
#include <string>

#include "fairga/core.hpp"
#include "fairga/model.hpp"
#include "json.hpp"

namespace fairga {

// A bidirectional line-oriented byte stream.
class LineChannel {
 public:
  virtual ~LineChannel() = default;
  virtual void WriteLine(const std::string& line) = 0;
  // Returns false on end of stream.
  virtual bool ReadLine(std::string& line) = 0;
};

namespace detail {

class FdReader {
 public:
  bool ReadLine(int fd, std::string& line) {
    line.clear();
    while (true) {
      if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
        line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
      }
      char chunk[4096];
      ssize_t got;
      do {
        got = ::read(fd, chunk, sizeof(chunk));
      } while (got < 0 && errno == EINTR);
      if (got <= 0) return false;
      buffer_.append(chunk, static_cast<std::size_t>(got));
    }
  }

 private:
  std::string buffer_;
};

inline bool WriteAll(int fd, const std::string& data, bool socket) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    ssize_t n = socket ? ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL)
                       : ::write(fd, data.data() + sent, data.size() - sent);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

}  // namespace detail

// Runs `/bin/sh -c command` and talks to it over its stdin/stdout.
class ProcessChannel : public LineChannel {
 public:
  explicit ProcessChannel(const std::string& command) {
    ::signal(SIGPIPE, SIG_IGN);
    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0) throw Error(ErrorCode::kAdapterDown, "pipe() failed");
    if (::pipe(from_child) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      throw Error(ErrorCode::kAdapterDown, "pipe() failed");
    }
    pid_ = ::fork();
    if (pid_ < 0) throw Error(ErrorCode::kAdapterDown, "fork() failed");
    if (pid_ == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    write_fd_ = to_child[1];
    read_fd_ = from_child[0];
  }

  ~ProcessChannel() override {
    if (write_fd_ >= 0) ::close(write_fd_);
    if (read_fd_ >= 0) ::close(read_fd_);
    if (pid_ > 0) {
      int status = 0;
      // Closing stdin asks the adapter to exit; do not wait on a stuck one.
      for (int i = 0; i < 50; ++i) {
        if (::waitpid(pid_, &status, WNOHANG) == pid_) return;
        ::usleep(10000);
      }
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, &status, 0);
    }
  }

  void WriteLine(const std::string& line) override {
    if (!detail::WriteAll(write_fd_, line + "\n", false)) {
      throw Error(ErrorCode::kAdapterDown, "adapter process closed its input");
    }
  }

  bool ReadLine(std::string& line) override { return reader_.ReadLine(read_fd_, line); }

 private:
  pid_t pid_ = -1;
  int write_fd_ = -1;
  int read_fd_ = -1;
  detail::FdReader reader_;
};

// Connects to "host:port".
class TcpChannel : public LineChannel {
 public:
  explicit TcpChannel(const std::string& address) {
    const auto colon = address.rfind(':');
    if (colon == std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument, "TCP address must be host:port, got '" + address + "'");
    }
    const std::string host = address.substr(0, colon);
    const std::string port = address.substr(colon + 1);
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0) {
      throw Error(ErrorCode::kAdapterDown, "cannot resolve " + address);
    }
    for (addrinfo* p = res; p != nullptr; p = p->ai_next) {
      fd_ = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
      if (fd_ < 0) continue;
      if (::connect(fd_, p->ai_addr, p->ai_addrlen) == 0) break;
      ::close(fd_);
      fd_ = -1;
    }
    ::freeaddrinfo(res);
    if (fd_ < 0) throw Error(ErrorCode::kAdapterDown, "cannot connect to " + address);
  }

  ~TcpChannel() override {
    if (fd_ >= 0) ::close(fd_);
  }

  void WriteLine(const std::string& line) override {
    if (!detail::WriteAll(fd_, line + "\n", true)) {
      throw Error(ErrorCode::kAdapterDown, "adapter connection closed");
    }
  }

  bool ReadLine(std::string& line) override { return reader_.ReadLine(fd_, line); }

 private:
  int fd_ = -1;
  detail::FdReader reader_;
};

class ExternalPredictor : public Predictor {
 public:
  // Performs the hello handshake; the advertised labels must match the
  // schema's label names.
  ExternalPredictor(std::unique_ptr<LineChannel> channel, FeatureSchema schema)
      : ExternalPredictor(Handshake(*channel), std::move(channel), std::move(schema)) {}

  // `target` is "tcp://host:port" for a socket, otherwise a shell command.
  static std::unique_ptr<ExternalPredictor> Open(const std::string& target, FeatureSchema schema) {
    constexpr std::string_view kTcp = "tcp://";
    std::unique_ptr<LineChannel> channel;
    if (target.rfind(kTcp, 0) == 0) {
      channel = std::make_unique<TcpChannel>(target.substr(kTcp.size()));
    } else {
      channel = std::make_unique<ProcessChannel>(target);
    }
    return std::make_unique<ExternalPredictor>(std::move(channel), std::move(schema));
  }

  static std::string HelloRequest() { return R"({"op":"hello"})"; }

  std::string PredictRequest(std::int64_t id, const Sample& sample) const {
    nlohmann::ordered_json req;
    req["op"] = "predict";
    req["id"] = id;
    auto x = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < sample.size(); ++i) {
      if (const auto* n = std::get_if<NumericValue>(&sample[i])) {
        x.push_back(n->value);
      } else {
        x.push_back(FormatValue(sample[i], SpecAt(schema_, i)));
      }
    }
    req["x"] = std::move(x);
    return req.dump();
  }

 protected:
  std::vector<double> DoPredict(const Sample& sample) const override {
    std::lock_guard<std::mutex> lock(mu_);
    const std::int64_t id = next_id_++;
    channel_->WriteLine(PredictRequest(id, sample));
    std::string line;
    if (!channel_->ReadLine(line)) throw Error(ErrorCode::kAdapterDown, "adapter closed its output");
    nlohmann::json resp;
    try {
      resp = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorCode::kProtocolViolation, "malformed response line: " + line);
    }
    if (!resp.is_object() || !resp.contains("op") || !resp["op"].is_string() || !resp.contains("id") ||
        !resp["id"].is_number_integer()) {
      throw Error(ErrorCode::kProtocolViolation, "response lacks op/id: " + line);
    }
    if (resp["id"].get<std::int64_t>() != id) {
      throw Error(ErrorCode::kProtocolViolation,
                  "response id " + resp["id"].dump() + " does not echo request id " + std::to_string(id));
    }
    const auto op = resp["op"].get<std::string>();
    if (op == "error") {
      const std::string msg = resp.contains("msg") && resp["msg"].is_string() ? resp["msg"].get<std::string>() : "";
      throw Error(ErrorCode::kProtocolViolation, "adapter error for request " + std::to_string(id) + ": " + msg);
    }
    if (op != "probs" || !resp.contains("p") || !resp["p"].is_array()) {
      throw Error(ErrorCode::kProtocolViolation, "unexpected response: " + line);
    }
    std::vector<double> p;
    double sum = 0.0;
    for (const auto& v : resp["p"]) {
      if (!v.is_number()) throw Error(ErrorCode::kProtocolViolation, "non-numeric probability: " + line);
      p.push_back(v.get<double>());
      if (p.back() < 0.0) throw Error(ErrorCode::kProtocolViolation, "negative probability: " + line);
      sum += p.back();
    }
    if (p.size() != labels().size() || std::fabs(sum - 1.0) > 1e-6) {
      throw Error(ErrorCode::kProtocolViolation, "probability vector does not match labels: " + line);
    }
    return p;
  }

 private:
  ExternalPredictor(std::vector<std::string> labels, std::unique_ptr<LineChannel>&& channel, FeatureSchema schema)
      : Predictor(std::move(labels)), channel_(std::move(channel)), schema_(std::move(schema)) {
    if (this->labels() != schema_.label_names) {
      throw Error(ErrorCode::kProtocolViolation, "adapter labels do not match the schema labels");
    }
  }

  static std::vector<std::string> Handshake(LineChannel& channel) {
    channel.WriteLine(HelloRequest());
    std::string line;
    if (!channel.ReadLine(line)) throw Error(ErrorCode::kAdapterDown, "adapter closed before hello");
    try {
      const auto resp = nlohmann::json::parse(line);
      if (resp.at("op") != "hello") throw Error(ErrorCode::kProtocolViolation, "expected hello, got: " + line);
      auto labels = resp.at("labels").get<std::vector<std::string>>();
      if (labels.size() < 2) throw Error(ErrorCode::kProtocolViolation, "adapter advertised fewer than two labels");
      return labels;
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorCode::kProtocolViolation, "malformed hello response: " + line);
    }
  }

  mutable std::mutex mu_;
  mutable std::int64_t next_id_ = 1;
  std::unique_ptr<LineChannel> channel_;
  FeatureSchema schema_;
};

}  // namespace fairga

#endif  // FAIRGA_EXTERNAL_HPP_
