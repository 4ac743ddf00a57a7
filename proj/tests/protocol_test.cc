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

#include <arpa/inet.h>
#include <netinet/in.h>

#include <deque>
#include <thread>

#include "fairga/engine.hpp"
#include "fairga/external.hpp"
#include "fairga/records.hpp"
#include "gtest/gtest.h"
#include "support/test_util.hpp"

#ifndef FAIRGA_FAKE_ADAPTER
#error "FAIRGA_FAKE_ADAPTER must name the fake adapter binary"
#endif

namespace fairga {
namespace {

using ::fairga::testing::MakeSample;
using ::fairga::testing::ToySchema;

// Replays canned responses and records every request line.
class ScriptedChannel : public LineChannel {
 public:
  ScriptedChannel(std::deque<std::string> replies, std::vector<std::string>* sent)
      : replies_(std::move(replies)), sent_(sent) {}
  void WriteLine(const std::string& line) override { sent_->push_back(line); }
  bool ReadLine(std::string& line) override {
    if (replies_.empty()) return false;
    line = replies_.front();
    replies_.pop_front();
    return true;
  }

 private:
  std::deque<std::string> replies_;
  std::vector<std::string>* sent_;
};

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

std::unique_ptr<ExternalPredictor> Scripted(std::deque<std::string> replies, std::vector<std::string>* sent) {
  return std::make_unique<ExternalPredictor>(std::make_unique<ScriptedChannel>(std::move(replies), sent), ToySchema());
}

const char kHello[] = R"({"op":"hello","labels":["<=50K",">50K"]})";

TEST(ProtocolTest, GoldenTranscript) {
  std::vector<std::string> sent;
  auto f = Scripted({kHello, R"({"op":"probs","id":1,"p":[0.25,0.75]})", R"({"op":"probs","id":2,"p":[0.9,0.1]})"},
                    &sent);
  EXPECT_EQ(f->labels(), (std::vector<std::string>{"<=50K", ">50K"}));
  EXPECT_EQ(f->PredictProba(MakeSample({CategoryRef{1}, CategoryRef{2}, NumericValue{40}})),
            (std::vector<double>{0.25, 0.75}));
  EXPECT_EQ(f->PredictLabel(MakeSample({CategoryRef{0}, CategoryRef{0}, NumericValue{7}})), 0u);
  ASSERT_EQ(sent.size(), 3u);
  EXPECT_EQ(sent[0], R"({"op":"hello"})");
  EXPECT_EQ(sent[1], R"({"op":"predict","id":1,"x":["male","doctor",40]})");
  EXPECT_EQ(sent[2], R"({"op":"predict","id":2,"x":["female","teacher",7]})");
}

TEST(ProtocolTest, TextRequestCarriesTokens) {
  std::vector<std::string> sent;
  ExternalPredictor f(std::make_unique<ScriptedChannel>(
                          std::deque<std::string>{R"({"op":"hello","labels":["neg","pos"]})",
                                                  R"({"op":"probs","id":1,"p":[0.5,0.5]})"},
                          &sent),
                      TextSchema({"neg", "pos"}));
  f.PredictProba(MakeSample({TokenWord{"great"}, TokenWord{"film"}}));
  EXPECT_EQ(sent[1], R"({"op":"predict","id":1,"x":["great","film"]})");
}

TEST(ProtocolTest, MismatchedIdIsAViolation) {
  std::vector<std::string> sent;
  auto f = Scripted({kHello, R"({"op":"probs","id":7,"p":[0.5,0.5]})"}, &sent);
  EXPECT_EQ(CodeOf([&] { f->PredictProba(MakeSample({CategoryRef{0}, CategoryRef{0}, NumericValue{1}})); }),
            ErrorCode::kProtocolViolation);
}

TEST(ProtocolTest, MalformedAndInvalidResponses) {
  const auto x = MakeSample({CategoryRef{0}, CategoryRef{0}, NumericValue{1}});
  for (const char* bad : {"{not json", R"({"op":"probs","id":1})", R"({"op":"probs","id":1,"p":[0.5]})",
                          R"({"op":"probs","id":1,"p":[0.5,0.6]})", R"({"op":"probs","id":1,"p":[-0.5,1.5]})",
                          R"({"op":"probs","id":1,"p":["a","b"]})", R"({"op":"error","id":1,"msg":"boom"})",
                          R"({"op":"what","id":1})", R"([1,2])"}) {
    std::vector<std::string> sent;
    auto f = Scripted({kHello, bad}, &sent);
    EXPECT_EQ(CodeOf([&] { f->PredictProba(x); }), ErrorCode::kProtocolViolation) << bad;
  }
}

TEST(ProtocolTest, HandshakeFailures) {
  std::vector<std::string> sent;
  EXPECT_EQ(CodeOf([&] { Scripted({}, &sent); }), ErrorCode::kAdapterDown);
  EXPECT_EQ(CodeOf([&] { Scripted({"garbage"}, &sent); }), ErrorCode::kProtocolViolation);
  EXPECT_EQ(CodeOf([&] { Scripted({R"({"op":"hello","labels":["a","b"]})"}, &sent); }),
            ErrorCode::kProtocolViolation);
  EXPECT_EQ(CodeOf([&] { Scripted({R"({"op":"hello","labels":["only"]})"}, &sent); }),
            ErrorCode::kProtocolViolation);
}

TEST(ProtocolTest, ClosedStreamIsAdapterDown) {
  std::vector<std::string> sent;
  auto f = Scripted({kHello}, &sent);
  EXPECT_EQ(CodeOf([&] { f->PredictProba(MakeSample({CategoryRef{0}, CategoryRef{0}, NumericValue{1}})); }),
            ErrorCode::kAdapterDown);
}

std::string Adapter(const std::string& args = "") { return std::string(FAIRGA_FAKE_ADAPTER) + " " + args; }

TEST(ProcessAdapterTest, PredictsThroughChildProcess) {
  auto f = ExternalPredictor::Open(Adapter(), ToySchema());
  const auto male = MakeSample({CategoryRef{1}, CategoryRef{0}, NumericValue{40}});
  const auto female = MakeSample({CategoryRef{0}, CategoryRef{0}, NumericValue{40}});
  for (int i = 0; i < 50; ++i) {
    EXPECT_NEAR(f->PredictProba(male)[1], 0.7, 1e-12);
    EXPECT_EQ(f->PredictLabel(female), 0u);
  }
  EXPECT_EQ(f->query_count(), 100u);
}

// The adapter's label depends only on sex, so every finding must reproduce
// and every seed leads to a finding.
TEST(ProcessAdapterTest, EngineRunThroughAdapter) {
  const auto schema = ToySchema();
  auto f = ExternalPredictor::Open(Adapter(), schema);
  Dataset X{schema, {}, {}};
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    X.samples.push_back(RandomSample(schema, rng));
    X.labels.push_back(0);
  }
  SearchSpace space(schema, {"sex"});
  ExplainerConfig xc;
  xc.n_perturb = 200;
  SurrogateExplainer g(schema, xc);
  EngineConfig c;
  c.epsilon = 3;
  c.max_generations = 5;
  const auto r = ::fairga::Run(X, space, *f, g, c);
  ASSERT_FALSE(r.records.empty());
  EXPECT_EQ(r.metrics.dsn, r.metrics.tsn);
  EXPECT_TRUE(RecheckRecords(r.records, *f, schema).all_verified());
}

TEST(ProcessAdapterTest, ViolationsFromChildProcess) {
  const auto x = MakeSample({CategoryRef{1}, CategoryRef{0}, NumericValue{40}});
  for (const char* mode : {"bad-id", "garbage", "error", "wrong-sum"}) {
    auto f = ExternalPredictor::Open(Adapter(std::string("--mode ") + mode), ToySchema());
    EXPECT_EQ(CodeOf([&] { f->PredictProba(x); }), ErrorCode::kProtocolViolation) << mode;
  }
  auto f = ExternalPredictor::Open(Adapter("--mode exit-after-hello"), ToySchema());
  EXPECT_EQ(CodeOf([&] { f->PredictProba(x); }), ErrorCode::kAdapterDown);
  EXPECT_EQ(CodeOf([&] { ExternalPredictor::Open(Adapter("--labels x,y"), ToySchema()); }),
            ErrorCode::kProtocolViolation);
  EXPECT_EQ(CodeOf([&] { ExternalPredictor::Open("/nonexistent/adapter", ToySchema()); }), ErrorCode::kAdapterDown);
}

TEST(TcpAdapterTest, PredictsOverSocket) {
  const int listener = ::socket(AF_INET, SOCK_STREAM, 0);
  ASSERT_GE(listener, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  ASSERT_EQ(::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)), 0);
  ASSERT_EQ(::listen(listener, 1), 0);
  socklen_t len = sizeof(addr);
  ::getsockname(listener, reinterpret_cast<sockaddr*>(&addr), &len);
  const int port = ntohs(addr.sin_port);

  std::thread server([listener] {
    const int conn = ::accept(listener, nullptr, nullptr);
    detail::FdReader reader;
    std::string line;
    while (reader.ReadLine(conn, line)) {
      const auto req = nlohmann::json::parse(line);
      nlohmann::ordered_json resp;
      if (req["op"] == "hello") {
        resp["op"] = "hello";
        resp["labels"] = {"<=50K", ">50K"};
      } else {
        resp["op"] = "probs";
        resp["id"] = req["id"];
        resp["p"] = {0.1, 0.9};
      }
      detail::WriteAll(conn, resp.dump() + "\n", true);
    }
    ::close(conn);
  });
  {
    auto f = ExternalPredictor::Open("tcp://127.0.0.1:" + std::to_string(port), ToySchema());
    EXPECT_EQ(f->PredictLabel(MakeSample({CategoryRef{0}, CategoryRef{0}, NumericValue{3}})), 1u);
  }
  server.join();
  ::close(listener);
  EXPECT_EQ(CodeOf([&] { ExternalPredictor::Open("tcp://127.0.0.1:" + std::to_string(port), ToySchema()); }),
            ErrorCode::kAdapterDown);
}

}  // namespace
}  // namespace fairga
