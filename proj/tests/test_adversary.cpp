#include <doctest.h>

#include <cmath>

#include "gossip/adversary.hpp"
#include "gossip/protocols.hpp"

using namespace gossip;

namespace {

ObservedSequence senders(std::uint32_t n, std::uint32_t source, std::vector<std::uint32_t> ids) {
  ObservedSequence o{n, NodeId{source}, {}};
  for (auto id : ids) o.entries.push_back({NodeId{id}, NodeId{n - 1}});
  return o;
}

std::vector<NodeId> nodes(std::initializer_list<std::uint32_t> ids) {
  std::vector<NodeId> out;
  for (auto id : ids) out.push_back(NodeId{id});
  return out;
}

}  // namespace

TEST_CASE("observe keeps events to curious receivers in order") {
  const auto cfg = make_config(100, 10, 0.5);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RngStream rng(seed, 0);
    const auto trace = run_async(cfg, rng);
    const auto obs = observe(trace);
    const auto timed = observe_timed(trace);
    REQUIRE(obs.size() == timed.entries.size());
    std::size_t expected = 0;
    for (const auto& e : trace.events) expected += cfg.is_curious(e.receiver);
    CHECK(obs.size() == expected);
    for (std::size_t k = 0; k < obs.size(); ++k) {
      CHECK(cfg.is_curious(obs.entries[k].receiver));
      CHECK(trace.events[timed.entries[k].t] == obs.entries[k]);
      if (k > 0) CHECK(timed.entries[k].t > timed.entries[k - 1].t);
    }
    CHECK(timed.untimed().entries == obs.entries);
    CHECK(obs.true_source == cfg.source);
  }
}

TEST_CASE("map attack picks the first sender inside the prior") {
  RngStream rng(1, 0);
  const auto obs = senders(10, 2, {7, 5, 2, 3});
  const auto prior = nodes({2, 3});
  const auto out = map_attack(obs, prior, rng);
  REQUIRE(out.predicted);
  CHECK(*out.predicted == NodeId{2});
  CHECK(out.correct);
  CHECK(out.rank_of_source == 2u);

  const auto full = nodes({0, 1, 2, 3, 4, 5, 6, 7, 8});
  CHECK(*map_attack(obs, full, rng).predicted == NodeId{7});

  const auto singleton = nodes({2});
  CHECK(map_attack(obs, singleton, rng).correct);
}

TEST_CASE("map attack without a prior member guesses inside the prior") {
  RngStream rng(3, 0);
  const auto obs = senders(10, 1, {7, 8});
  const auto prior = nodes({0, 1});
  int hits[2] = {0, 0};
  for (int i = 0; i < 2000; ++i) {
    const auto out = map_attack(obs, prior, rng);
    REQUIRE(out.predicted);
    REQUIRE(out.predicted->value < 2);
    ++hits[out.predicted->value];
  }
  CHECK(std::abs(hits[0] - 1000) < 150);
  CHECK_THROWS(map_attack(obs, std::vector<NodeId>{}, rng));
}

TEST_CASE("first distinct senders") {
  const auto obs = senders(20, 0, {4, 4, 9, 4, 1, 9, 3});
  CHECK(first_distinct_senders(obs, 3) == nodes({4, 9, 1}));
  CHECK(first_distinct_senders(obs, 10) == nodes({4, 9, 1, 3}));
}

TEST_CASE("multi-rumor attack: most instances, then earliest rank") {
  RngStream rng(1, 0);
  std::vector<ObservedSequence> obs{senders(20, 5, {1, 5, 2}), senders(20, 5, {5, 3}),
                                    senders(20, 5, {6, 7, 5})};
  auto out = multi_rumor_attack(obs, 10, rng);
  CHECK(*out.predicted == NodeId{5});
  CHECK(out.correct);

  // 1 and 2 both appear twice; 2 has the smaller earliest rank
  std::vector<ObservedSequence> tie{senders(20, 2, {1, 2}), senders(20, 2, {2, 1})};
  CHECK(*multi_rumor_attack(tie, 10, rng).predicted == NodeId{2});

  // k truncates membership
  std::vector<ObservedSequence> trunc{senders(20, 0, {1, 2, 3}), senders(20, 0, {4, 5, 3})};
  out = multi_rumor_attack(trunc, 2, rng);
  CHECK(out.predicted->value != 3);

  std::vector<ObservedSequence> empty{senders(20, 0, {}), senders(20, 0, {})};
  CHECK(multi_rumor_attack(empty, 10, rng).abstained());
}

TEST_CASE("multi-rumor full ties are broken uniformly") {
  RngStream rng(8, 0);
  std::vector<ObservedSequence> obs{senders(20, 0, {3}), senders(20, 0, {4})};
  int threes = 0;
  for (int i = 0; i < 2000; ++i) threes += multi_rumor_attack(obs, 10, rng).predicted->value == 3;
  CHECK(std::abs(threes - 1000) < 150);
}

TEST_CASE("silence attack") {
  auto out = silence_attack(senders(20, 4, {4, 9, 9, 1}), 3);
  REQUIRE(out.predicted);
  CHECK(*out.predicted == NodeId{4});
  CHECK(out.correct);

  CHECK(silence_attack(senders(20, 4, {4, 9, 4, 1}), 3).abstained());
  // reappearance after the window does not count
  CHECK(*silence_attack(senders(20, 4, {4, 9, 9, 1, 4}), 3).predicted == NodeId{4});
  CHECK(silence_attack(senders(20, 4, {}), 3).abstained());
  CHECK_THROWS(silence_attack(senders(20, 4, {4}), 0));
}

TEST_CASE("default silence window") {
  CHECK(default_silence_window(256) == static_cast<std::size_t>(std::ceil(std::pow(std::log(256.0), 2))));
  CHECK(default_silence_window(4096) == 70);
}
