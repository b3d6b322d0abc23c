#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "gossip/core.hpp"

using namespace gossip;

TEST_CASE("philox4x32-10 known answers") {
  using A4 = std::array<std::uint32_t, 4>;
  using A2 = std::array<std::uint32_t, 2>;
  CHECK(RngStream::philox4x32_10(A4{0, 0, 0, 0}, A2{0, 0}) ==
        A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(RngStream::philox4x32_10(A4{~0u, ~0u, ~0u, ~0u}, A2{~0u, ~0u}) ==
        A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(RngStream::philox4x32_10(A4{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                                 A2{0xa4093822, 0x299f31d0}) ==
        A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and independent of opening order") {
  RngStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  std::vector<std::uint64_t> xa, xb, xc, xd;
  for (int i = 0; i < 100; ++i) {
    xa.push_back(a.next_u64());
    xb.push_back(b.next_u64());
    xc.push_back(c.next_u64());
    xd.push_back(d.next_u64());
  }
  CHECK(xa == xb);
  CHECK(xa != xc);
  CHECK(xa != xd);

  const RngStream point(9, 3);
  RngStream t5 = point.trial(5);
  CHECK(t5.stream_index() == (std::uint64_t{3} << 32) + 5);
  RngStream again = RngStream(9, (std::uint64_t{3} << 32) + 5);
  CHECK(t5.next_u64() == again.next_u64());
}

TEST_CASE("uniform_below is uniform (chi-square)") {
  RngStream rng(1, 0);
  for (std::uint64_t bound : {2ull, 7ull, 10ull, 1000ull}) {
    std::vector<double> counts(bound, 0.0);
    const std::uint64_t draws = 2000 * bound;
    for (std::uint64_t i = 0; i < draws; ++i) {
      const auto v = rng.uniform_below(bound);
      REQUIRE(v < bound);
      counts[v] += 1;
    }
    double chi2 = 0;
    for (double c : counts) chi2 += (c - 2000.0) * (c - 2000.0) / 2000.0;
    const double df = bound - 1.0;
    // 99.9% upper quantile via Wilson-Hilferty
    const double z = 3.09;
    const double crit = df * std::pow(1 - 2 / (9 * df) + z * std::sqrt(2 / (9 * df)), 3);
    CHECK_MESSAGE(chi2 < crit, "bound " << bound << " chi2 " << chi2);
  }
}

TEST_CASE("uniform01 range and mean") {
  RngStream rng(5, 5);
  double sum = 0;
  for (int i = 0; i < 200000; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / 200000 - 0.5) < 0.005);
}

TEST_CASE("config validation names the field") {
  auto message = [](GossipConfig c) {
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  GossipConfig ok = make_config(100, 10, 0.5);
  CHECK(message(ok).empty());

  GossipConfig bad_s = ok;
  bad_s.s = 1.5;
  CHECK(message(bad_s).find("s") != std::string::npos);

  GossipConfig bad_f = ok;
  bad_f.f = 99;
  CHECK(message(bad_f).find("f") != std::string::npos);

  GossipConfig curious_source = ok;
  curious_source.source = NodeId{95};
  CHECK(message(curious_source).find("source") != std::string::npos);

  GossipConfig tiny = ok;
  tiny.n = 1;
  tiny.f = 0;
  CHECK_FALSE(message(tiny).empty());
}

TEST_CASE("curious nodes are the top ids") {
  const auto c = make_config(10, 3, 0.0);
  CHECK(c.curious_nodes() == std::vector<NodeId>{NodeId{7}, NodeId{8}, NodeId{9}});
  CHECK(c.honest_nodes().size() == 7);
  CHECK(c.is_curious(NodeId{7}));
  CHECK_FALSE(c.is_curious(NodeId{6}));
  CHECK(curious_count(1024, 0.1) == 102);
  CHECK(curious_count(4096, 0.1) == 410);
  CHECK(curious_count(1000, 0.1) == 100);
}

TEST_CASE("default step cap") {
  const auto c = make_config(1000, 100, 0.0);
  CHECK(c.effective_step_cap() ==
        static_cast<std::uint64_t>(std::ceil(50.0 * 1000 * std::log(1000.0))));
  auto capped = c;
  capped.step_cap = 17;
  CHECK(capped.effective_step_cap() == 17);
}

TEST_CASE("trace violations are detected") {
  ExecutionTrace t;
  t.config = make_config(4, 1, 1.0);
  t.events = {{NodeId{0}, NodeId{1}}, {NodeId{1}, NodeId{2}}, {NodeId{2}, NodeId{3}}};
  CHECK_FALSE(find_trace_violation(t));

  ExecutionTrace bad = t;
  bad.events = {{NodeId{2}, NodeId{1}}};
  CHECK(find_trace_violation(bad));

  std::ostringstream out;
  write_trace_csv(out, t);
  CHECK(out.str() == "step,sender,receiver\n0,0,1\n1,1,2\n2,2,3\n");
}

TEST_CASE("sender rank") {
  ObservedSequence o{8, NodeId{0}, {{NodeId{3}, NodeId{7}}, {NodeId{0}, NodeId{7}}, {NodeId{3}, NodeId{7}}}};
  CHECK(o.sender_rank(NodeId{3}) == 0u);
  CHECK(o.sender_rank(NodeId{0}) == 1u);
  CHECK_FALSE(o.sender_rank(NodeId{5}));
}
