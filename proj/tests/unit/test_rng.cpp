#include <array>
#include <set>

#include "doctest.h"
#include "pcgswarm/rng.hpp"

using pcgswarm::RngStream;

TEST_SUITE("rng") {
  TEST_CASE("same seed gives the same sequence") {
    RngStream a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  }

  TEST_CASE("draw n depends only on seed and counter") {
    RngStream a(7);
    for (int i = 0; i < 10; ++i) a.next_u64();
    RngStream b(7, 10);
    CHECK(a.next_u64() == b.next_u64());
  }

  TEST_CASE("children are independent of later parent draws") {
    RngStream parent(99);
    const RngStream before = parent.split("env", 3);
    for (int i = 0; i < 50; ++i) parent.next_u64();
    RngStream after = parent.split("env", 3);
    RngStream copy = before;
    for (int i = 0; i < 20; ++i) CHECK(copy.next_u64() == after.next_u64());
  }

  TEST_CASE("distinct labels and indices give distinct streams") {
    RngStream root(1);
    std::set<std::uint64_t> firsts;
    for (int i = 0; i < 64; ++i) firsts.insert(root.split("env", static_cast<std::uint64_t>(i)).next_u64());
    firsts.insert(root.split("grid").next_u64());
    firsts.insert(root.split("shape").next_u64());
    CHECK(firsts.size() == 66);
  }

  TEST_CASE("uniform_below stays in range and covers it") {
    RngStream r(5);
    std::array<int, 7> hist{};
    for (int i = 0; i < 7000; ++i) {
      const auto x = r.uniform_below(7);
      REQUIRE(x < 7);
      ++hist[x];
    }
    for (int h : hist) CHECK(h > 800);
  }

  TEST_CASE("uniform_int is inclusive") {
    RngStream r(11);
    bool lo = false, hi = false;
    for (int i = 0; i < 2000; ++i) {
      const auto x = r.uniform_int(3, 5);
      REQUIRE(x >= 3);
      REQUIRE(x <= 5);
      lo |= x == 3;
      hi |= x == 5;
    }
    CHECK(lo);
    CHECK(hi);
  }

  TEST_CASE("uniform01 in [0,1) with mean near one half") {
    RngStream r(3);
    double sum = 0;
    for (int i = 0; i < 100000; ++i) {
      const double u = r.uniform01();
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
      sum += u;
    }
    CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
  }

  TEST_CASE("mix64 known value") {
    // SplitMix64 reference: first output for state 0 is mix64(gamma).
    CHECK(pcgswarm::mix64(RngStream::kGamma) == 0xE220A8397B1DCDAFULL);
  }
}
