#include <doctest.h>

#include <cmath>
#include <vector>

#include "gfa/rng.hpp"

using gfa::Philox4x32;
using gfa::Rng;

TEST_SUITE("rng") {
TEST_CASE("philox known answers") {
  using B = Philox4x32::Block;
  CHECK(Philox4x32::encrypt(B{0, 0, 0, 0}, {0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::encrypt(B{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::encrypt(B{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("same seed gives the same stream, different seeds differ") {
  Rng a(42), b(42), c(43);
  int same = 0;
  for (int i = 0; i < 100; ++i) {
    const double x = a.normal();
    CHECK(x == b.normal());
    same += x == c.normal();
  }
  CHECK(same == 0);
}

TEST_CASE("uniform range and moments") {
  Rng r(7);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::abs(sum / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
  for (int i = 0; i < 1000; ++i) CHECK(r.uniform_index(7) < 7u);
}

TEST_CASE("gamma and beta moments") {
  Rng r(9);
  const int n = 200000;
  double g = 0.0, g2 = 0.0, b = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = r.gamma(3.0, 2.0);
    g += x;
    g2 += x * x;
    b += r.beta(2.0, 5.0);
  }
  const double mean = g / n;
  CHECK(std::abs(mean - 1.5) < 4.0 * std::sqrt(0.75 / n));
  CHECK(std::abs(g2 / n - mean * mean - 0.75) < 0.02);
  CHECK(std::abs(b / n - 2.0 / 7.0) < 4.0 * std::sqrt(10.0 / (49.0 * 8.0) / n));
}
}
