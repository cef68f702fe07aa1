#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "contraction/rng.hpp"

using namespace contraction;

TEST_CASE("philox4x32-10 known answers") {
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == PhiloxBlock{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        PhiloxBlock{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        PhiloxBlock{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are pure functions of (seed, stream, index)") {
  CounterRng a(42, 7), b(42, 7), c(42, 8), d(43, 7);
  std::vector<std::uint32_t> va, vb, vc, vd;
  for (int i = 0; i < 100; ++i) {
    va.push_back(a.next_u32());
    vb.push_back(b.next_u32());
    vc.push_back(c.next_u32());
    vd.push_back(d.next_u32());
  }
  CHECK(va == vb);
  CHECK(va != vc);
  CHECK(va != vd);
}

TEST_CASE("split gives distinct reproducible children") {
  const CounterRng base(1, 0);
  std::set<std::uint64_t> streams;
  for (std::uint64_t i = 0; i < 1000; ++i) streams.insert(base.split(i).stream());
  CHECK(streams.size() == 1000);
  CounterRng x = base.split(3), y = base.split(3);
  CHECK(x.normal() == y.normal());
}

TEST_CASE("uniform and normal moments") {
  CounterRng rng(2024, 1);
  const int n = 200000;
  double su = 0.0, sn = 0.0, sn2 = 0.0, sn4 = 0.0;
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    su += u;
  }
  std::vector<double> z(n);
  rng.fill_normal(z);
  for (double v : z) {
    sn += v;
    sn2 += v * v;
    sn4 += v * v * v * v;
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
  // Five standard errors.
  CHECK(std::abs(su / n - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / n));
  CHECK(std::abs(sn / n) < 5.0 / std::sqrt(n));
  CHECK(std::abs(sn2 / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(sn4 / n - 3.0) < 5.0 * std::sqrt(96.0 / n));
}
