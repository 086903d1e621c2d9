#include <algorithm>
#include <vector>

#include "doctest.h"
#include "sfisep/rng.hpp"

using namespace sfisep;

TEST_CASE("same seed reproduces the stream") {
  Rng a(12345), b(12345);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("uniform stays in bounds and fills them") {
  Rng rng(7);
  double lo = 1, hi = 0;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform(-3.0, 5.0);
    CHECK(u >= -3.0);
    CHECK(u < 5.0);
  }
}

TEST_CASE("uniform_int covers the range uniformly enough") {
  Rng rng(11);
  std::vector<int> counts(10, 0);
  for (int i = 0; i < 100000; ++i) {
    const auto v = rng.uniform_int(10);
    REQUIRE(v < 10);
    ++counts[v];
  }
  for (int c : counts) {
    CHECK(c > 9000);
    CHECK(c < 11000);
  }
}

TEST_CASE("shuffle is a permutation and depends on the seed") {
  std::vector<int> base(50);
  for (int i = 0; i < 50; ++i) base[i] = i;
  std::vector<int> a = base, b = base, c = base;
  Rng r1(1), r2(1), r3(2);
  r1.shuffle(a);
  r2.shuffle(b);
  r3.shuffle(c);
  CHECK(a == b);
  CHECK(a != c);
  std::sort(a.begin(), a.end());
  CHECK(a == base);
}

TEST_CASE("derived seeds differ by stream and index") {
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 2, 4));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 3));
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
}
