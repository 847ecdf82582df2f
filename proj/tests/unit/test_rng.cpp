#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <vector>

#include "htif/rng.hpp"

using htif::PhiloxCounter;
using htif::PhiloxKey;
using htif::RngHandle;

// Known-answer vectors of Philox4x64-10 (Random123 kat_vectors; the second one
// also matches numpy.random.Philox(key=0, counter=0).random_raw(4)).
TEST_CASE("philox4x64-10 known answers") {
  CHECK(htif::philox4x64({0, 0, 0, 0}, {0, 0}) ==
        PhiloxCounter{0x16554d9eca36314cULL, 0xdb20fe9d672d0fdcULL, 0xd7e772cee186176bULL, 0x7e68b68aec7ba23bULL});
  CHECK(htif::philox4x64({1, 0, 0, 0}, {0, 0}) ==
        PhiloxCounter{0x02f4ba6408e4d89bULL, 0x3dd62b0b9ca8c5b2ULL, 0x1c8667a55d902e79ULL, 0x907d7a052fd5b4dcULL});
  CHECK(htif::philox4x64({0x243f6a8885a308d3ULL, 0x13198a2e03707344ULL, 0xa4093822299f31d0ULL, 0x082efa98ec4e6c89ULL},
                         {0x452821e638d01377ULL, 0xbe5466cf34e90c6cULL}) ==
        PhiloxCounter{0xa528f45403e61d95ULL, 0x38c72dbd566e9788ULL, 0xa5a1610e72fd18b5ULL, 0x57bd43b5e52b7fe6ULL});
}

TEST_CASE("sequential stream is a pure function of (seed, stream_id)") {
  RngHandle a(42, 7), b(42, 7), c(42, 8), d(43, 7);
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
  // Sequential draws walk counter (block, 0, 0, 0) four words at a time.
  CHECK(htif::philox4x64({0, 0, 0, 0}, {42, 7})[0] == xa[0]);
  CHECK(htif::philox4x64({1, 0, 0, 0}, {42, 7})[2] == xa[6]);
}

TEST_CASE("addressed draws do not disturb the sequential position") {
  RngHandle a(1, 2), b(1, 2);
  a.next_u64();
  (void)a.block_at(5, 6, 7);
  b.next_u64();
  CHECK(a.next_u64() == b.next_u64());
  CHECK(a.block_at(5, 6, 7) == htif::philox4x64({5, 6, 7, 1}, {1, 2}));
  CHECK(a.block_at(0, 0, 0) != htif::philox4x64({0, 0, 0, 0}, {1, 2}));
}

TEST_CASE("unit interval mapping") {
  CHECK(htif::to_unit_interval(0) == 0.0);
  CHECK(htif::to_unit_interval(~0ULL) < 1.0);
  CHECK(htif::to_unit_interval(~0ULL) == 1.0 - 0x1.0p-53);
  CHECK(htif::to_unit_interval(1ULL << 63) == 0.5);
}

TEST_CASE("substreams are distinct and reproducible") {
  RngHandle root(99, 0);
  std::set<std::uint64_t> ids;
  for (std::uint64_t r = 0; r < 10000; ++r) ids.insert(root.substream(r).stream_id());
  CHECK(ids.size() == 10000);
  CHECK(root.substream(3).stream_id() == RngHandle(99, 0).substream(3).stream_id());
  CHECK(root.substream(3).seed() == 99);
  CHECK(root.substream(0).stream_id() != root.stream_id());
}
