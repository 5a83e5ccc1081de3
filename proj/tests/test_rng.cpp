#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "fbmlab/rng.hpp"

using namespace fbmlab::rng;

TEST_CASE("mix64 matches the reference sequence") {
  // splitmix64 outputs for seed 0
  CHECK(mix64(0) == 0xe220a8397b1dcdafULL);
  CHECK(mix64(0x9E3779B97F4A7C15ULL) == 0x6e789e6aa1b965f4ULL);
  CHECK(mix64(0x9E3779B97F4A7C15ULL * 2) == 0x06c45d188009454fULL);
}

TEST_CASE("streams are pure functions of key and counter") {
  CounterStream a(42, 7, 1, StreamKind::path_coordinate);
  CounterStream b(42, 7, 1, StreamKind::path_coordinate);
  for (uint64_t i : {0ULL, 1ULL, 1000ULL, (1ULL << 40)})
    CHECK(a.bits(i) == b.bits(i));

  CounterStream c(42, 8, 1, StreamKind::path_coordinate);
  CounterStream d(42, 7, 2, StreamKind::path_coordinate);
  CounterStream e(42, 7, 1, StreamKind::sample_sweep);
  std::set<uint64_t> firsts{a.bits(0), c.bits(0), d.bits(0), e.bits(0)};
  CHECK(firsts.size() == 4);
}

TEST_CASE("uniform draws stay inside the open unit interval") {
  CounterStream s(123, 0, 0);
  for (uint64_t i = 0; i < 100'000; ++i) {
    const double u = s.uniform(i);
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("normals can be drawn out of order") {
  CounterStream s(9, 3, 0);
  std::vector<double> forward(64);
  for (uint64_t i = 0; i < 64; ++i) forward[i] = s.normal(i);
  for (uint64_t i = 64; i-- > 0;) CHECK(s.normal(i) == forward[i]);
}

TEST_CASE("normal moments pass the statistical gates") {
  CounterStream s(20260810, 0, 0);
  const long n = 200'000;
  double sum = 0, sum2 = 0, sum4 = 0;
  for (long i = 0; i < n; ++i) {
    const double z = s.normal(uint64_t(i));
    sum += z;
    sum2 += z * z;
    sum4 += z * z * z * z;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  const double kurt = sum4 / n;
  // |Z| < 4 gates on mean, variance, fourth moment
  CHECK(std::abs(mean) < 4.0 / std::sqrt(double(n)));
  CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / double(n)));
  CHECK(std::abs(kurt - 3.0) < 4.0 * std::sqrt(96.0 / double(n)));
}

TEST_CASE("sequence adaptor walks the stream in order") {
  CounterStream s(5, 5, 5);
  NormalSequence seq(s);
  for (uint64_t i = 0; i < 16; ++i) CHECK(seq.next() == s.normal(i));
}
