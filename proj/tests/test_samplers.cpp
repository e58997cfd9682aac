#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "test_util.hpp"
#include "tbslab/errors.hpp"
#include "tbslab/samplers.hpp"

using namespace tbslab;

namespace {

bool four_neighbors(const GridSpec& g, std::size_t a, std::size_t b) {
  const auto ca = g.coords(a), cb = g.coords(b);
  const auto dr = ca.row > cb.row ? ca.row - cb.row : cb.row - ca.row;
  const auto dc = ca.col > cb.col ? ca.col - cb.col : cb.col - ca.col;
  return dr + dc == 1;
}

void check_set_invariants(const EnvironmentMask& mask, const SamplingSet& s, std::size_t m) {
  REQUIRE(s.indices.size() == m);
  std::set<std::size_t> seen;
  for (const auto i : s.indices) {
    REQUIRE(i < mask.grid().cell_count());
    REQUIRE(mask.is_free(i));
    REQUIRE(seen.insert(i).second);
  }
  for (std::size_t k = 1; k < s.trajectory.size(); ++k) {
    REQUIRE(mask.is_free(s.trajectory[k]));
    REQUIRE(four_neighbors(mask.grid(), s.trajectory[k - 1], s.trajectory[k]));
  }
  for (std::size_t k = 0; k < s.trigger_steps.size(); ++k) {
    REQUIRE(s.trajectory[s.trigger_steps[k]] == s.indices[k]);
  }
}

}  // namespace

TEST_SUITE("samplers") {

TEST_CASE("random_sample small cases") {
  const auto free4 = EnvironmentMask::all_free(GridSpec(2, 2));
  Rng rng(1);
  auto s = random_sample(free4, 4, rng);
  std::sort(s.indices.begin(), s.indices.end());
  CHECK(s.indices == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(s.trajectory.empty());

  const EnvironmentMask two(GridSpec(3, 1), {0, 1, 0});
  auto t = random_sample(two, 2, rng);
  std::sort(t.indices.begin(), t.indices.end());
  CHECK(t.indices == std::vector<std::size_t>{0, 2});

  CHECK_THROWS_AS(random_sample(two, 3, rng), CapacityError);
}

TEST_CASE("random_sample inclusion frequencies are uniform") {
  const auto mask = EnvironmentMask::all_free(GridSpec(32, 32));
  const std::size_t m = 50, trials = 5000;
  std::vector<double> hits(1024, 0.0);
  Rng rng(77);
  for (std::size_t t = 0; t < trials; ++t) {
    for (const auto i : random_sample(mask, m, rng).indices) hits[i] += 1.0;
  }
  const double p = double(m) / 1024.0;
  const double se = std::sqrt(p * (1 - p) / double(trials));
  for (const auto h : hits) REQUIRE(std::abs(h / double(trials) - p) <= 4.0 * se);
}

TEST_CASE("walker on an isolated cell stalls") {
  const EnvironmentMask island(GridSpec(3, 3), {1, 1, 1, 1, 0, 1, 1, 1, 1});
  Rng rng(2);
  auto cfg = SamplerConfig::st_tbs(1);
  try {
    trajectory_sample(island, cfg, rng);
    FAIL("expected a stall");
  } catch (const StallError& e) {
    CHECK(e.achieved() == 0);
    CHECK(e.exit_code() == 3);
  }
}

TEST_CASE("corridor with ell = 1 samples every new cell") {
  const auto corridor = EnvironmentMask::all_free(GridSpec(10, 1));
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    const auto s = trajectory_sample(corridor, SamplerConfig::ell_tbs(3, 1), rng);
    check_set_invariants(corridor, s, 3);
    std::vector<std::size_t> first_new;
    std::set<std::size_t> seen;
    for (std::size_t k = 1; k < s.trajectory.size() && first_new.size() < 3; ++k) {
      if (seen.insert(s.trajectory[k]).second) first_new.push_back(s.trajectory[k]);
    }
    REQUIRE(s.indices == first_new);
  }
}

TEST_CASE("st_tbs with P_trig = 1 takes the first distinct entered cells") {
  const auto mask = EnvironmentMask::all_free(GridSpec(12, 12));
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    const auto s = trajectory_sample(mask, SamplerConfig::st_tbs(5, 0.8, 1.0), rng);
    std::vector<std::size_t> expected;
    std::set<std::size_t> seen;
    for (std::size_t k = 1; k < s.trajectory.size() && expected.size() < 5; ++k) {
      if (seen.insert(s.trajectory[k]).second) expected.push_back(s.trajectory[k]);
    }
    REQUIRE(s.indices == expected);
  }
}

TEST_CASE("sampling set invariants across modes and masks") {
  Rng mask_rng(4);
  std::vector<EnvironmentMask> masks{EnvironmentMask::all_free(GridSpec(16, 16))};
  for (int i = 0; i < 3; ++i) masks.push_back(generate_mask(GridSpec(24, 20), {6, 2, 6}, mask_rng));
  const std::vector<SamplerConfig> modes{SamplerConfig::random(20), SamplerConfig::st_tbs(20),
                                         SamplerConfig::ell_tbs(20, 3),
                                         SamplerConfig::hybrid(20, 0.3),
                                         SamplerConfig::hybrid(20, 0.75)};
  for (const auto& mask : masks) {
    for (const auto& mode : modes) {
      for (std::uint64_t seed = 0; seed < 25; ++seed) {
        Rng rng(seed);
        try {
          check_set_invariants(mask, draw_sampling_set(mask, mode, rng), 20);
        } catch (const StallError&) {
          // a walker boxed into a small pocket; allowed
        }
      }
    }
  }
}

TEST_CASE("ell_tbs spacing on an all-free grid") {
  const auto mask = EnvironmentMask::all_free(GridSpec(32, 32));
  for (const std::size_t ell : {1u, 3u, 5u, 10u}) {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      Rng rng(seed);
      const auto s = trajectory_sample(mask, SamplerConfig::ell_tbs(15, ell), rng);
      REQUIRE(s.trigger_steps.size() == s.indices.size());
      std::size_t prev = 0;
      for (std::size_t k = 0; k < s.trigger_steps.size(); ++k) {
        const auto step = s.trigger_steps[k];
        REQUIRE(step >= prev + ell);
        // the sample is the first unsampled cell once the threshold is met
        for (std::size_t j = prev + ell; j < step; ++j) {
          const auto cell = s.trajectory[j];
          REQUIRE(std::find(s.indices.begin(), s.indices.begin() + k, cell) !=
                  s.indices.begin() + k);
        }
        if (step == prev + ell) {
          const bool within =
              k == 0 || mask.grid().distance(s.indices[k - 1], s.indices[k]) <=
                            double(ell) * mask.grid().cell_size();
          REQUIRE(within);
        }
        prev = step;
      }
    }
  }
}

TEST_CASE("determinism") {
  const auto mask = EnvironmentMask::all_free(GridSpec(20, 20));
  for (const auto& mode : {SamplerConfig::random(30), SamplerConfig::st_tbs(30),
                           SamplerConfig::ell_tbs(30, 4), SamplerConfig::hybrid(30, 0.5)}) {
    Rng a(99), b(99);
    const auto sa = draw_sampling_set(mask, mode, a);
    const auto sb = draw_sampling_set(mask, mode, b);
    CHECK(sa.indices == sb.indices);
    CHECK(sa.trajectory == sb.trajectory);
  }
}

TEST_CASE("hybrid reduces to the pure samplers") {
  const auto mask = EnvironmentMask::all_free(GridSpec(16, 16));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng a(seed), b(seed);
    const auto h0 = hybrid_sample(mask, SamplerConfig::hybrid(50, 0.0), a);
    const auto r = random_sample(mask, 50, b);
    REQUIRE(h0.indices == r.indices);

    Rng c(seed), d(seed);
    const auto h1 = hybrid_sample(mask, SamplerConfig::hybrid(50, 1.0), c);
    const auto t = trajectory_sample(mask, SamplerConfig::st_tbs(50), d);
    REQUIRE(h1.indices == t.indices);
    REQUIRE(h1.trajectory == t.trajectory);
    REQUIRE(a() == b());
    REQUIRE(c() == d());
  }
}

TEST_CASE("hybrid alpha = 0.5 splits evenly") {
  const auto mask = EnvironmentMask::all_free(GridSpec(16, 16));
  Rng rng(6);
  const auto s = hybrid_sample(mask, SamplerConfig::hybrid(50, 0.5), rng);
  check_set_invariants(mask, s, 50);
  CHECK(s.trigger_steps.size() == 25);
  CHECK(s.mode == SamplingMode::hybrid);
}

TEST_CASE("config validation") {
  const auto mask = EnvironmentMask::all_free(GridSpec(4, 4));
  auto bad = SamplerConfig::st_tbs(5);
  bad.p_trig = 0.0;
  CHECK_THROWS_AS(validate(bad, mask), ValidationError);
  bad = SamplerConfig::st_tbs(5, 1.5);
  CHECK_THROWS_AS(validate(bad, mask), ValidationError);
  CHECK_THROWS_AS(validate(SamplerConfig::ell_tbs(5, 0), mask), ValidationError);
  CHECK_THROWS_AS(validate(SamplerConfig::hybrid(5, 1.2), mask), ValidationError);
  CHECK_THROWS_AS(validate(SamplerConfig::random(17), mask), CapacityError);
  CHECK_THROWS_AS(validate(SamplerConfig::random(0), mask), ValidationError);
  CHECK(parse_sampling_mode("ell_tbs") == SamplingMode::ell_tbs);
  CHECK_THROWS_AS(parse_sampling_mode("zigzag"), ValidationError);
}

TEST_CASE("observe") {
  const GridSpec g(4, 4);
  FieldSample f{g, std::vector<double>(16)};
  for (std::size_t i = 0; i < 16; ++i) f.values[i] = 0.1 * double(i);
  SamplingSet s{g, SamplingMode::random, {3, 7, 11}, {}, {}};
  Rng rng(1);

  const auto y = observe(f, s, 0.0, rng);
  CHECK(y.values == std::vector<double>{f.values[3], f.values[7], f.values[11]});

  const FieldSample c{g, std::vector<double>(16, 2.5)};
  for (const auto v : observe(c, s, 0.0, rng).values) CHECK(v == 2.5);

  const FieldSample zero{g, std::vector<double>(16, 0.0)};
  SamplingSet all{g, SamplingMode::random, {}, {}, {}};
  for (std::size_t i = 0; i < 16; ++i) all.indices.push_back(i);
  double ss = 0;
  std::size_t n = 0;
  while (n < 1000 * 16) {
    for (const auto v : observe(zero, all, 0.25, rng).values) { ss += v * v; ++n; }
  }
  CHECK(ss / double(n) == doctest::Approx(0.25).epsilon(0.10));

  CHECK_THROWS_AS(observe(zero, all, -1.0, rng), ValidationError);
  SamplingSet other{GridSpec(2, 2), SamplingMode::random, {0}, {}, {}};
  CHECK_THROWS_AS(observe(zero, other, 0.0, rng), ValidationError);
}

}  // TEST_SUITE
