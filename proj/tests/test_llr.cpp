#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "genet/llr_nas.hpp"
#include "genet/rng.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace genet;

namespace {

// collapses every range onto the small master's own settings
PerturbationRanges singleton_ranges() {
  PerturbationRanges r;
  r.kernel_choices = {3};
  r.width_factor_min = r.width_factor_max = 1.0;
  r.depth_delta_min = r.depth_delta_max = 0;
  r.bl_ratios = {0.25};
  r.dw_ratios = {6.0};
  return r;
}

struct Plant {
  std::map<int, std::pair<double, double>> g;
  double master_accuracy = 0.7;
};

std::vector<TrialRecord> planted_trials(const NetworkStructure& master, const Plant& plant, std::uint64_t seed) {
  auto trials = plan_trials(master, PerturbationRanges{}, seed);
  for (auto& t : trials) {
    const auto& base = master.superblocks[t.superblock_index];
    const auto [g1, g2] = plant.g.at(t.superblock_index);
    t.accuracy = plant.master_accuracy + g1 * (t.depth - base.depth) + g2 * (t.width - base.width);
  }
  return trials;
}

Plant default_plant() {
  return {{{1, {0.004, 2e-5}}, {2, {0.003, 1.5e-5}}, {3, {0.002, 1e-5}}, {4, {0.0015, 1e-5}}, {5, {0.001, 5e-6}}},
          0.776};
}

}  // namespace

TEST_SUITE("rng") {

TEST_CASE("splitmix64 reference output") {
  std::uint64_t state = 0;
  CHECK(splitmix64(state) == 0xE220A8397B1DCDAFull);
}

TEST_CASE("seeded sequences repeat") {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    CHECK(x == b.next());
    differs = differs || x != c.next();
  }
  CHECK(differs);
}

TEST_CASE("uniform_int stays in range and hits every value") {
  Rng rng(1);
  std::set<std::int64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = rng.uniform_int(-3, 3);
    CHECK(v >= -3);
    CHECK(v <= 3);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
  CHECK(rng.uniform_int(5, 5) == 5);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

}

TEST_SUITE("llr-nas") {

TEST_CASE("plan sizes and ranges") {
  const auto master = testing::load_fixture("genet-light");
  int body = 0;
  for (int i = 0; i < static_cast<int>(master.superblocks.size()); ++i) body += is_body_index(master, i);
  CHECK(body == 5);
  const auto trials = plan_trials(master, PerturbationRanges{}, 1);
  CHECK(trials.size() == 45);
  for (const auto& t : trials) {
    const auto& base = master.superblocks[t.superblock_index];
    CHECK(is_body_index(master, t.superblock_index));
    CHECK(t.block_type == base.type);
    CHECK(t.depth >= std::max(1, base.depth - 2));
    CHECK(t.depth <= base.depth + 2);
    CHECK(t.width >= base.width / 2);
    CHECK(t.width <= base.width * 2);
    CHECK((t.width % 8 == 0 || t.width == base.width));
    CHECK((t.kernel == 3 || t.kernel == 5));
    CHECK_FALSE(t.accuracy.has_value());
  }
}

TEST_CASE("singleton ranges reproduce the base block") {
  const auto master = testing::small_master();
  const auto trials = plan_trials(master, singleton_ranges(), 5);
  for (const auto& t : trials) {
    const auto& base = master.superblocks[t.superblock_index];
    CHECK(t.depth == base.depth);
    CHECK(t.width == base.width);
  }
  const auto candidates = generate_candidates(master, singleton_ranges(), 100, 9);
  CHECK(candidates.size() == 100);
  for (const auto& c : candidates) {
    for (std::size_t i = 0; i < c.superblocks.size(); ++i) {
      const auto& a = c.superblocks[i];
      const auto& b = master.superblocks[i];
      CHECK(a.depth == b.depth);
      CHECK(a.width == b.width);
      CHECK(a.stride == b.stride);
      CHECK(a.type == b.type);
    }
  }
}

TEST_CASE("plan determinism") {
  const auto master = testing::load_fixture("net01");
  CHECK(plan_trials(master, {}, 17) == plan_trials(master, {}, 17));
  CHECK(plan_trials(master, {}, 17) != plan_trials(master, {}, 18));
}

TEST_CASE("empty ranges") {
  const auto master = testing::small_master();
  PerturbationRanges r;
  r.kernel_choices.clear();
  CHECK_ERROR_CODE(plan_trials(master, r, 1), ErrorCode::kEmptyRange);
  r = {};
  r.width_factor_min = 2.0;
  r.width_factor_max = 1.0;
  CHECK_ERROR_CODE(plan_trials(master, r, 1), ErrorCode::kEmptyRange);
  r = {};
  r.samples_per_superblock = 0;
  CHECK_ERROR_CODE(plan_trials(master, r, 1), ErrorCode::kEmptyRange);
  r = {};
  r.bl_ratios = {2.0};  // no legal BL ratio
  CHECK_ERROR_CODE(plan_trials(master, r, 1), ErrorCode::kEmptyRange);
  r = {};
  r.kernel_choices = {4};
  CHECK_ERROR_CODE(plan_trials(master, r, 1), ErrorCode::kEmptyRange);
}

TEST_CASE("type switching draws from the three block families") {
  PerturbationRanges r;
  r.allow_type_switch = true;
  const auto master = testing::small_master();
  std::set<BlockType> types;
  for (const auto& t : plan_trials(master, r, 3)) types.insert(t.block_type);
  CHECK(types == std::set<BlockType>{BlockType::kXX, BlockType::kBL, BlockType::kDW});
}

TEST_CASE("trial CSV") {
  const std::string header(kTrialHeader);
  const auto trials = ingest_trials(header + "\n1,XX,2,64,3,1,0.5\n2,BL,1,128,5,0.25,0.71\n3,DW,3,96,3,6,1\n");
  CHECK(trials.size() == 3);
  CHECK(trials[1].block_type == BlockType::kBL);
  CHECK(trials[1].ratio == 0.25);
  CHECK(trials[2].accuracy == 1.0);
  CHECK(ingest_trials(write_trials(trials)) == trials);

  CHECK_ERROR_CODE(ingest_trials(header + "\n1,XX,2,64,3,1,1.3\n"), ErrorCode::kOutOfRangeAccuracy);
  CHECK_ERROR_CODE(ingest_trials(header + "\n1,XX,2,64,3,1,-0.1\n"), ErrorCode::kOutOfRangeAccuracy);
  CHECK_ERROR_CODE(ingest_trials(header + "\n1,XX,2,64,3,1,\n"), ErrorCode::kMalformedRow);
  CHECK_ERROR_CODE(ingest_trials(header + "\n1,XX,2,64,3\n"), ErrorCode::kMalformedRow);
  CHECK_ERROR_CODE(ingest_trials("a,b\n"), ErrorCode::kMalformedRow);
  CHECK(read_trials(header + "\n1,XX,2,64,3,1,\n").front().accuracy == std::nullopt);

  const auto master = testing::load_fixture("net01");
  const auto plan = plan_trials(master, {}, 4);
  CHECK(read_trials(write_trials(plan)) == plan);
}

TEST_CASE("planted gradients are recovered") {
  const auto master = testing::load_fixture("net01");
  const auto plant = default_plant();
  const auto trials = planted_trials(master, plant, 7);
  CHECK(trials.size() == 45);
  const auto table = fit_pseudo_gradients(master, plant.master_accuracy, trials);
  CHECK(table.entries.size() == 5);
  for (const auto& e : table.entries) {
    CAPTURE(e.index);
    const auto [g1, g2] = plant.g.at(e.index);
    CHECK(std::abs(e.g1 - g1) <= 1e-9);
    CHECK(std::abs(e.g2 - g2) <= 1e-9);
    CHECK(e.samples == 9);
    CHECK_FALSE(e.singular);

    std::vector<double> dd, dc, da;
    for (const auto& t : trials) {
      if (t.superblock_index != e.index) continue;
      dd.push_back(t.depth - master.superblocks[e.index].depth);
      dc.push_back(t.width - master.superblocks[e.index].width);
      da.push_back(*t.accuracy - plant.master_accuracy);
    }
    const auto [o1, o2] = oracle::normal_equations(dd, dc, da);
    CHECK(std::abs(e.g1 - o1) <= 1e-9);
    CHECK(std::abs(e.g2 - o2) <= 1e-9);
  }
}

TEST_CASE("residuals are orthogonal to the design") {
  const auto master = testing::load_fixture("net01");
  auto trials = planted_trials(master, default_plant(), 19);
  // perturb accuracies so residuals are non-trivial
  for (std::size_t i = 0; i < trials.size(); ++i) *trials[i].accuracy += 0.003 * std::sin(static_cast<double>(i));
  const auto table = fit_pseudo_gradients(master, 0.776, trials);
  for (const auto& e : table.entries) {
    double rd = 0.0, rc = 0.0, sq = 0.0;
    int n = 0;
    for (const auto& t : trials) {
      if (t.superblock_index != e.index) continue;
      const double dd = t.depth - master.superblocks[e.index].depth;
      const double dc = t.width - master.superblocks[e.index].width;
      const double r = (*t.accuracy - 0.776) - (e.g1 * dd + e.g2 * dc);
      rd += r * dd;
      rc += r * dc;
      sq += r * r;
      ++n;
    }
    CHECK(std::abs(rd) <= 1e-8);
    CHECK(std::abs(rc) <= 1e-8);
    CHECK(e.rms == doctest::Approx(std::sqrt(sq / n)));
  }
}

TEST_CASE("degenerate designs") {
  const auto master = testing::small_master();

  SUBCASE("all trials equal the master") {
    std::vector<TrialRecord> trials;
    for (int i = 1; i <= 3; ++i) {
      const auto& b = master.superblocks[i];
      for (int j = 0; j < 4; ++j) trials.push_back({i, b.type, b.depth, b.width, b.kernel, b.ratio, 0.6});
    }
    const auto table = fit_pseudo_gradients(master, 0.6, trials);
    for (const auto& e : table.entries) {
      CHECK(e.singular);
      CHECK(e.g1 == 0.0);
      CHECK(e.g2 == 0.0);
    }
  }

  SUBCASE("depth-only perturbations") {
    std::vector<TrialRecord> trials;
    for (int i = 1; i <= 3; ++i) {
      const auto& b = master.superblocks[i];
      const std::vector<std::pair<int, double>> rows{{1, 0.013}, {2, 0.019}, {-1, -0.011}};
      for (const auto& [dd, da] : rows) {
        trials.push_back({i, b.type, b.depth + dd, b.width, b.kernel, b.ratio, 0.6 + da});
      }
    }
    const auto table = fit_pseudo_gradients(master, 0.6, trials);
    const double expected = ((0.6 + 0.013 - 0.6) * 1 + (0.6 + 0.019 - 0.6) * 2 + (0.6 - 0.011 - 0.6) * -1) / 6.0;
    for (const auto& e : table.entries) {
      CHECK(e.g1 == doctest::Approx(expected).epsilon(1e-12));
      CHECK(std::abs(e.g2) < 1e-15);
      CHECK_FALSE(e.singular);
    }
  }

  SUBCASE("missing group") {
    std::vector<TrialRecord> trials{{1, BlockType::kXX, 3, 32, 3, 1.0, 0.6}};
    CHECK_ERROR_CODE(fit_pseudo_gradients(master, 0.6, trials), ErrorCode::kNoTrials);
  }

  SUBCASE("invalid trials") {
    std::vector<TrialRecord> trials{{0, BlockType::kConv, 1, 16, 3, 1.0, 0.6}};
    CHECK_ERROR_CODE(fit_pseudo_gradients(master, 0.6, trials), ErrorCode::kInvalidTrial);
    std::vector<TrialRecord> absent{{1, BlockType::kXX, 3, 32, 3, 1.0, std::nullopt}};
    CHECK_ERROR_CODE(fit_pseudo_gradients(master, 0.6, absent), ErrorCode::kInvalidTrial);
  }
}

TEST_CASE("fine groups override the coarse entry when well determined") {
  const auto master = testing::load_fixture("net01");
  auto trials = plan_trials(master, {}, 7);
  for (auto& t : trials) {
    const auto& b = master.superblocks[t.superblock_index];
    const double bonus = t.kernel == 5 ? 0.002 : 0.0;
    t.accuracy = 0.776 + 0.004 * (t.depth - b.depth) + (1e-5 + bonus / 100) * (t.width - b.width);
  }
  const auto coarse = fit_pseudo_gradients(master, 0.776, trials);
  CHECK(std::none_of(coarse.entries.begin(), coarse.entries.end(), [](const auto& e) { return e.kernel.has_value(); }));
  const auto fine = fit_pseudo_gradients(master, 0.776, trials, FitOptions{3});
  bool any_fine = false;
  for (const auto& e : fine.entries) {
    if (!e.kernel) continue;
    any_fine = true;
    CHECK(e.samples >= 3);
    CHECK(e.g2 == doctest::Approx(e.kernel == 5 ? 3e-5 : 1e-5).epsilon(1e-6));
    CHECK(fine.find(e.index, e.type, *e.kernel, *e.ratio) == &e);
  }
  CHECK(any_fine);
  const auto& b = master.superblocks[1];
  CHECK(coarse.find(1, b.type, 7, 1.0) != nullptr);
  CHECK(coarse.find(1, BlockType::kDW, 3, 6.0) == nullptr);
}

TEST_CASE("prediction") {
  const auto master = testing::load_fixture("net01");
  const auto plant = default_plant();
  const auto table = fit_pseudo_gradients(master, plant.master_accuracy, planted_trials(master, plant, 7));

  CHECK(predict_accuracy(table, master, master) == plant.master_accuracy);

  auto deeper = master;
  deeper.superblocks[3].depth += 2;
  CHECK(predict_accuracy(table, master, deeper) == doctest::Approx(plant.master_accuracy + 2 * 0.002).epsilon(1e-12));

  SUBCASE("additivity over super-blocks") {
    const auto candidates = generate_candidates(master, {}, 50, 3);
    for (const auto& c : candidates) {
      double sum = 0.0;
      for (std::size_t i = 1; i + 1 < c.superblocks.size(); ++i) {
        auto one = master;
        one.superblocks[i] = c.superblocks[i];
        sum += predict_accuracy(table, master, one) - table.master_accuracy;
      }
      CHECK(predict_accuracy(table, master, c) - table.master_accuracy == doctest::Approx(sum).epsilon(1e-12));
      const auto parts = prediction_contributions(table, master, c);
      CHECK(parts.front() == 0.0);
      CHECK(parts.back() == 0.0);
    }
  }

  SUBCASE("unfitted type") {
    auto switched = master;
    switched.superblocks[3].type = BlockType::kDW;
    switched.superblocks[3].ratio = 6.0;
    CHECK_ERROR_CODE(predict_accuracy(table, master, switched), ErrorCode::kUnfittedType);
  }

  SUBCASE("structure mismatch") {
    auto shorter = master;
    shorter.superblocks.erase(shorter.superblocks.begin() + 2);
    CHECK_ERROR_CODE(predict_accuracy(table, master, shorter), ErrorCode::kStructureMismatch);
    auto restrided = master;
    restrided.superblocks[5].stride = 2;
    CHECK_ERROR_CODE(predict_accuracy(table, master, restrided), ErrorCode::kStructureMismatch);
  }
}

TEST_CASE("gradient table JSON round-trip") {
  const auto master = testing::load_fixture("net01");
  const auto trials = planted_trials(master, default_plant(), 7);
  for (int fine : {0, 3}) {
    const auto table = fit_pseudo_gradients(master, 0.776, trials, FitOptions{fine});
    const auto text = serialize_gradients(table);
    CHECK(parse_gradients(text) == table);
    CHECK(serialize_gradients(parse_gradients(text)) == text);
  }
  CHECK_ERROR_CODE(parse_gradients("[1,"), ErrorCode::kMalformedDocument);
  CHECK_ERROR_CODE(parse_gradients(R"({"entries": []})"), ErrorCode::kSchemaViolation);
}

}
