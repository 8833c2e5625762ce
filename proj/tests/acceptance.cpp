// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "genet/cost_model.hpp"
#include "genet/linalg.hpp"
#include "genet/llr_nas.hpp"
#include "genet/structure.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace genet;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

int failures = 0;

void criterion(const std::string& name, double max_seconds, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome outcome;
  try {
    outcome = body();
  } catch (const std::exception& e) {
    outcome = {false, std::string("exception: ") + e.what()};
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (outcome.pass && max_seconds > 0 && seconds > max_seconds) {
    outcome = {false, "took " + std::to_string(seconds) + " s, limit " + std::to_string(max_seconds) + " s"};
  }
  if (!outcome.pass) ++failures;
  std::printf("%s  %-34s %8.3f s  %s\n", outcome.pass ? "PASS" : "FAIL", name.c_str(), seconds,
              outcome.detail.c_str());
}

Matrix to_matrix(const oracle::Dense& d) {
  Matrix m(d.size(), d[0].size());
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d[0].size(); ++j) m(i, j) = d[i][j];
  return m;
}

struct Calibration {
  const char* name;
  int resolution;
  double params;
  double flops;
};

constexpr Calibration kCalibration[] = {
    {"genet-light", 192, 8.17e6, 552e6},
    {"genet-normal", 192, 21e6, 2.2e9},
    {"genet-large", 256, 31e6, 4.6e9},
};

Outcome params_calibration() {
  Outcome o;
  std::ostringstream detail;
  for (const auto& c : kCalibration) {
    const double got = static_cast<double>(compute_params(testing::load_fixture(c.name)));
    const double rel = got / c.params - 1.0;
    detail << c.name << ' ' << std::showpos << std::fixed;
    detail.precision(2);
    detail << 100 * rel << "% " << std::noshowpos;
    o.require(std::abs(rel) <= 0.03, std::string(c.name) + " params off by " + std::to_string(100 * rel) + "%");
  }
  if (o.pass) o.detail = detail.str();
  return o;
}

Outcome flops_calibration() {
  Outcome o;
  std::ostringstream detail;
  for (const auto& c : kCalibration) {
    const double got = static_cast<double>(compute_flops(testing::load_fixture(c.name), c.resolution));
    const double rel = got / c.flops - 1.0;
    detail << c.name << ' ' << std::showpos << std::fixed;
    detail.precision(2);
    detail << 100 * rel << "% " << std::noshowpos;
    o.require(std::abs(rel) <= 0.05, std::string(c.name) + " FLOPs off by " + std::to_string(100 * rel) + "%");
  }
  if (o.pass) o.detail = detail.str();
  return o;
}

Outcome trimmed_mean() {
  Outcome o;
  std::vector<double> ramp(30);
  std::iota(ramp.begin(), ramp.end(), 1.0);
  o.require(aggregate_latency(ramp) == 15.5, "mean of 1..30 is not 15.5");
  std::mt19937_64 gen(101);
  std::uniform_int_distribution<int> size(1, 100);
  std::uniform_real_distribution<double> value(1e-3, 10.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> s(static_cast<std::size_t>(size(gen)));
    for (auto& x : s) x = value(gen);
    const double m = aggregate_latency(s);
    auto shuffled = s;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    o.require(aggregate_latency(shuffled) == m, "not permutation invariant");
    const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
    o.require(m >= *lo && m <= *hi, "outside [min, max]");
    o.require(aggregate_latency(std::vector<double>(s.size(), s[0])) == s[0], "constant input not preserved");
  }
  o.detail = "1000 random sample sets";
  return o;
}

Outcome svd_oracle() {
  Outcome o;
  std::mt19937_64 gen(202);
  std::uniform_int_distribution<int> dim(1, 8);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto d = oracle::random_dense(static_cast<std::size_t>(dim(gen)), static_cast<std::size_t>(dim(gen)), gen);
    const auto got = singular_values(to_matrix(d));
    const auto want = oracle::singular_values(d);
    o.require(got.size() == want.size(), "wrong number of singular values");
    for (std::size_t i = 0; i < got.size() && i < want.size(); ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
  }
  o.require(worst <= 1e-8, "eigen-oracle mismatch " + std::to_string(worst));
  for (int trial = 0; trial < 100; ++trial) {
    const auto rows = static_cast<std::size_t>(dim(gen));
    const auto d = oracle::random_dense(rows, static_cast<std::size_t>(dim(gen)), gen);
    const auto sigma = singular_values(to_matrix(d));
    const auto rotated = singular_values(to_matrix(oracle::multiply(oracle::random_orthogonal(rows, gen), d)));
    for (std::size_t i = 0; i < sigma.size(); ++i) {
      o.require(std::abs(rotated[i] - sigma[i]) <= 1e-8, "orthogonal invariance violated");
    }
    double frob = 0.0;
    for (const auto& row : d)
      for (double x : row) frob += x * x;
    double sq = 0.0;
    for (double s : sigma) sq += s * s;
    o.require(std::abs(sq - frob) <= 1e-8, "Frobenius identity violated");
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "max |diff| %.2e over 200 matrices; 100 invariance instances", worst);
  o.detail = buf;
  return o;
}

Outcome planted_recovery() {
  Outcome o;
  const auto master = testing::load_fixture("net01");
  const std::vector<std::pair<double, double>> plant{
      {0, 0}, {0.004, 2e-5}, {0.003, 1.5e-5}, {0.002, 1e-5}, {0.0015, 1e-5}, {0.001, 5e-6}};
  const double a_star = 0.776;
  double worst_g = 0.0;
  double worst_r = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto trials = plan_trials(master, PerturbationRanges{}, seed);
    o.require(trials.size() == 45, "plan is not 9 x 5");
    for (auto& t : trials) {
      const auto& b = master.superblocks[t.superblock_index];
      const auto [g1, g2] = plant[t.superblock_index];
      t.accuracy = a_star + g1 * (t.depth - b.depth) + g2 * (t.width - b.width);
    }
    const auto table = fit_pseudo_gradients(master, a_star, trials);
    for (const auto& e : table.entries) {
      worst_g = std::max({worst_g, std::abs(e.g1 - plant[e.index].first), std::abs(e.g2 - plant[e.index].second)});
    }
    // residual orthogonality on a noisy version of the same design
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> noise(0.0, 0.002);
    for (auto& t : trials) *t.accuracy += noise(gen);
    const auto noisy = fit_pseudo_gradients(master, a_star, trials);
    for (const auto& e : noisy.entries) {
      double rd = 0.0, rc = 0.0;
      for (const auto& t : trials) {
        if (t.superblock_index != e.index) continue;
        const double dd = t.depth - master.superblocks[e.index].depth;
        const double dc = t.width - master.superblocks[e.index].width;
        const double r = *t.accuracy - a_star - e.g1 * dd - e.g2 * dc;
        rd += r * dd;
        rc += r * dc;
      }
      worst_r = std::max({worst_r, std::abs(rd), std::abs(rc)});
    }
  }
  o.require(worst_g <= 1e-9, "recovery error " + std::to_string(worst_g));
  o.require(worst_r <= 1e-8, "residual not orthogonal " + std::to_string(worst_r));
  char buf[96];
  std::snprintf(buf, sizeof buf, "max |g - plant| %.2e, max |r.x| %.2e over 20 plans", worst_g, worst_r);
  o.detail = buf;
  return o;
}

Outcome selection_oracle() {
  Outcome o;
  std::mt19937_64 gen(303);
  const auto master = testing::small_master();
  int infeasible = 0;
  int tied = 0;
  for (int instance = 0; instance < 100; ++instance) {
    SearchConfig config;
    config.resolutions = {32, 64, 96};
    std::uniform_int_distribution<int> count(1, 64);
    auto candidates = generate_candidates(master, config.ranges, count(gen), gen());

    PseudoGradientTable gradients;
    gradients.master_accuracy = 0.7;
    std::uniform_real_distribution<double> g(-0.005, 0.01);
    const bool flat = instance % 4 == 0;  // zero gradients: every prediction ties
    for (int i = 1; i <= 3; ++i) {
      const auto& b = master.superblocks[i];
      gradients.entries.push_back(
          {i, b.type, std::nullopt, std::nullopt, flat ? 0.0 : g(gen), flat ? 0.0 : g(gen) / 100, 9, 0.0, false});
    }
    if (instance % 3 == 0 && candidates.size() > 2) candidates[candidates.size() - 1] = candidates[0];

    std::uniform_real_distribution<double> coef(0.5, 2.0);
    const double a = coef(gen), b = coef(gen);
    LatencyTable latency;
    testing::cover(latency, candidates, config.resolutions, config.batch, [&](const LatencyKey& k) {
      return 1e-8 * a * k.width * k.kernel * k.kernel * k.resolution * (k.ratio + b) / k.stride + 1e-5;
    });

    std::vector<double> all;
    std::vector<std::vector<double>> acc(config.resolutions.size()), lat(config.resolutions.size());
    for (std::size_t r = 0; r < config.resolutions.size(); ++r) {
      for (const auto& c : candidates) {
        acc[r].push_back(predict_accuracy(gradients, master, c));
        lat[r].push_back(estimate_latency(c, latency, config.batch, config.resolutions[r]).total_ms);
        all.push_back(lat[r].back());
      }
    }
    std::sort(all.begin(), all.end());
    if (instance % 5 == 0) {
      config.latency_budget_ms = all.front() * 0.5;
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, all.size() - 1);
      config.latency_budget_ms = all[pick(gen)];
    }
    config.threads = 1 + static_cast<unsigned>(instance % 4);

    const auto results = select_best(candidates, gradients, master, latency, config);
    o.require(results.size() == config.resolutions.size(), "wrong number of results");
    for (std::size_t r = 0; r < results.size(); ++r) {
      const auto expected = oracle::select(acc[r], lat[r], config.latency_budget_ms);
      const auto feasible = static_cast<std::size_t>(
          std::count_if(lat[r].begin(), lat[r].end(), [&](double l) { return l <= config.latency_budget_ms; }));
      o.require(results[r].candidate_index == expected, "winner differs at instance " + std::to_string(instance));
      o.require(results[r].feasible_count == feasible, "feasible count differs");
      if (!expected) {
        ++infeasible;
        continue;
      }
      o.require(results[r].predicted_accuracy == acc[r][*expected], "accuracy differs");
      o.require(results[r].estimated_latency_ms == lat[r][*expected], "latency differs");
      const auto ties = std::count_if(acc[r].begin(), acc[r].end(), [&](double x) { return x == acc[r][*expected]; });
      if (ties > 1) ++tied;
    }
  }
  o.require(infeasible > 0, "no infeasible case exercised");
  o.require(tied > 0, "no tie exercised");
  o.detail = "100 instances, " + std::to_string(infeasible) + " infeasible and " + std::to_string(tied) +
             " tied resolutions";
  return o;
}

Outcome end_to_end() {
  Outcome o;
  const auto master = testing::data_path("search/master.json");
  auto run = [](std::vector<std::string> args, std::string& out) {
    std::ostringstream data, diag;
    const int code = cli::run(args, data, diag);
    out = data.str();
    return code;
  };
  std::string plan;
  o.require(run({"plan", master, "--seed", "7"}, plan) == 0, "plan failed");
  o.require(plan == testing::read_data("search/plan.csv"), "plan differs from committed plan.csv");

  std::string gradients;
  o.require(run({"fit", master, "--trials", testing::data_path("search/trials.csv"), "--master-accuracy", "0.776"},
                gradients) == 0,
            "fit failed");
  o.require(gradients == testing::read_data("search/gradients.json"), "gradients differ from committed file");

  for (const std::string budget : {"0.34", "0.20", "0.10"}) {
    std::string report;
    const int code = run({"search", master, "--gradients", testing::data_path("search/gradients.json"),
                          "--latency-table", testing::data_path("search/latency.csv"), "--budget", budget, "--seed",
                          "2026"},
                         report);
    o.require(code == 0, "search failed at budget " + budget);
    o.require(report == testing::read_data("search/report-" + budget + ".json"),
              "report differs at budget " + budget);
  }
  o.detail = "plan, gradients and 3 reports byte-identical";
  return o;
}

Outcome fixtures_round_trip() {
  Outcome o;
  for (const auto& name : testing::fixture_names()) {
    const auto text = testing::read_data("structures/" + name + ".json");
    const auto net = parse_structure(text);
    o.require(validate_structure(net).empty(), name + " has violations");
    o.require(serialize_structure(net) == text, name + " does not round-trip byte-identically");
    o.require(parse_structure(serialize_structure(net)) == net, name + " changes on re-parse");
  }
  o.detail = std::to_string(testing::fixture_names().size()) + " fixtures";
  return o;
}

}  // namespace

int main() {
  criterion("params calibration (+-3%)", 1.0, params_calibration);
  criterion("FLOPs calibration (+-5%)", 1.0, flops_calibration);
  criterion("trimmed mean", 0.0, trimmed_mean);
  criterion("SVD oracle equivalence (1e-8)", 10.0, svd_oracle);
  criterion("planted-gradient recovery (1e-9)", 0.0, planted_recovery);
  criterion("selection oracle", 0.0, selection_oracle);
  criterion("end-to-end seeded run", 0.0, end_to_end);
  criterion("fixture round-trip and validation", 0.0, fixtures_round_trip);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
