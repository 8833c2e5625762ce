#include <algorithm>
#include <future>

#include <json.hpp>

#include "genet/error.hpp"
#include "genet/llr_nas.hpp"

namespace genet {

using nlohmann::json;

namespace {

// Runs fn(i) for i in [0, n) on up to `threads` workers. Exceptions surface
// from the lowest-numbered failing chunk, so failures are reproducible too.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn fn) {
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::future<void>> jobs;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t begin = 0; begin < n; begin += chunk) {
    const std::size_t end = std::min(n, begin + chunk);
    jobs.push_back(std::async(std::launch::async, [begin, end, &fn] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    }));
  }
  for (auto& job : jobs) job.wait();
  for (auto& job : jobs) job.get();
}

}  // namespace

std::vector<ResolutionResult> select_best(const std::vector<NetworkStructure>& candidates,
                                          const PseudoGradientTable& table, const NetworkStructure& master,
                                          const LatencyTable& latency_table, const SearchConfig& config) {
  if (candidates.empty()) throw Error(ErrorCode::kEmptyInput, "no candidates to select from");
  if (!(config.latency_budget_ms > 0.0)) throw Error(ErrorCode::kEmptyRange, "latency budget must be positive");

  // Pseudo-gradients are resolution independent; predict once per candidate.
  std::vector<double> accuracy(candidates.size());
  parallel_for(candidates.size(), config.threads,
               [&](std::size_t i) { accuracy[i] = predict_accuracy(table, master, candidates[i]); });

  std::vector<ResolutionResult> results;
  for (const int resolution : config.resolutions) {
    std::vector<double> latency(candidates.size());
    parallel_for(candidates.size(), config.threads, [&](std::size_t i) {
      const auto& c = candidates[i];
      if (resolution <= 0 || resolution % c.stride_product() != 0) {
        throw Error(ErrorCode::kDivisibility, "resolution " + std::to_string(resolution) +
                                                  " is not divisible by the stride product");
      }
      latency[i] = estimate_latency(c, latency_table, config.batch, resolution).total_ms;
    });

    ResolutionResult result;
    result.resolution = resolution;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (latency[i] > config.latency_budget_ms) continue;
      ++result.feasible_count;
      if (!result.candidate_index || accuracy[i] > result.predicted_accuracy) {
        result.candidate_index = i;
        result.predicted_accuracy = accuracy[i];
        result.estimated_latency_ms = latency[i];
      }
    }
    if (result.candidate_index) {
      NetworkStructure winner = candidates[*result.candidate_index];
      winner.resolution = resolution;
      result.structure = std::move(winner);
    }
    results.push_back(std::move(result));
  }
  return results;
}

std::vector<ResolutionResult> run_search(const NetworkStructure& master, const PseudoGradientTable& table,
                                         const LatencyTable& latency_table, const SearchConfig& config) {
  if (config.num_candidates < 1) throw Error(ErrorCode::kEmptyRange, "num_candidates must be >= 1");
  const auto candidates = generate_candidates(master, config.ranges, config.num_candidates, config.seed);
  return select_best(candidates, table, master, latency_table, config);
}

std::string serialize_winner_report(const std::vector<ResolutionResult>& results, const SearchConfig& config) {
  json entries = json::array();
  for (const auto& r : results) {
    json item{{"resolution", r.resolution}, {"feasible_count", r.feasible_count}};
    if (r.feasible()) {
      item["status"] = "OK";
      item["candidate_index"] = *r.candidate_index;
      item["predicted_accuracy"] = r.predicted_accuracy;
      item["estimated_latency_ms"] = r.estimated_latency_ms;
      item["structure"] = json::parse(serialize_structure(*r.structure));
    } else {
      item["status"] = "NO_FEASIBLE_CANDIDATE";
      item["candidate_index"] = nullptr;
      item["predicted_accuracy"] = nullptr;
      item["estimated_latency_ms"] = nullptr;
      item["structure"] = nullptr;
    }
    entries.push_back(std::move(item));
  }
  const json root{{"latency_budget_ms", config.latency_budget_ms},
                  {"batch", config.batch},
                  {"seed", config.seed},
                  {"num_candidates", config.num_candidates},
                  {"note", "one winner per resolution; the final resolution is chosen by training each winner"},
                  {"results", std::move(entries)}};
  return root.dump(2) + "\n";
}

}  // namespace genet
