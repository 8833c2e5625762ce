#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include <json.hpp>

#include "genet/error.hpp"
#include "genet/linalg.hpp"
#include "genet/llr_nas.hpp"

namespace genet {

using nlohmann::json;

const GradientEntry* PseudoGradientTable::find(int index, BlockType type, int kernel, double ratio) const {
  const GradientEntry* coarse = nullptr;
  for (const auto& e : entries) {
    if (e.index != index || e.type != type) continue;
    if (!e.kernel) {
      coarse = &e;
    } else if (*e.kernel == kernel && e.ratio && *e.ratio == ratio) {
      return &e;
    }
  }
  return coarse;
}

namespace {

struct Fit {
  double g1 = 0.0;
  double g2 = 0.0;
  double rms = 0.0;
  std::size_t rank = 0;
  bool singular = false;
};

Fit fit_group(const SuperBlock& base, double master_accuracy, const std::vector<const TrialRecord*>& group) {
  Matrix design(group.size(), 2);
  std::vector<double> target(group.size());
  bool all_zero = true;
  for (std::size_t r = 0; r < group.size(); ++r) {
    design(r, 0) = group[r]->depth - base.depth;
    design(r, 1) = group[r]->width - base.width;
    target[r] = *group[r]->accuracy - master_accuracy;
    all_zero = all_zero && design(r, 0) == 0.0 && design(r, 1) == 0.0;
  }
  Fit fit;
  if (!all_zero) {
    const auto solution = solve_least_squares(design, target);
    fit.g1 = solution.x[0];
    fit.g2 = solution.x[1];
    fit.rank = solution.rank;
  }
  fit.singular = all_zero;
  double sum_sq = 0.0;
  for (std::size_t r = 0; r < group.size(); ++r) {
    const double residual = target[r] - (fit.g1 * design(r, 0) + fit.g2 * design(r, 1));
    sum_sq += residual * residual;
  }
  fit.rms = std::sqrt(sum_sq / static_cast<double>(group.size()));
  return fit;
}

}  // namespace

PseudoGradientTable fit_pseudo_gradients(const NetworkStructure& master, double master_accuracy,
                                         const std::vector<TrialRecord>& trials, const FitOptions& options) {
  using CoarseKey = std::pair<int, BlockType>;
  using FineKey = std::tuple<int, BlockType, int, double>;
  std::map<CoarseKey, std::vector<const TrialRecord*>> coarse;
  std::map<FineKey, std::vector<const TrialRecord*>> fine;

  for (std::size_t i = 0; i < trials.size(); ++i) {
    const auto& t = trials[i];
    if (!t.accuracy) throw Error(ErrorCode::kInvalidTrial, "trial has no accuracy", static_cast<int>(i));
    if (!is_body_index(master, t.superblock_index)) {
      throw Error(ErrorCode::kInvalidTrial,
                  "super-block index " + std::to_string(t.superblock_index) + " is not a body super-block",
                  static_cast<int>(i));
    }
    coarse[{t.superblock_index, t.block_type}].push_back(&t);
    fine[{t.superblock_index, t.block_type, t.kernel, t.ratio}].push_back(&t);
  }
  for (int i = 0; i < static_cast<int>(master.superblocks.size()); ++i) {
    if (!is_body_index(master, i)) continue;
    if (coarse.count({i, master.superblocks[i].type}) == 0) {
      throw Error(ErrorCode::kNoTrials,
                  std::string("no trials for the master's ") + std::string(to_string(master.superblocks[i].type)) +
                      " block",
                  i);
    }
  }

  PseudoGradientTable table;
  table.master_accuracy = master_accuracy;
  for (const auto& [key, group] : coarse) {
    const auto fit = fit_group(master.superblocks[key.first], master_accuracy, group);
    table.entries.push_back(GradientEntry{key.first, key.second, std::nullopt, std::nullopt, fit.g1, fit.g2,
                                          static_cast<int>(group.size()), fit.rms, fit.singular});
  }
  if (options.min_fine_samples > 0) {
    for (const auto& [key, group] : fine) {
      if (static_cast<int>(group.size()) < options.min_fine_samples) continue;
      const auto& [index, type, kernel, ratio] = key;
      const auto fit = fit_group(master.superblocks[index], master_accuracy, group);
      if (fit.rank < 2) continue;  // rank-deficient groups stay on the coarse entry
      table.entries.push_back(GradientEntry{index, type, kernel, ratio, fit.g1, fit.g2,
                                            static_cast<int>(group.size()), fit.rms, false});
    }
  }
  std::stable_sort(table.entries.begin(), table.entries.end(), [](const auto& a, const auto& b) {
    return std::tie(a.index, a.type, a.kernel, a.ratio) < std::tie(b.index, b.type, b.kernel, b.ratio);
  });
  return table;
}

std::vector<double> prediction_contributions(const PseudoGradientTable& table, const NetworkStructure& master,
                                             const NetworkStructure& candidate) {
  if (candidate.superblocks.size() != master.superblocks.size()) {
    throw Error(ErrorCode::kStructureMismatch, "candidate and master have different super-block counts");
  }
  std::vector<double> out(candidate.superblocks.size(), 0.0);
  for (int i = 0; i < static_cast<int>(candidate.superblocks.size()); ++i) {
    const auto& c = candidate.superblocks[i];
    const auto& m = master.superblocks[i];
    if (c.stride != m.stride) {
      throw Error(ErrorCode::kStructureMismatch, "stride differs from the master", i);
    }
    if (!is_body_index(master, i)) continue;
    const auto* entry = table.find(i, c.type, c.kernel, c.ratio);
    if (entry == nullptr) {
      throw Error(ErrorCode::kUnfittedType,
                  "no pseudo-gradient for " + std::string(to_string(c.type)) + " at super-block " + std::to_string(i),
                  i);
    }
    out[i] = entry->g1 * (c.depth - m.depth) + entry->g2 * (c.width - m.width);
  }
  return out;
}

double predict_accuracy(const PseudoGradientTable& table, const NetworkStructure& master,
                        const NetworkStructure& candidate) {
  double total = table.master_accuracy;
  for (const double c : prediction_contributions(table, master, candidate)) total += c;
  return total;
}

// --- JSON -----------------------------------------------------------------------

std::string serialize_gradients(const PseudoGradientTable& table) {
  json entries = json::array();
  for (const auto& e : table.entries) {
    json item{{"index", e.index}, {"type", to_string(e.type)}, {"g1", e.g1},  {"g2", e.g2},
              {"n", e.samples},   {"rms", e.rms},              {"singular", e.singular}};
    if (e.kernel) item["kernel"] = *e.kernel;
    if (e.ratio) item["ratio"] = *e.ratio;
    entries.push_back(std::move(item));
  }
  const json root{{"master_accuracy", table.master_accuracy}, {"entries", std::move(entries)}};
  return root.dump(2) + "\n";
}

namespace {

[[noreturn]] void schema_error(const std::string& message, std::optional<int> index = std::nullopt) {
  throw Error(ErrorCode::kSchemaViolation, message, index);
}

}  // namespace

PseudoGradientTable parse_gradients(std::string_view document) {
  json root;
  try {
    root = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kMalformedDocument, e.what());
  }
  if (!root.is_object() || root.size() != 2 || !root.contains("master_accuracy") || !root.contains("entries")) {
    schema_error("expected exactly {master_accuracy, entries}");
  }
  if (!root["master_accuracy"].is_number()) schema_error("master_accuracy must be a number");
  if (!root["entries"].is_array()) schema_error("entries must be an array");

  PseudoGradientTable table;
  table.master_accuracy = root["master_accuracy"].get<double>();
  const std::set<std::string> required{"index", "type", "g1", "g2", "n", "rms", "singular"};
  const std::set<std::string> optional{"kernel", "ratio"};
  int i = 0;
  for (const auto& item : root["entries"]) {
    if (!item.is_object()) schema_error("entry must be an object", i);
    for (const auto& key : required) {
      if (!item.contains(key)) schema_error("entry is missing '" + key + "'", i);
    }
    for (const auto& kv : item.items()) {
      if (required.count(kv.key()) == 0 && optional.count(kv.key()) == 0) {
        schema_error("entry has unexpected field '" + kv.key() + "'", i);
      }
    }
    if (item.contains("kernel") != item.contains("ratio")) schema_error("kernel and ratio go together", i);
    GradientEntry e;
    if (!item["index"].is_number_integer() || !item["n"].is_number_integer()) {
      schema_error("index and n must be integers", i);
    }
    if (!item["type"].is_string()) schema_error("type must be a string", i);
    const auto type = parse_block_type(item["type"].get<std::string>());
    if (!type) schema_error("unknown block type", i);
    if (!item["g1"].is_number() || !item["g2"].is_number() || !item["rms"].is_number()) {
      schema_error("g1, g2 and rms must be numbers", i);
    }
    if (!item["singular"].is_boolean()) schema_error("singular must be a boolean", i);
    e.index = item["index"].get<int>();
    e.type = *type;
    e.g1 = item["g1"].get<double>();
    e.g2 = item["g2"].get<double>();
    e.samples = item["n"].get<int>();
    e.rms = item["rms"].get<double>();
    e.singular = item["singular"].get<bool>();
    if (!std::isfinite(e.g1) || !std::isfinite(e.g2)) schema_error("g must be finite", i);
    if (e.samples < 1) schema_error("entry must be fitted from at least one trial", i);
    if (item.contains("kernel")) {
      if (!item["kernel"].is_number_integer() || !item["ratio"].is_number()) {
        schema_error("kernel must be an integer and ratio a number", i);
      }
      e.kernel = item["kernel"].get<int>();
      e.ratio = item["ratio"].get<double>();
    }
    table.entries.push_back(e);
    ++i;
  }
  return table;
}

}  // namespace genet
