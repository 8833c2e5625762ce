#pragma once

// Local linear regression NAS: plan per-super-block perturbation trials,
// regress accuracy deltas on depth/width deltas, and pick the best predicted
// structure under a latency budget at each input resolution.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "genet/cost_model.hpp"
#include "genet/structure.hpp"

namespace genet {

class Rng;

struct PerturbationRanges {
  std::vector<int> kernel_choices{3, 5};
  double width_factor_min = 0.5;
  double width_factor_max = 2.0;
  int depth_delta_min = -2;
  int depth_delta_max = 2;
  std::vector<double> bl_ratios{0.25, 0.5};
  std::vector<double> dw_ratios{3.0, 6.0, 9.0};
  int samples_per_superblock = 9;
  /// Draw the block type from {XX, BL, DW} instead of keeping the master's.
  bool allow_type_switch = false;
  /// Sampled widths are multiples of this (the base width itself is also
  /// allowed whenever the factor interval contains 1).
  int width_quantum = 8;
};

/// Throws EMPTY_RANGE for an empty set, inverted interval or non-positive count.
void check_ranges(const PerturbationRanges& ranges);

/// Draws one perturbed variant of `base`; stride is always kept.
/// Throws EMPTY_RANGE when a field has no legal value left.
[[nodiscard]] SuperBlock sample_superblock(const SuperBlock& base, const PerturbationRanges& ranges, Rng& rng);

// --- trials ---------------------------------------------------------------------

struct TrialRecord {
  int superblock_index = 0;
  BlockType block_type = BlockType::kXX;
  int depth = 1;
  int width = 1;
  int kernel = 3;
  double ratio = 1.0;
  std::optional<double> accuracy;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

inline constexpr std::string_view kTrialHeader = "superblock_index,block_type,depth,width,kernel,ratio,accuracy";

/// samples_per_superblock records for each body super-block, in index order.
[[nodiscard]] std::vector<TrialRecord> plan_trials(const NetworkStructure& master, const PerturbationRanges& ranges,
                                                   std::uint64_t seed);

[[nodiscard]] std::string write_trials(const std::vector<TrialRecord>& trials);

/// Accepts rows with or without accuracy. Throws MALFORMED_ROW or OUT_OF_RANGE_ACCURACY.
[[nodiscard]] std::vector<TrialRecord> read_trials(std::string_view csv);

/// As read_trials, but every row must carry an accuracy.
[[nodiscard]] std::vector<TrialRecord> ingest_trials(std::string_view csv);

// --- regression -------------------------------------------------------------------

struct GradientEntry {
  int index = 0;
  BlockType type = BlockType::kXX;
  /// Present only on fine-grained entries fitted per (kernel, ratio).
  std::optional<int> kernel;
  std::optional<double> ratio;
  double g1 = 0.0;  // accuracy per unit of depth
  double g2 = 0.0;  // accuracy per channel of width
  int samples = 0;
  double rms = 0.0;
  bool singular = false;

  friend bool operator==(const GradientEntry&, const GradientEntry&) = default;
};

struct PseudoGradientTable {
  double master_accuracy = 0.0;
  std::vector<GradientEntry> entries;

  /// Fine entry for (index, type, kernel, ratio) if fitted, else the coarse
  /// (index, type) entry, else nullptr.
  [[nodiscard]] const GradientEntry* find(int index, BlockType type, int kernel, double ratio) const;

  friend bool operator==(const PseudoGradientTable&, const PseudoGradientTable&) = default;
};

struct FitOptions {
  /// Groups of one (index, type, kernel, ratio) with at least this many trials
  /// and a full-rank design also get their own entry. 0 disables.
  int min_fine_samples = 0;
};

/// Per (index, type) group, the minimum-norm no-intercept least-squares fit of
///   g1 * (d - d_master) + g2 * (c - c_master) ~= accuracy - master_accuracy.
/// Throws INVALID_TRIAL for trials without accuracy or outside the body, and
/// NO_TRIALS when a master body super-block has no trial of its own type.
[[nodiscard]] PseudoGradientTable fit_pseudo_gradients(const NetworkStructure& master, double master_accuracy,
                                                       const std::vector<TrialRecord>& trials,
                                                       const FitOptions& options = {});

/// Per-body-super-block contributions g1 * dd + g2 * dc, indexed like
/// candidate.superblocks (stem and head contribute 0).
/// Throws STRUCTURE_MISMATCH or UNFITTED_TYPE.
[[nodiscard]] std::vector<double> prediction_contributions(const PseudoGradientTable& table,
                                                           const NetworkStructure& master,
                                                           const NetworkStructure& candidate);

[[nodiscard]] double predict_accuracy(const PseudoGradientTable& table, const NetworkStructure& master,
                                      const NetworkStructure& candidate);

[[nodiscard]] std::string serialize_gradients(const PseudoGradientTable& table);
/// Throws MALFORMED_DOCUMENT or SCHEMA_VIOLATION.
[[nodiscard]] PseudoGradientTable parse_gradients(std::string_view document);

// --- selection ----------------------------------------------------------------------

/// n structures: the master with every body super-block independently
/// resampled. Deterministic in `seed`.
[[nodiscard]] std::vector<NetworkStructure> generate_candidates(const NetworkStructure& master,
                                                                const PerturbationRanges& ranges, int n,
                                                                std::uint64_t seed);

struct SearchConfig {
  double latency_budget_ms = 0.34;
  std::vector<int> resolutions{192, 224, 256};
  int num_candidates = 1000;
  std::uint64_t seed = 0;
  PerturbationRanges ranges;
  int batch = 64;
  /// Worker threads for candidate evaluation; results do not depend on it.
  unsigned threads = 1;
};

struct ResolutionResult {
  int resolution = 0;
  std::size_t feasible_count = 0;
  std::optional<std::size_t> candidate_index;
  std::optional<NetworkStructure> structure;  // winner, with resolution set
  double predicted_accuracy = 0.0;
  double estimated_latency_ms = 0.0;

  [[nodiscard]] bool feasible() const { return candidate_index.has_value(); }
};

/// Independently per configured resolution: keep candidates whose estimated
/// latency is within the budget and return the highest predicted accuracy,
/// ties to the lowest candidate index. A resolution with no feasible candidate
/// yields a result without a winner.
[[nodiscard]] std::vector<ResolutionResult> select_best(const std::vector<NetworkStructure>& candidates,
                                                        const PseudoGradientTable& table,
                                                        const NetworkStructure& master,
                                                        const LatencyTable& latency_table,
                                                        const SearchConfig& config);

/// generate_candidates followed by select_best.
[[nodiscard]] std::vector<ResolutionResult> run_search(const NetworkStructure& master,
                                                       const PseudoGradientTable& table,
                                                       const LatencyTable& latency_table, const SearchConfig& config);

[[nodiscard]] std::string serialize_winner_report(const std::vector<ResolutionResult>& results,
                                                  const SearchConfig& config);

}  // namespace genet
