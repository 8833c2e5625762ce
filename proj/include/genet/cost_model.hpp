#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "genet/structure.hpp"

namespace genet {

// --- analytic accounting ----------------------------------------------------
//
// FLOPs are multiply-accumulates (1 MAC = 1 FLOP). Every convolution is
// followed by a batch norm that contributes 2 * out_channels parameters and no
// inference FLOPs; convolutions have no bias. The classifier adds
// head_width * num_classes weights plus num_classes biases.

[[nodiscard]] std::int64_t layer_params(const LayerSpec& layer);
[[nodiscard]] std::int64_t layer_flops(const LayerSpec& layer);

[[nodiscard]] std::int64_t compute_params(const NetworkStructure& net);

/// Throws DIVISIBILITY if `resolution` is not a multiple of the stride product.
[[nodiscard]] std::int64_t compute_flops(const NetworkStructure& net, int resolution);

// --- timing aggregation -----------------------------------------------------

/// Trimmed mean: sorts, drops floor(0.1 * n) samples from each end and
/// averages the rest. Throws EMPTY_INPUT for an empty span.
[[nodiscard]] double aggregate_latency(std::span<const double> samples);

// --- benchmark lookup table ---------------------------------------------------

struct LatencyKey {
  BlockType type = BlockType::kConv;
  int width = 0;
  double ratio = 1.0;
  int kernel = 1;
  int stride = 1;
  int resolution = 0;  // input feature-map resolution of the basic block
  int batch = 1;

  friend auto operator<=>(const LatencyKey&, const LatencyKey&) = default;
};

/// Header every benchmark CSV must carry, verbatim.
inline constexpr std::string_view kBenchmarkHeader =
    "block_type,width,ratio,kernel,stride,resolution,batch,latency_ms";

/// Per-basic-block latencies (ms per image) keyed by operating point.
class LatencyTable {
 public:
  LatencyTable() = default;

  /// Throws DUPLICATE_KEY if the key is already present and MALFORMED_ROW for
  /// a non-positive latency.
  void insert(const LatencyKey& key, double latency_ms);

  [[nodiscard]] std::optional<double> find(const LatencyKey& key) const;
  [[nodiscard]] std::size_t size() const { return rows_.size(); }
  [[nodiscard]] const std::map<LatencyKey, double>& rows() const { return rows_; }

  /// All (width, latency) rows whose non-width fields equal `key`, by width.
  [[nodiscard]] std::vector<std::pair<int, double>> width_curve(const LatencyKey& key) const;

  std::string device;
  std::string precision;

 private:
  std::map<LatencyKey, double> rows_;
  // Rows grouped by every field except width (width zeroed), sorted by width.
  std::map<LatencyKey, std::vector<std::pair<int, double>>> curves_;
};

/// Rows of a benchmark-format CSV, duplicates allowed (raw timing samples).
struct BenchmarkSamples {
  std::string device;
  std::string precision;
  std::vector<std::pair<LatencyKey, double>> rows;
  std::vector<int> line_numbers;  // source line of each row
};

/// Throws MALFORMED_ROW (index = 1-based line number).
[[nodiscard]] BenchmarkSamples read_benchmark_samples(std::string_view csv);

/// Groups samples by key and reduces each group with aggregate_latency.
[[nodiscard]] LatencyTable aggregate_samples(const BenchmarkSamples& samples);

/// Parses a benchmark CSV. Optional leading `# device: ...` and
/// `# precision: ...` lines fill the metadata.
/// Throws MALFORMED_ROW (index = 1-based line number) or DUPLICATE_KEY.
[[nodiscard]] LatencyTable ingest_benchmark(std::string_view csv);

/// Inverse of ingest_benchmark; rows in key order.
[[nodiscard]] std::string write_benchmark(const LatencyTable& table);

struct SuperBlockLatency {
  int index = 0;
  double per_block_ms = 0.0;
  double total_ms = 0.0;  // per_block_ms * depth
  bool extrapolated = false;
};

struct LatencyEstimate {
  double total_ms = 0.0;
  bool extrapolated = false;  // any super-block clamped at a table edge
  std::vector<SuperBlockLatency> superblocks;
};

/// Sums per-super-block table lookups at net.resolution. Width is linearly
/// interpolated between bracketing rows and clamped outside the table range;
/// every other key field must match exactly.
/// Throws MISSING_KEY naming the first uncovered super-block.
[[nodiscard]] LatencyEstimate estimate_latency(const NetworkStructure& net, const LatencyTable& table, int batch);

/// Same, with the input resolution overridden.
[[nodiscard]] LatencyEstimate estimate_latency(const NetworkStructure& net, const LatencyTable& table, int batch,
                                               int resolution);

// --- reports ------------------------------------------------------------------

struct CostReport {
  std::int64_t flops = 0;
  std::int64_t params = 0;
  std::optional<double> latency_ms_per_image;
  bool latency_extrapolated = false;
  int resolution = 0;
  int batch = 1;
};

[[nodiscard]] CostReport cost_report(const NetworkStructure& net, int resolution, int batch,
                                     const LatencyTable* table = nullptr);

/// Whole-network reference latencies (`model,acc,batch,latency_ms`), as
/// published for baseline networks. Used for side-by-side reporting only.
struct ReferenceLatency {
  std::string model;
  double accuracy = 0.0;
  int batch = 1;
  double latency_ms = 0.0;
};

inline constexpr std::string_view kReferenceHeader = "model,acc,batch,latency_ms";

[[nodiscard]] std::vector<ReferenceLatency> ingest_reference_latencies(std::string_view csv);

[[nodiscard]] std::optional<ReferenceLatency> find_reference(const std::vector<ReferenceLatency>& rows,
                                                             std::string_view model, int batch);

}  // namespace genet
