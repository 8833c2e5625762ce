#include "genet/cost_model.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "csv.hpp"
#include "genet/error.hpp"
#include "genet/io.hpp"

namespace genet {

std::int64_t layer_params(const LayerSpec& layer) {
  const std::int64_t weights = static_cast<std::int64_t>(layer.in_channels / layer.groups) * layer.out_channels *
                               layer.kernel * layer.kernel;
  return weights + 2 * static_cast<std::int64_t>(layer.out_channels);
}

std::int64_t layer_flops(const LayerSpec& layer) {
  const std::int64_t out_res = layer.output_resolution();
  return static_cast<std::int64_t>(layer.in_channels / layer.groups) * layer.out_channels * layer.kernel *
         layer.kernel * out_res * out_res;
}

namespace {

std::int64_t classifier_width(const NetworkStructure& net) {
  return net.superblocks.empty() ? kImageChannels : net.superblocks.back().width;
}

}  // namespace

std::int64_t compute_params(const NetworkStructure& net) {
  // Parameters do not depend on resolution; expand at the stride product so
  // any structure with valid strides can be counted.
  const auto layers = enumerate_layers(net, static_cast<int>(std::max<long long>(1, net.stride_product())));
  std::int64_t total = 0;
  for (const auto& layer : layers) total += layer_params(layer);
  return total + classifier_width(net) * net.num_classes + net.num_classes;
}

std::int64_t compute_flops(const NetworkStructure& net, int resolution) {
  std::int64_t total = 0;
  for (const auto& layer : enumerate_layers(net, resolution)) total += layer_flops(layer);
  return total + classifier_width(net) * net.num_classes;
}

double aggregate_latency(std::span<const double> samples) {
  if (samples.empty()) throw Error(ErrorCode::kEmptyInput, "no latency samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t drop = sorted.size() / 10;  // floor(0.1 * n)
  const auto first = sorted.begin() + static_cast<std::ptrdiff_t>(drop);
  const auto last = sorted.end() - static_cast<std::ptrdiff_t>(drop);
  // offset from the smallest kept sample, so constant input comes back exactly
  const double base = *first;
  const double spread = std::accumulate(first, last, 0.0, [base](double acc, double x) { return acc + (x - base); });
  return std::clamp(base + spread / static_cast<double>(last - first), base, *(last - 1));
}

// --- LatencyTable -------------------------------------------------------------

namespace {

LatencyKey without_width(LatencyKey key) {
  key.width = 0;
  return key;
}

}  // namespace

void LatencyTable::insert(const LatencyKey& key, double latency_ms) {
  if (!(latency_ms > 0.0)) {
    throw Error(ErrorCode::kMalformedRow, "latency must be positive");
  }
  if (!rows_.emplace(key, latency_ms).second) {
    throw Error(ErrorCode::kDuplicateKey, "duplicate benchmark key");
  }
  auto& curve = curves_[without_width(key)];
  const auto pos = std::lower_bound(curve.begin(), curve.end(), key.width,
                                    [](const auto& row, int width) { return row.first < width; });
  curve.insert(pos, {key.width, latency_ms});
}

std::optional<double> LatencyTable::find(const LatencyKey& key) const {
  const auto it = rows_.find(key);
  if (it == rows_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::pair<int, double>> LatencyTable::width_curve(const LatencyKey& key) const {
  const auto it = curves_.find(without_width(key));
  if (it == curves_.end()) return {};
  return it->second;
}

BenchmarkSamples read_benchmark_samples(std::string_view text) {
  BenchmarkSamples samples;
  bool header_seen = false;
  for (const auto& line : csv::lines(text)) {
    const auto content = csv::trim(line.text);
    if (content.front() == '#') {
      if (header_seen) continue;
      const auto body = csv::trim(content.substr(1));
      const auto colon = body.find(':');
      if (colon != std::string_view::npos) {
        const auto name = csv::trim(body.substr(0, colon));
        const auto value = std::string(csv::trim(body.substr(colon + 1)));
        if (name == "device") samples.device = value;
        if (name == "precision") samples.precision = value;
      }
      continue;
    }
    if (!header_seen) {
      if (content != kBenchmarkHeader) {
        throw Error(ErrorCode::kMalformedRow, "expected header '" + std::string(kBenchmarkHeader) + "'",
                    line.number);
      }
      header_seen = true;
      continue;
    }
    const auto f = csv::fields(content);
    auto bad = [&](const std::string& why) { return Error(ErrorCode::kMalformedRow, why, line.number); };
    if (f.size() != 8) throw bad("expected 8 fields, got " + std::to_string(f.size()));
    const auto type = parse_block_type(f[0]);
    const auto width = csv::to_int(f[1]);
    const auto ratio = csv::to_double(f[2]);
    const auto kernel = csv::to_int(f[3]);
    const auto stride = csv::to_int(f[4]);
    const auto resolution = csv::to_int(f[5]);
    const auto batch = csv::to_int(f[6]);
    const auto latency = csv::to_double(f[7]);
    if (!type) throw bad("unknown block type '" + std::string(f[0]) + "'");
    if (!width || *width <= 0 || !ratio || *ratio <= 0 || !kernel || *kernel <= 0 || !stride || *stride <= 0 ||
        !resolution || *resolution <= 0 || !batch || *batch <= 0) {
      throw bad("non-numeric or non-positive key field");
    }
    if (!latency || *latency <= 0) throw bad("latency_ms must be a positive number");
    const LatencyKey key{*type,
                         static_cast<int>(*width),
                         *ratio,
                         static_cast<int>(*kernel),
                         static_cast<int>(*stride),
                         static_cast<int>(*resolution),
                         static_cast<int>(*batch)};
    samples.rows.emplace_back(key, *latency);
    samples.line_numbers.push_back(line.number);
  }
  if (!header_seen) throw Error(ErrorCode::kMalformedRow, "missing header");
  return samples;
}

LatencyTable ingest_benchmark(std::string_view text) {
  const auto samples = read_benchmark_samples(text);
  LatencyTable table;
  table.device = samples.device;
  table.precision = samples.precision;
  for (std::size_t i = 0; i < samples.rows.size(); ++i) {
    const auto& [key, latency] = samples.rows[i];
    if (table.find(key)) throw Error(ErrorCode::kDuplicateKey, "key repeated", samples.line_numbers[i]);
    table.insert(key, latency);
  }
  return table;
}

LatencyTable aggregate_samples(const BenchmarkSamples& samples) {
  std::map<LatencyKey, std::vector<double>> groups;
  for (const auto& [key, latency] : samples.rows) groups[key].push_back(latency);
  LatencyTable table;
  table.device = samples.device;
  table.precision = samples.precision;
  for (const auto& [key, values] : groups) table.insert(key, aggregate_latency(values));
  return table;
}

std::string write_benchmark(const LatencyTable& table) {
  std::ostringstream out;
  if (!table.device.empty()) out << "# device: " << table.device << '\n';
  if (!table.precision.empty()) out << "# precision: " << table.precision << '\n';
  out << kBenchmarkHeader << '\n';
  for (const auto& [key, latency] : table.rows()) {
    out << to_string(key.type) << ',' << key.width << ',' << format_number(key.ratio) << ',' << key.kernel << ','
        << key.stride << ',' << key.resolution << ',' << key.batch << ',' << format_number(latency) << '\n';
  }
  return out.str();
}

// --- estimation -----------------------------------------------------------------

namespace {

struct Lookup {
  double value = 0.0;
  bool extrapolated = false;
};

Lookup interpolate(const std::vector<std::pair<int, double>>& curve, int width) {
  if (width <= curve.front().first) {
    return {curve.front().second, width < curve.front().first};
  }
  if (width >= curve.back().first) {
    return {curve.back().second, width > curve.back().first};
  }
  const auto upper = std::lower_bound(curve.begin(), curve.end(), width,
                                      [](const auto& row, int w) { return row.first < w; });
  if (upper->first == width) return {upper->second, false};
  const auto lower = upper - 1;
  const double t = static_cast<double>(width - lower->first) / static_cast<double>(upper->first - lower->first);
  return {lower->second + t * (upper->second - lower->second), false};
}

}  // namespace

LatencyEstimate estimate_latency(const NetworkStructure& net, const LatencyTable& table, int batch,
                                 int resolution) {
  LatencyEstimate estimate;
  int res = resolution;
  for (std::size_t i = 0; i < net.superblocks.size(); ++i) {
    const auto& sb = net.superblocks[i];
    const LatencyKey key{sb.type, sb.width, sb.ratio, sb.kernel, sb.stride, res, batch};
    const auto curve = table.width_curve(key);
    if (curve.empty()) {
      std::ostringstream what;
      what << "no benchmark row for super-block " << i << " (" << to_string(sb.type) << " r="
           << format_number(sb.ratio) << " k=" << sb.kernel << " s=" << sb.stride << " res=" << res
           << " batch=" << batch << ")";
      throw Error(ErrorCode::kMissingKey, what.str(), static_cast<int>(i));
    }
    const auto hit = interpolate(curve, sb.width);
    SuperBlockLatency entry{static_cast<int>(i), hit.value, hit.value * sb.depth, hit.extrapolated};
    estimate.total_ms += entry.total_ms;
    estimate.extrapolated = estimate.extrapolated || hit.extrapolated;
    estimate.superblocks.push_back(entry);
    res /= sb.stride;
  }
  return estimate;
}

LatencyEstimate estimate_latency(const NetworkStructure& net, const LatencyTable& table, int batch) {
  return estimate_latency(net, table, batch, net.resolution);
}

CostReport cost_report(const NetworkStructure& net, int resolution, int batch, const LatencyTable* table) {
  CostReport report;
  report.resolution = resolution;
  report.batch = batch;
  report.flops = compute_flops(net, resolution);
  report.params = compute_params(net);
  if (table != nullptr) {
    const auto estimate = estimate_latency(net, *table, batch, resolution);
    report.latency_ms_per_image = estimate.total_ms;
    report.latency_extrapolated = estimate.extrapolated;
  }
  return report;
}

// --- reference latencies ----------------------------------------------------------

std::vector<ReferenceLatency> ingest_reference_latencies(std::string_view text) {
  std::vector<ReferenceLatency> rows;
  bool header_seen = false;
  for (const auto& line : csv::lines(text)) {
    const auto content = csv::trim(line.text);
    if (content.front() == '#') continue;
    if (!header_seen) {
      if (content != kReferenceHeader) {
        throw Error(ErrorCode::kMalformedRow, "expected header '" + std::string(kReferenceHeader) + "'",
                    line.number);
      }
      header_seen = true;
      continue;
    }
    const auto f = csv::fields(content);
    if (f.size() != 4) throw Error(ErrorCode::kMalformedRow, "expected 4 fields", line.number);
    const auto acc = csv::to_double(f[1]);
    const auto batch = csv::to_int(f[2]);
    const auto latency = csv::to_double(f[3]);
    if (f[0].empty() || !acc || !batch || *batch <= 0 || !latency || *latency <= 0) {
      throw Error(ErrorCode::kMalformedRow, "bad reference row", line.number);
    }
    rows.push_back(ReferenceLatency{std::string(f[0]), *acc, static_cast<int>(*batch), *latency});
  }
  if (!header_seen) throw Error(ErrorCode::kMalformedRow, "missing header");
  return rows;
}

std::optional<ReferenceLatency> find_reference(const std::vector<ReferenceLatency>& rows, std::string_view model,
                                               int batch) {
  for (const auto& row : rows) {
    if (row.model == model && row.batch == batch) return row;
  }
  return std::nullopt;
}

}  // namespace genet
