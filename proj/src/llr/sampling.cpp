#include <algorithm>
#include <cmath>
#include <span>

#include "genet/error.hpp"
#include "genet/llr_nas.hpp"
#include "genet/rng.hpp"

namespace genet {

namespace {

[[noreturn]] void empty_range(const std::string& what) { throw Error(ErrorCode::kEmptyRange, what); }

template <typename T, typename Pred>
std::vector<T> legal(const std::vector<T>& choices, Pred pred) {
  std::vector<T> out;
  for (const auto& c : choices) {
    if (pred(c)) out.push_back(c);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool integral_inner(int width, double ratio) {
  const double product = width * ratio;
  return std::round(product) >= 1.0 && std::abs(product - std::round(product)) <= 1e-9 * std::max(1.0, product);
}

std::vector<int> width_choices(int base, double ratio, BlockType type, const PerturbationRanges& ranges) {
  const double lo = ranges.width_factor_min * base;
  const double hi = ranges.width_factor_max * base;
  const int q = ranges.width_quantum;
  std::vector<int> widths;
  for (long long w = static_cast<long long>(std::ceil(lo / q)) * q; w <= hi; w += q) {
    if (w >= 1) widths.push_back(static_cast<int>(w));
  }
  if (ranges.width_factor_min <= 1.0 && 1.0 <= ranges.width_factor_max) widths.push_back(base);
  const bool needs_inner = type == BlockType::kBL || type == BlockType::kDW;
  return legal(widths, [&](int w) { return !needs_inner || integral_inner(w, ratio); });
}

constexpr BlockType kSwitchableTypes[] = {BlockType::kXX, BlockType::kBL, BlockType::kDW};

}  // namespace

void check_ranges(const PerturbationRanges& ranges) {
  if (ranges.kernel_choices.empty()) empty_range("kernel_choices is empty");
  if (ranges.bl_ratios.empty()) empty_range("bl_ratios is empty");
  if (ranges.dw_ratios.empty()) empty_range("dw_ratios is empty");
  if (!(ranges.width_factor_min > 0.0) || ranges.width_factor_min > ranges.width_factor_max) {
    empty_range("width factor interval must satisfy 0 < min <= max");
  }
  if (ranges.depth_delta_min > ranges.depth_delta_max) empty_range("depth delta interval is inverted");
  if (ranges.samples_per_superblock < 1) empty_range("samples_per_superblock must be >= 1");
  if (ranges.width_quantum < 1) empty_range("width_quantum must be >= 1");
}

SuperBlock sample_superblock(const SuperBlock& base, const PerturbationRanges& ranges, Rng& rng) {
  SuperBlock out = base;
  if (ranges.allow_type_switch) {
    out.type = rng.pick(std::span<const BlockType>(kSwitchableTypes));
  }

  const int depth_lo = std::max(1, base.depth + ranges.depth_delta_min);
  const int depth_hi = base.depth + ranges.depth_delta_max;
  if (depth_lo > depth_hi) empty_range("no depth >= 1 within the delta interval");
  out.depth = static_cast<int>(rng.uniform_int(depth_lo, depth_hi));

  const auto kernels = legal(ranges.kernel_choices, [](int k) { return k > 0 && k % 2 == 1; });
  if (kernels.empty()) empty_range("kernel_choices has no odd positive kernel");
  out.kernel = rng.pick(std::span<const int>(kernels));

  switch (out.type) {
    case BlockType::kConv:
    case BlockType::kXX:
      out.ratio = 1.0;
      break;
    case BlockType::kBL: {
      const auto ratios = legal(ranges.bl_ratios, [](double r) { return r > 0.0 && r <= 1.0; });
      if (ratios.empty()) empty_range("bl_ratios has no value in (0, 1]");
      out.ratio = rng.pick(std::span<const double>(ratios));
      break;
    }
    case BlockType::kDW: {
      const auto ratios = legal(ranges.dw_ratios, [](double r) { return std::isfinite(r) && r >= 1.0; });
      if (ratios.empty()) empty_range("dw_ratios has no value >= 1");
      out.ratio = rng.pick(std::span<const double>(ratios));
      break;
    }
  }

  const auto widths = width_choices(base.width, out.ratio, out.type, ranges);
  if (widths.empty()) empty_range("no legal width within the factor interval");
  out.width = rng.pick(std::span<const int>(widths));
  return out;
}

namespace {

void require_valid(const NetworkStructure& master) {
  const auto violations = validate_structure(master);
  if (!violations.empty()) {
    throw Error(ErrorCode::kInvariantViolation, std::string(to_string(violations.front().rule)) + ": " +
                                                    violations.front().message,
                violations.front().index);
  }
}

}  // namespace

std::vector<TrialRecord> plan_trials(const NetworkStructure& master, const PerturbationRanges& ranges,
                                     std::uint64_t seed) {
  require_valid(master);
  check_ranges(ranges);
  Rng rng(seed);
  std::vector<TrialRecord> out;
  for (int i = 0; i < static_cast<int>(master.superblocks.size()); ++i) {
    if (!is_body_index(master, i)) continue;
    for (int j = 0; j < ranges.samples_per_superblock; ++j) {
      const auto sb = sample_superblock(master.superblocks[i], ranges, rng);
      out.push_back(TrialRecord{i, sb.type, sb.depth, sb.width, sb.kernel, sb.ratio, std::nullopt});
    }
  }
  return out;
}

std::vector<NetworkStructure> generate_candidates(const NetworkStructure& master, const PerturbationRanges& ranges,
                                                  int n, std::uint64_t seed) {
  require_valid(master);
  check_ranges(ranges);
  Rng rng(seed);
  std::vector<NetworkStructure> out;
  out.reserve(static_cast<std::size_t>(std::max(0, n)));
  for (int k = 0; k < n; ++k) {
    NetworkStructure candidate = master;
    candidate.name = master.name + "/" + std::to_string(k);
    for (int i = 0; i < static_cast<int>(master.superblocks.size()); ++i) {
      if (is_body_index(master, i)) candidate.superblocks[i] = sample_superblock(master.superblocks[i], ranges, rng);
    }
    out.push_back(std::move(candidate));
  }
  return out;
}

}  // namespace genet
