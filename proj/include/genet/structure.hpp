#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace genet {

/// Basic block families of the MasterNet space.
///
///   kConv  single full k x k convolution (stem, head, plain layers)
///   kXX    two stacked full k x k convolutions, residual-wrapped
///   kBL    1x1 reduce -> k x k full -> 1x1 expand, ratio r <= 1
///   kDW    1x1 expand -> k x k depth-wise -> 1x1 project, ratio r >= 1
enum class BlockType { kConv, kXX, kBL, kDW };

std::string_view to_string(BlockType type);
std::optional<BlockType> parse_block_type(std::string_view text);

/// A stack of `depth` identical basic blocks. Only the first basic block
/// carries `stride`; the rest run at stride 1.
///
/// `width` is always the block's output channel count. The inner channel
/// count of BL and DW blocks is width * ratio.
struct SuperBlock {
  BlockType type = BlockType::kConv;
  int depth = 1;
  int width = 1;
  int stride = 1;
  int kernel = 1;
  double ratio = 1.0;

  /// width * ratio rounded to the nearest integer.
  [[nodiscard]] int inner_width() const;

  friend bool operator==(const SuperBlock&, const SuperBlock&) = default;
};

/// Whole network: stem super-block, body super-blocks, 1x1 head, followed by
/// an implicit global average pool and a fully connected classifier.
struct NetworkStructure {
  std::string name;
  int resolution = 224;
  int num_classes = 1000;
  std::vector<SuperBlock> superblocks;

  /// Product of every super-block stride.
  [[nodiscard]] long long stride_product() const;

  friend bool operator==(const NetworkStructure&, const NetworkStructure&) = default;
};

/// Indices [1, size-1) are the searchable body; the first entry is the stem
/// and the last the head.
[[nodiscard]] bool is_body_index(const NetworkStructure& net, int index);

// --- validation -------------------------------------------------------------

enum class Rule {
  kMinLength,   // fewer than stem + head
  kStem,        // first super-block must be CONV with stride 2
  kHead,        // last super-block must be a 1x1 CONV
  kResolution,  // resolution must be positive
  kClasses,     // num_classes must be positive
  kDivisibility,
  kDepth,
  kWidth,
  kStride,
  kKernel,
  kRatio,
  kInnerWidth,  // width * ratio must be a positive integer
};

std::string_view to_string(Rule rule);

struct Violation {
  Rule rule;
  std::optional<int> index;  // absent for network-level rules
  std::string message;
};

/// Returns every broken invariant. Accepts arbitrary field values.
[[nodiscard]] std::vector<Violation> validate_structure(const NetworkStructure& net);

// --- JSON document ------------------------------------------------------------

/// Parses a structure document and checks every invariant.
/// Throws Error with MALFORMED_DOCUMENT, SCHEMA_VIOLATION or INVARIANT_VIOLATION.
[[nodiscard]] NetworkStructure parse_structure(std::string_view document);

/// Schema-level parse only: field values are not checked against invariants.
/// Used where the caller wants the full violation list instead of the first.
[[nodiscard]] NetworkStructure parse_structure_unchecked(std::string_view document);

/// Canonical form: sorted keys, two-space indent, trailing newline.
[[nodiscard]] std::string serialize_structure(const NetworkStructure& net);

[[nodiscard]] NetworkStructure load_structure(const std::string& path);

// --- layer expansion ----------------------------------------------------------

enum class LayerRole {
  kPlain,      // CONV super-block layer
  kFirst,      // XX: first k x k
  kSecond,     // XX: second k x k
  kReduce,     // BL: 1x1 in -> width*r
  kExpand,     // DW: 1x1 in -> width*r
  kSpatial,    // BL: k x k full
  kDepthwise,  // DW: k x k depth-wise
  kProject,    // BL/DW: 1x1 -> width
  kShortcut,   // 1x1 projection on the residual path
};

std::string_view to_string(LayerRole role);

struct LayerSpec {
  int superblock_index = 0;
  int block_index = 0;  // position within the super-block
  LayerRole role = LayerRole::kPlain;
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 1;
  int stride = 1;
  int groups = 1;
  int input_resolution = 0;

  [[nodiscard]] int output_resolution() const { return input_resolution / stride; }
};

/// Expands every super-block into its convolutions at `net.resolution`.
[[nodiscard]] std::vector<LayerSpec> enumerate_layers(const NetworkStructure& net);

/// Same, at an explicit input resolution. Throws DIVISIBILITY when the
/// resolution is not a multiple of the stride product.
[[nodiscard]] std::vector<LayerSpec> enumerate_layers(const NetworkStructure& net, int resolution);

/// Number of input channels entering super-block `index` (3 for the stem).
[[nodiscard]] int input_channels(const NetworkStructure& net, int index);

/// Spatial resolution entering super-block `index` at the given input resolution.
[[nodiscard]] int input_resolution(const NetworkStructure& net, int index, int resolution);

inline constexpr int kImageChannels = 3;

// --- DW alternate parameterization --------------------------------------------

/// DW blocks can also be described by the depth-wise layer width and the
/// reciprocal ratio. Storage always uses output width + expansion ratio.
struct DepthwiseForm {
  int depthwise_width = 0;
  double bottleneck_ratio = 1.0;  // 1 / expansion ratio
};

[[nodiscard]] DepthwiseForm to_depthwise_form(const SuperBlock& block);
[[nodiscard]] SuperBlock from_depthwise_form(const SuperBlock& shape, const DepthwiseForm& form);

}  // namespace genet
