#include "genet/structure.hpp"

#include <climits>
#include <cmath>
#include <set>

#include <json.hpp>

#include "genet/error.hpp"
#include "genet/io.hpp"

namespace genet {

using nlohmann::json;

std::string_view to_string(BlockType type) {
  switch (type) {
    case BlockType::kConv: return "CONV";
    case BlockType::kXX: return "XX";
    case BlockType::kBL: return "BL";
    case BlockType::kDW: return "DW";
  }
  return "?";
}

std::optional<BlockType> parse_block_type(std::string_view text) {
  if (text == "CONV") return BlockType::kConv;
  if (text == "XX") return BlockType::kXX;
  if (text == "BL") return BlockType::kBL;
  if (text == "DW") return BlockType::kDW;
  return std::nullopt;
}

int SuperBlock::inner_width() const {
  return static_cast<int>(std::llround(static_cast<double>(width) * ratio));
}

long long NetworkStructure::stride_product() const {
  long long product = 1;
  for (const auto& sb : superblocks) {
    product *= sb.stride;
  }
  return product;
}

bool is_body_index(const NetworkStructure& net, int index) {
  return index > 0 && index + 1 < static_cast<int>(net.superblocks.size());
}

std::string_view to_string(Rule rule) {
  switch (rule) {
    case Rule::kMinLength: return "MIN_LENGTH";
    case Rule::kStem: return "STEM_RULE";
    case Rule::kHead: return "HEAD_RULE";
    case Rule::kResolution: return "RESOLUTION_RULE";
    case Rule::kClasses: return "CLASSES_RULE";
    case Rule::kDivisibility: return "DIVISIBILITY";
    case Rule::kDepth: return "DEPTH_RULE";
    case Rule::kWidth: return "WIDTH_RULE";
    case Rule::kStride: return "STRIDE_RULE";
    case Rule::kKernel: return "KERNEL_RULE";
    case Rule::kRatio: return "RATIO_RULE";
    case Rule::kInnerWidth: return "INNER_WIDTH_RULE";
  }
  return "?";
}

namespace {

bool is_integral_product(int width, double ratio) {
  const double product = static_cast<double>(width) * ratio;
  const double rounded = std::round(product);
  return rounded >= 1.0 && std::abs(product - rounded) <= 1e-9 * std::max(1.0, product);
}

void check_block(const SuperBlock& sb, int index, std::vector<Violation>& out) {
  auto add = [&](Rule rule, std::string message) {
    out.push_back(Violation{rule, index, std::move(message)});
  };
  if (sb.depth < 1) add(Rule::kDepth, "depth must be >= 1");
  if (sb.width < 1) add(Rule::kWidth, "width must be >= 1");
  if (sb.stride != 1 && sb.stride != 2) add(Rule::kStride, "stride must be 1 or 2");
  if (sb.kernel < 1 || sb.kernel % 2 == 0) add(Rule::kKernel, "kernel must be odd and positive");

  if (!std::isfinite(sb.ratio) || sb.ratio <= 0.0) {
    add(Rule::kRatio, "ratio must be positive and finite");
    return;
  }
  switch (sb.type) {
    case BlockType::kConv:
    case BlockType::kXX:
      if (sb.ratio != 1.0) add(Rule::kRatio, std::string(to_string(sb.type)) + " requires ratio 1");
      break;
    case BlockType::kBL:
      if (sb.ratio > 1.0) add(Rule::kRatio, "BL requires 0 < ratio <= 1");
      break;
    case BlockType::kDW:
      if (sb.ratio < 1.0) add(Rule::kRatio, "DW requires ratio >= 1");
      break;
  }
  if ((sb.type == BlockType::kBL || sb.type == BlockType::kDW) && sb.width >= 1 &&
      !is_integral_product(sb.width, sb.ratio)) {
    add(Rule::kInnerWidth, "width * ratio must be a positive integer");
  }
}

}  // namespace

std::vector<Violation> validate_structure(const NetworkStructure& net) {
  std::vector<Violation> out;
  if (net.resolution <= 0) {
    out.push_back({Rule::kResolution, std::nullopt, "resolution must be positive"});
  }
  if (net.num_classes <= 0) {
    out.push_back({Rule::kClasses, std::nullopt, "num_classes must be positive"});
  }
  if (net.superblocks.size() < 2) {
    out.push_back({Rule::kMinLength, std::nullopt, "need at least a stem and a head"});
  }
  if (!net.superblocks.empty()) {
    const auto& stem = net.superblocks.front();
    if (stem.type != BlockType::kConv || stem.stride != 2) {
      out.push_back({Rule::kStem, 0, "first super-block must be CONV with stride 2"});
    }
  }
  if (net.superblocks.size() >= 2) {
    const auto& head = net.superblocks.back();
    if (head.type != BlockType::kConv || head.kernel != 1) {
      out.push_back({Rule::kHead, static_cast<int>(net.superblocks.size()) - 1,
                     "last super-block must be a 1x1 CONV"});
    }
  }
  bool strides_ok = true;
  for (std::size_t i = 0; i < net.superblocks.size(); ++i) {
    const auto before = out.size();
    check_block(net.superblocks[i], static_cast<int>(i), out);
    for (auto j = before; j < out.size(); ++j) {
      if (out[j].rule == Rule::kStride) strides_ok = false;
    }
  }
  if (strides_ok && net.resolution > 0 && net.resolution % net.stride_product() != 0) {
    out.push_back({Rule::kDivisibility, std::nullopt,
                   "resolution " + std::to_string(net.resolution) +
                       " is not divisible by stride product " + std::to_string(net.stride_product())});
  }
  return out;
}

// --- JSON ---------------------------------------------------------------------

namespace {

[[noreturn]] void schema_error(const std::string& message, std::optional<int> index = std::nullopt) {
  throw Error(ErrorCode::kSchemaViolation, message, index);
}

void require_exact_keys(const json& object, const std::set<std::string>& keys, const std::string& where,
                        std::optional<int> index) {
  if (!object.is_object()) schema_error(where + " must be an object", index);
  for (const auto& key : keys) {
    if (!object.contains(key)) schema_error(where + " is missing field '" + key + "'", index);
  }
  for (const auto& item : object.items()) {
    if (keys.count(item.key()) == 0) schema_error(where + " has unexpected field '" + item.key() + "'", index);
  }
}

int read_int(const json& object, const char* key, std::optional<int> index) {
  const auto& value = object.at(key);
  if (!value.is_number_integer()) schema_error(std::string("'") + key + "' must be an integer", index);
  const auto wide = value.get<long long>();
  if (wide < INT_MIN || wide > INT_MAX) schema_error(std::string("'") + key + "' is out of range", index);
  return static_cast<int>(wide);
}

}  // namespace

NetworkStructure parse_structure_unchecked(std::string_view document) {
  json root;
  try {
    root = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kMalformedDocument, e.what());
  }

  require_exact_keys(root, {"name", "resolution", "num_classes", "superblocks"}, "document", std::nullopt);
  NetworkStructure net;
  if (!root["name"].is_string()) schema_error("'name' must be a string");
  net.name = root["name"].get<std::string>();
  net.resolution = read_int(root, "resolution", std::nullopt);
  net.num_classes = read_int(root, "num_classes", std::nullopt);

  const auto& blocks = root["superblocks"];
  if (!blocks.is_array()) schema_error("'superblocks' must be an array");
  int index = 0;
  for (const auto& entry : blocks) {
    require_exact_keys(entry, {"type", "depth", "width", "stride", "kernel", "ratio"}, "super-block", index);
    SuperBlock sb;
    if (!entry["type"].is_string()) schema_error("'type' must be a string", index);
    const auto type = parse_block_type(entry["type"].get<std::string>());
    if (!type) schema_error("unknown block type '" + entry["type"].get<std::string>() + "'", index);
    sb.type = *type;
    sb.depth = read_int(entry, "depth", index);
    sb.width = read_int(entry, "width", index);
    sb.stride = read_int(entry, "stride", index);
    sb.kernel = read_int(entry, "kernel", index);
    if (!entry["ratio"].is_number()) schema_error("'ratio' must be a number", index);
    sb.ratio = entry["ratio"].get<double>();
    net.superblocks.push_back(sb);
    ++index;
  }
  return net;
}

NetworkStructure parse_structure(std::string_view document) {
  auto net = parse_structure_unchecked(document);
  const auto violations = validate_structure(net);
  if (!violations.empty()) {
    const auto& first = violations.front();
    throw Error(ErrorCode::kInvariantViolation,
                std::string(to_string(first.rule)) + ": " + first.message, first.index);
  }
  return net;
}

std::string serialize_structure(const NetworkStructure& net) {
  json blocks = json::array();
  for (const auto& sb : net.superblocks) {
    blocks.push_back(json{{"type", to_string(sb.type)},
                          {"depth", sb.depth},
                          {"width", sb.width},
                          {"stride", sb.stride},
                          {"kernel", sb.kernel},
                          {"ratio", sb.ratio}});
  }
  const json root{{"name", net.name},
                  {"resolution", net.resolution},
                  {"num_classes", net.num_classes},
                  {"superblocks", std::move(blocks)}};
  return root.dump(2) + "\n";
}

NetworkStructure load_structure(const std::string& path) {
  return parse_structure(read_text_file(path));
}

// --- layers -------------------------------------------------------------------

std::string_view to_string(LayerRole role) {
  switch (role) {
    case LayerRole::kPlain: return "conv";
    case LayerRole::kFirst: return "conv1";
    case LayerRole::kSecond: return "conv2";
    case LayerRole::kReduce: return "reduce";
    case LayerRole::kExpand: return "expand";
    case LayerRole::kSpatial: return "spatial";
    case LayerRole::kDepthwise: return "depthwise";
    case LayerRole::kProject: return "project";
    case LayerRole::kShortcut: return "shortcut";
  }
  return "?";
}

int input_channels(const NetworkStructure& net, int index) {
  return index == 0 ? kImageChannels : net.superblocks.at(index - 1).width;
}

int input_resolution(const NetworkStructure& net, int index, int resolution) {
  int res = resolution;
  for (int i = 0; i < index; ++i) {
    res /= net.superblocks.at(i).stride;
  }
  return res;
}

namespace {

void expand_block(const SuperBlock& sb, int sb_index, int block_index, int in_channels, int stride, int res,
                  std::vector<LayerSpec>& out) {
  auto push = [&](LayerRole role, int cin, int cout, int kernel, int s, int groups, int input_res) {
    out.push_back(LayerSpec{sb_index, block_index, role, cin, cout, kernel, s, groups, input_res});
  };
  const int width = sb.width;
  const int k = sb.kernel;
  // Down-sampling sits on the first k > 1 layer; with k == 1 it falls back to the first layer.
  switch (sb.type) {
    case BlockType::kConv:
      push(LayerRole::kPlain, in_channels, width, k, stride, 1, res);
      return;
    case BlockType::kXX:
      push(LayerRole::kFirst, in_channels, width, k, stride, 1, res);
      push(LayerRole::kSecond, width, width, k, 1, 1, res / stride);
      break;
    case BlockType::kBL:
    case BlockType::kDW: {
      const int inner = sb.inner_width();
      const bool dw = sb.type == BlockType::kDW;
      const int first_stride = k > 1 ? 1 : stride;
      const int mid_stride = k > 1 ? stride : 1;
      push(dw ? LayerRole::kExpand : LayerRole::kReduce, in_channels, inner, 1, first_stride, 1, res);
      const int mid_res = res / first_stride;
      push(dw ? LayerRole::kDepthwise : LayerRole::kSpatial, inner, inner, k, mid_stride, dw ? inner : 1,
           mid_res);
      push(LayerRole::kProject, inner, width, 1, 1, 1, mid_res / mid_stride);
      break;
    }
  }
  if (in_channels != width || stride != 1) {
    push(LayerRole::kShortcut, in_channels, width, 1, stride, 1, res);
  }
}

}  // namespace

std::vector<LayerSpec> enumerate_layers(const NetworkStructure& net, int resolution) {
  const auto product = net.stride_product();
  if (resolution <= 0 || product <= 0 || resolution % product != 0) {
    throw Error(ErrorCode::kDivisibility, "resolution " + std::to_string(resolution) +
                                              " is not divisible by stride product " + std::to_string(product));
  }
  std::vector<LayerSpec> layers;
  int channels = kImageChannels;
  int res = resolution;
  for (std::size_t i = 0; i < net.superblocks.size(); ++i) {
    const auto& sb = net.superblocks[i];
    for (int b = 0; b < sb.depth; ++b) {
      const int stride = b == 0 ? sb.stride : 1;
      expand_block(sb, static_cast<int>(i), b, channels, stride, res, layers);
      channels = sb.width;
      res /= stride;
    }
  }
  return layers;
}

std::vector<LayerSpec> enumerate_layers(const NetworkStructure& net) {
  return enumerate_layers(net, net.resolution);
}

DepthwiseForm to_depthwise_form(const SuperBlock& block) {
  return DepthwiseForm{block.inner_width(), 1.0 / block.ratio};
}

SuperBlock from_depthwise_form(const SuperBlock& shape, const DepthwiseForm& form) {
  SuperBlock out = shape;
  out.ratio = 1.0 / form.bottleneck_ratio;
  out.width = static_cast<int>(std::llround(form.depthwise_width * form.bottleneck_ratio));
  return out;
}

}  // namespace genet
