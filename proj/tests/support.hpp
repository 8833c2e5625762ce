#pragma once

#include <string>
#include <vector>

#include "genet/cost_model.hpp"
#include "genet/error.hpp"
#include "genet/io.hpp"
#include "genet/structure.hpp"

#ifndef GENET_DATA_DIR
#error "GENET_DATA_DIR must be defined"
#endif

#ifdef DOCTEST_LIBRARY_INCLUDED
#define CHECK_ERROR_CODE(expr, expected)                     \
  do {                                                       \
    try {                                                    \
      (void)(expr);                                          \
      FAIL("expected " << genet::to_string(expected));       \
    } catch (const genet::Error& e) {                        \
      CHECK(genet::to_string(e.code()) == genet::to_string(expected)); \
    }                                                        \
  } while (0)
#endif

namespace testing {

inline std::string data_path(const std::string& relative) { return std::string(GENET_DATA_DIR) + "/" + relative; }

inline std::string read_data(const std::string& relative) { return genet::read_text_file(data_path(relative)); }

inline genet::NetworkStructure load_fixture(const std::string& name) {
  return genet::load_structure(data_path("structures/" + name + ".json"));
}

inline const std::vector<std::string>& fixture_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out{"genet-light", "genet-normal", "genet-large", "profilingnet-132"};
    for (int i = 1; i <= 20; ++i) out.push_back((i < 10 ? "net0" : "net") + std::to_string(i));
    return out;
  }();
  return names;
}

inline genet::SuperBlock block(genet::BlockType type, int depth, int width, int stride, int kernel,
                               double ratio = 1.0) {
  return {type, depth, width, stride, kernel, ratio};
}

// stem CONV d1 c8 s2 k3, head CONV d1 c16 s1 k1, resolution 32, 10 classes
inline genet::NetworkStructure minimal_net() {
  genet::NetworkStructure net;
  net.name = "minimal";
  net.resolution = 32;
  net.num_classes = 10;
  net.superblocks = {block(genet::BlockType::kConv, 1, 8, 2, 3), block(genet::BlockType::kConv, 1, 16, 1, 1)};
  return net;
}

// stem, XX, BL, DW, head at resolution 64.
inline genet::NetworkStructure small_master() {
  using genet::BlockType;
  genet::NetworkStructure net;
  net.name = "small";
  net.resolution = 64;
  net.num_classes = 10;
  net.superblocks = {block(BlockType::kConv, 1, 16, 2, 3), block(BlockType::kXX, 2, 32, 2, 3),
                     block(BlockType::kBL, 2, 64, 2, 3, 0.25), block(BlockType::kDW, 3, 48, 2, 5, 6.0),
                     block(BlockType::kConv, 1, 128, 1, 1)};
  return net;
}

// Adds rows at widths 8 and 4096 (linear in width) for every super-block key
// of every network, at each resolution, unless the key already has a curve.
template <typename LatencyOf>
void cover(genet::LatencyTable& table, const std::vector<genet::NetworkStructure>& nets,
           const std::vector<int>& resolutions, int batch, LatencyOf latency_of) {
  for (const auto& net : nets) {
    for (int resolution : resolutions) {
      int res = resolution;
      for (const auto& sb : net.superblocks) {
        genet::LatencyKey key{sb.type, 8, sb.ratio, sb.kernel, sb.stride, res, batch};
        if (table.width_curve(key).empty()) {
          table.insert(key, latency_of(key));
          key.width = 4096;
          table.insert(key, latency_of(key));
        }
        res /= sb.stride;
      }
    }
  }
}

}  // namespace testing
