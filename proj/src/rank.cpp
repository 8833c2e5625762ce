#include "genet/rank.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <limits>
#include <sstream>

#include "genet/error.hpp"
#include "genet/io.hpp"

namespace genet {

namespace {

class Reader {
 public:
  explicit Reader(std::span<const std::byte> bytes) : bytes_(bytes) {}

  std::span<const std::byte> take(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw Error(ErrorCode::kTruncated, std::string("file ends inside ") + what);
    }
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

  std::uint32_t u32(const char* what) {
    const auto b = take(4, what);
    return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
           static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
  }

  std::uint16_t u16(const char* what) {
    const auto b = take(2, what);
    return static_cast<std::uint16_t>(static_cast<unsigned>(b[0]) | static_cast<unsigned>(b[1]) << 8);
  }

  [[nodiscard]] std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::byte> bytes_;
  std::size_t pos_ = 0;
};

void put_u32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::byte>((v >> shift) & 0xFFu));
}

}  // namespace

KernelTensor decode_kernel(std::span<const std::byte> bytes) {
  Reader in(bytes);
  const std::size_t head = std::min(bytes.size(), kKernelMagic.size());
  if (std::memcmp(bytes.data(), kKernelMagic.data(), head) != 0) {
    throw Error(ErrorCode::kBadMagic, "missing KT01 magic");
  }
  in.take(kKernelMagic.size(), "magic");

  KernelTensor t;
  const auto name_len = in.u16("name length");
  const auto name = in.take(name_len, "name");
  t.layer_name.assign(reinterpret_cast<const char*>(name.data()), name.size());

  const auto ndim = in.u32("ndim");
  if (ndim != 4) throw Error(ErrorCode::kBadDims, "ndim must be 4, got " + std::to_string(ndim));
  std::uint64_t count = 1;
  for (auto& d : t.dims) {
    d = in.u32("dims");
    if (d == 0) throw Error(ErrorCode::kBadDims, "zero-sized dimension");
    if (count > std::numeric_limits<std::uint64_t>::max() / 4 / d) {
      throw Error(ErrorCode::kDimOverflow, "element count overflows");
    }
    count *= d;
  }
  if (t.dims[2] != t.dims[3]) throw Error(ErrorCode::kBadDims, "kernel must be square");
  if (count > in.remaining() / 4) {
    throw Error(ErrorCode::kTruncated, "payload shorter than " + std::to_string(count) + " floats");
  }
  const auto payload = in.take(count * 4, "payload");
  if (in.remaining() != 0) throw Error(ErrorCode::kTrailingBytes, "bytes after payload");

  t.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto* b = payload.data() + 4 * i;
    const std::uint32_t bits = static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
                               static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
    t.data[i] = std::bit_cast<float>(bits);
  }
  return t;
}

std::vector<std::byte> encode_kernel(const KernelTensor& tensor) {
  if (tensor.layer_name.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw Error(ErrorCode::kBadDims, "layer name longer than 65535 bytes");
  }
  std::vector<std::byte> out;
  for (const char c : kKernelMagic) out.push_back(static_cast<std::byte>(c));
  const auto len = static_cast<std::uint16_t>(tensor.layer_name.size());
  out.push_back(static_cast<std::byte>(len & 0xFFu));
  out.push_back(static_cast<std::byte>(len >> 8));
  for (const char c : tensor.layer_name) out.push_back(static_cast<std::byte>(c));
  put_u32(out, 4);
  for (const auto d : tensor.dims) put_u32(out, d);
  for (const float f : tensor.data) put_u32(out, std::bit_cast<std::uint32_t>(f));
  return out;
}

KernelTensor load_kernel(const std::string& path) {
  const auto text = read_text_file(path);
  return decode_kernel(std::as_bytes(std::span(text.data(), text.size())));
}

void write_kernel(const std::string& path, const KernelTensor& tensor) {
  const auto bytes = encode_kernel(tensor);
  write_text_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

Matrix reshape_kernel(const KernelTensor& tensor) {
  const std::size_t rows = tensor.dims[0];
  const std::size_t cols = static_cast<std::size_t>(tensor.dims[1]) * tensor.dims[2] * tensor.dims[3];
  if (tensor.data.size() != rows * cols) throw Error(ErrorCode::kBadDims, "payload length does not match dims");
  return Matrix(rows, cols, std::vector<double>(tensor.data.begin(), tensor.data.end()));
}

SpectrumReport spectrum(const KernelTensor& tensor) {
  const auto sigma = singular_values(reshape_kernel(tensor));
  if (sigma.empty() || sigma.front() == 0.0) {
    throw Error(ErrorCode::kZeroKernel, "kernel '" + tensor.layer_name + "' is all zero");
  }
  SpectrumReport report;
  report.layer_name = tensor.layer_name;
  const double top = sigma.front();
  const double c_out = tensor.out_channels();
  double sum = 0.0;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    const double lambda = sigma[i] / top;
    report.points.push_back({static_cast<double>(i + 1) / c_out, lambda});
    sum += lambda;
  }
  report.decay_area = sum / static_cast<double>(sigma.size());
  return report;
}

std::string stage_report(std::span<const KernelTensor> kernels) {
  std::vector<SpectrumReport> reports;
  reports.reserve(kernels.size());
  for (const auto& k : kernels) reports.push_back(spectrum(k));

  std::ostringstream out;
  out << "layer_name,x,lambda\n";
  for (const auto& r : reports) {
    for (const auto& p : r.points) {
      out << r.layer_name << ',' << format_number(p.x) << ',' << format_number(p.lambda) << '\n';
    }
  }
  out << "\n# summary\nlayer_name,decay_area\n";
  for (const auto& r : reports) out << r.layer_name << ',' << format_number(r.decay_area) << '\n';
  return out.str();
}

}  // namespace genet
