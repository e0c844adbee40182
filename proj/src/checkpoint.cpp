#include "gait/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "gait/error.hpp"

namespace gait {

namespace {

constexpr char kMagic[8] = {'G', 'A', 'I', 'T', 'P', 'N', 'E', 'T'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) {
      throw FormatError("checkpoint truncated at byte " + std::to_string(pos_));
    }
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes_[pos_++]} << (8 * i);
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes_[pos_++]} << (8 * i);
    return std::bit_cast<double>(v);
  }
  bool at_end() const { return pos_ == bytes_.size(); }
  std::size_t pos() const { return pos_; }
  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Network& net) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(net.depth()));
  for (const Layer& layer : net.layers()) {
    put_u32(out, static_cast<std::uint32_t>(layer.total_width()));
    put_u32(out, static_cast<std::uint32_t>(layer.forward_width));
    put_u32(out, layer.activation.kind == ActivationKind::Linear ? 0u : 1u);
    put_u32(out, 0u);
    put_f64(out, layer.activation.slope);
    for (double v : layer.weight.data()) put_f64(out, v);
  }
  return out;
}

Network decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader in(bytes);
  in.need(sizeof(kMagic));
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw FormatError("not a network checkpoint (bad magic)");
  }
  in.skip(sizeof(kMagic));
  const std::uint32_t version = in.u32();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint32_t count = in.u32();
  if (count == 0) throw FormatError("checkpoint has no layers");
  std::vector<Layer> layers;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t total = in.u32();
    const std::uint32_t fwd = in.u32();
    const std::uint32_t kind = in.u32();
    in.u32();
    const double slope = in.f64();
    if (total == 0) throw FormatError("checkpoint layer " + std::to_string(i) + " has width 0");
    if (kind > 1) throw FormatError("unknown activation kind " + std::to_string(kind));
    const std::size_t n = std::size_t{total} * total;
    if (n > bytes.size() / 8) throw FormatError("checkpoint truncated in layer " + std::to_string(i));
    in.need(n * 8);
    std::vector<double> w(n);
    for (double& v : w) v = in.f64();
    Activation act = kind == 0 ? Activation::linear() : Activation{ActivationKind::LeakyRelu, slope};
    try {
      layers.push_back(Layer{Matrix(total, total, std::move(w)), act, fwd});
    } catch (const Error& e) {
      throw FormatError("checkpoint layer " + std::to_string(i) + ": " + e.what());
    }
  }
  if (!in.at_end()) throw FormatError("trailing bytes after checkpoint payload");
  try {
    return Network(std::move(layers));
  } catch (const Error& e) {
    throw FormatError(std::string("inconsistent checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Network& net, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(net);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("failed writing " + path.string());
}

Network load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace gait
