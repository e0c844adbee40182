#include "gait/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>

#include "gait/network.hpp"

namespace gait {

namespace {

const char* idx_kind_name(IdxErrorKind k) {
  switch (k) {
    case IdxErrorKind::BadMagic: return "IdxBadMagic";
    case IdxErrorKind::Truncated: return "IdxTruncated";
    case IdxErrorKind::CountMismatch: return "IdxCountMismatch";
    case IdxErrorKind::Io: return "IdxIo";
  }
  return "Idx";
}

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IdxError(IdxErrorKind::Io, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IdxError(IdxErrorKind::Io, "write failed for " + path.string());
}

std::size_t exact_sqrt(std::size_t n) {
  auto r = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  return r * r == n ? r : 0;
}

}  // namespace

IdxError::IdxError(IdxErrorKind kind, const std::string& message)
    : Error(idx_kind_name(kind), message), idx_kind_(kind) {}

Dataset Dataset::head(std::size_t count) const {
  Dataset out = *this;
  if (count < size()) {
    out.labels.resize(count);
    out.values.resize(count * features);
  }
  return out;
}

void Dataset::validate() const {
  if (values.size() != labels.size() * features) {
    throw InvalidArgument("dataset values do not match labels x features");
  }
  for (std::size_t l : labels) {
    if (l >= classes) throw InvalidArgument("dataset label " + std::to_string(l) + " out of range");
  }
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IdxError(IdxErrorKind::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IdxError(IdxErrorKind::Io, "read failed for " + path.string());
  return bytes;
}

Dataset parse_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels,
                  std::size_t classes) {
  if (images.size() < 4 || labels.size() < 4) {
    throw IdxError(IdxErrorKind::Truncated, "IDX file shorter than its magic number");
  }
  if (read_be32(images, 0) != kIdxImageMagic) {
    throw IdxError(IdxErrorKind::BadMagic, "image file magic is not 0x00000803");
  }
  if (read_be32(labels, 0) != kIdxLabelMagic) {
    throw IdxError(IdxErrorKind::BadMagic, "label file magic is not 0x00000801");
  }
  if (images.size() < 16) throw IdxError(IdxErrorKind::Truncated, "image header truncated");
  if (labels.size() < 8) throw IdxError(IdxErrorKind::Truncated, "label header truncated");

  const std::size_t n_images = read_be32(images, 4);
  const std::size_t rows = read_be32(images, 8);
  const std::size_t cols = read_be32(images, 12);
  const std::size_t n_labels = read_be32(labels, 4);
  const std::size_t features = rows * cols;

  const std::size_t image_payload = images.size() - 16;
  if (features != 0 && n_images > image_payload / features) {
    throw IdxError(IdxErrorKind::Truncated, "image payload shorter than header");
  }
  if (image_payload != n_images * features) {
    throw IdxError(IdxErrorKind::Truncated, "image payload size does not match header");
  }
  if (labels.size() - 8 != n_labels) {
    throw IdxError(IdxErrorKind::Truncated, "label payload size does not match header");
  }
  if (n_images != n_labels) {
    throw IdxError(IdxErrorKind::CountMismatch, std::to_string(n_images) + " images but " +
                                                    std::to_string(n_labels) + " labels");
  }

  Dataset ds;
  ds.features = features;
  ds.classes = classes;
  ds.image_rows = rows;
  ds.values.resize(n_images * features);
  for (std::size_t k = 0; k < ds.values.size(); ++k) ds.values[k] = images[16 + k] / 255.0;
  ds.labels.resize(n_labels);
  for (std::size_t k = 0; k < n_labels; ++k) {
    ds.labels[k] = labels[8 + k];
    if (ds.labels[k] >= classes) {
      throw IdxError(IdxErrorKind::CountMismatch, "label " + std::to_string(ds.labels[k]) +
                                                      " exceeds class count " +
                                                      std::to_string(classes));
    }
  }
  return ds;
}

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                 std::size_t classes) {
  return parse_idx(read_file(images), read_file(labels), classes);
}

IdxBytes encode_idx(const Dataset& ds, std::size_t rows) {
  ds.validate();
  if (rows == 0) rows = ds.image_rows;
  if (rows == 0) rows = exact_sqrt(ds.features);
  if (rows == 0) rows = 1;
  if (ds.features % rows != 0) throw InvalidArgument("image height does not divide feature count");
  if (ds.classes > 256) throw InvalidArgument("IDX labels hold at most 256 classes");

  IdxBytes out;
  out.images.reserve(16 + ds.values.size());
  write_be32(out.images, kIdxImageMagic);
  write_be32(out.images, static_cast<std::uint32_t>(ds.size()));
  write_be32(out.images, static_cast<std::uint32_t>(rows));
  write_be32(out.images, static_cast<std::uint32_t>(ds.features / rows));
  for (double v : ds.values) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("IDX pixels must lie in [0, 1]");
    out.images.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0)));
  }
  out.labels.reserve(8 + ds.size());
  write_be32(out.labels, kIdxLabelMagic);
  write_be32(out.labels, static_cast<std::uint32_t>(ds.size()));
  for (std::size_t l : ds.labels) out.labels.push_back(static_cast<std::uint8_t>(l));
  return out;
}

void write_idx(const Dataset& ds, const std::filesystem::path& images,
               const std::filesystem::path& labels, std::size_t rows) {
  const IdxBytes bytes = encode_idx(ds, rows);
  write_file(images, bytes.images);
  write_file(labels, bytes.labels);
}

Vector one_hot(std::size_t label, std::size_t classes) {
  if (label >= classes) {
    throw InvalidArgument("label " + std::to_string(label) + " out of range for " +
                          std::to_string(classes) + " classes");
  }
  Vector v(classes, 0.0);
  v[label] = 1.0;
  return v;
}

Dataset synthetic_teacher(std::size_t n_in, std::size_t depth, std::size_t n_classes,
                          std::size_t samples, const Rng& rng, TeacherOptions opts) {
  if (n_classes == 0 || n_classes > n_in) {
    throw InvalidArgument("teacher needs 1 <= n_classes <= n_in");
  }
  Dataset ds;
  ds.features = n_in;
  ds.classes = n_classes;
  if (samples == 0) return ds;

  const Network teacher = make_network(Architecture::fixed_width(n_in, depth, n_classes),
                                       InitScheme::Orthogonal, rng.split(0));
  Rng draws = rng.split(1);
  ds.values.resize(samples * n_in);
  for (double& v : ds.values) {
    v = opts.quantize ? static_cast<double>(draws.below(256)) / 255.0 : draws.uniform();
  }
  const Matrix inputs = Matrix(samples, n_in, ds.values).transposed();
  const Matrix out = forward(teacher, inputs).output(teacher);
  ds.labels.resize(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < n_classes; ++c) {
      if (out(c, s) > out(best, s)) best = c;
    }
    ds.labels[s] = best;
  }
  return ds;
}

std::vector<std::vector<std::size_t>> batch_indices(std::size_t n, std::size_t batch_size,
                                                    bool shuffle, Rng& rng) {
  if (batch_size == 0) throw InvalidArgument("batch size must be at least 1");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle) {
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  }
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t first = 0; first < n; first += batch_size) {
    const std::size_t last = std::min(n, first + batch_size);
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(first),
                     order.begin() + static_cast<std::ptrdiff_t>(last));
  }
  return out;
}

Batch make_batch(const Dataset& ds, std::span<const std::size_t> indices) {
  if (indices.empty()) throw InvalidArgument("empty batch");
  Batch b;
  b.inputs = Matrix(ds.features, indices.size());
  b.targets = Matrix(ds.classes, indices.size());
  b.labels.reserve(indices.size());
  for (std::size_t j = 0; j < indices.size(); ++j) {
    const std::size_t i = indices[j];
    if (i >= ds.size()) throw InvalidArgument("batch index out of range");
    b.inputs.set_col(j, ds.input(i));
    b.targets(ds.labels[i], j) = 1.0;
    b.labels.push_back(ds.labels[i]);
  }
  return b;
}

std::vector<Batch> batches(const Dataset& ds, std::size_t batch_size, bool shuffle, Rng& rng) {
  std::vector<Batch> out;
  for (const auto& idx : batch_indices(ds.size(), batch_size, shuffle, rng)) {
    out.push_back(make_batch(ds, idx));
  }
  return out;
}

}  // namespace gait
