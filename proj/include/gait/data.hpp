#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gait/error.hpp"
#include "gait/linalg.hpp"
#include "gait/rng.hpp"

namespace gait {

// Labelled inputs stored sample-major: sample i occupies
// values[i * features, (i + 1) * features).
struct Dataset {
  std::size_t features = 0;
  std::size_t classes = 0;
  // Image height when the samples came from (or go to) an IDX file; 0 if the
  // inputs have no image shape.
  std::size_t image_rows = 0;
  std::vector<double> values;
  std::vector<std::size_t> labels;

  std::size_t size() const noexcept { return labels.size(); }
  bool empty() const noexcept { return labels.empty(); }
  std::span<const double> input(std::size_t i) const {
    return std::span<const double>(values).subspan(i * features, features);
  }
  // First `count` samples (all of them if count >= size()).
  Dataset head(std::size_t count) const;
  // Throws InvalidArgument when sizes disagree or a label is out of range.
  void validate() const;
};

enum class IdxErrorKind { BadMagic, Truncated, CountMismatch, Io };

class IdxError : public Error {
 public:
  IdxError(IdxErrorKind kind, const std::string& message);
  IdxErrorKind idx_kind() const noexcept { return idx_kind_; }

 private:
  IdxErrorKind idx_kind_;
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;
inline constexpr std::size_t kMnistClasses = 10;

// Parses an IDX image file and its label file. Pixels are divided by 255.
// Labels must be < `classes`.
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                 std::size_t classes = kMnistClasses);
// In-memory variants of the same parser.
Dataset parse_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels,
                  std::size_t classes = kMnistClasses);

// Writes `ds` as IDX; pixels become round(255 * v), so values must lie in
// [0, 1]. The image height is `rows`, or ds.image_rows when `rows` is 0;
// when both are 0 a perfect-square feature count is written square and
// anything else as a single row.
struct IdxBytes {
  std::vector<std::uint8_t> images;
  std::vector<std::uint8_t> labels;
};
IdxBytes encode_idx(const Dataset& ds, std::size_t rows = 0);
void write_idx(const Dataset& ds, const std::filesystem::path& images,
               const std::filesystem::path& labels, std::size_t rows = 0);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

Vector one_hot(std::size_t label, std::size_t classes);

struct TeacherOptions {
  // Draw inputs from {0, 1/255, ..., 1} so the dataset survives an IDX
  // round trip unchanged.
  bool quantize = false;
};

// Inputs uniform on [0, 1]^n_in; labels are the argmax over the first
// n_classes outputs of a frozen LeakyRelu network with orthogonal weights,
// `depth` hidden layers and width n_in.
Dataset synthetic_teacher(std::size_t n_in, std::size_t depth, std::size_t n_classes,
                          std::size_t samples, const Rng& rng, TeacherOptions opts = {});

struct Batch {
  Matrix inputs;   // features x batch
  Matrix targets;  // classes x batch, one-hot
  std::vector<std::size_t> labels;
};

// Sample order of one epoch split into batches; the last batch may be
// shorter. With shuffle the order is a Fisher-Yates permutation from `rng`.
std::vector<std::vector<std::size_t>> batch_indices(std::size_t n, std::size_t batch_size,
                                                    bool shuffle, Rng& rng);
Batch make_batch(const Dataset& ds, std::span<const std::size_t> indices);
std::vector<Batch> batches(const Dataset& ds, std::size_t batch_size, bool shuffle, Rng& rng);

}  // namespace gait
