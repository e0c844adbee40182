#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "gait/network.hpp"
#include "gait/rng.hpp"
#include "gait/rules.hpp"

namespace gait {

// Norms at or below this are treated as zero; cosine and ratio are undefined.
inline constexpr double kZeroNorm = 1e-300;

struct LayerAlignment {
  std::optional<double> cosine;      // of the flattened matrices
  std::optional<double> norm_ratio;  // ||a||_F / ||b||_F
  std::vector<std::pair<double, double>> scatter;  // (a_ij, b_ij)
};

struct AlignmentReport {
  std::vector<LayerAlignment> layers;
  std::vector<double> orthogonality_errors;  // filled by callers that have a network
};

inline constexpr std::size_t kDefaultScatterPoints = 2000;

// Per-layer comparison of two update sets. When a layer has more than
// `subsample` entries the scatter keeps `subsample` of them, drawn without
// replacement from `rng`.
AlignmentReport align(const UpdateSet& a, const UpdateSet& b,
                      std::size_t subsample = kDefaultScatterPoints, Rng rng = Rng(0));

// orthogonality_error of every layer's weight.
std::vector<double> ortho_drift(const Network& net);

double cosine_similarity(const Matrix& a, const Matrix& b);

// header: layer,cosine,norm_ratio ; undefined values are written as "undefined"
void write_alignment_csv(std::ostream& out, const AlignmentReport& report);
// header: layer,elem_a,elem_b
void write_scatter_csv(std::ostream& out, const AlignmentReport& report);

}  // namespace gait
