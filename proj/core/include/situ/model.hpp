#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "situ/params.hpp"

namespace situ {

// kAnchorBins is the full method. The other two exist for ablations:
// kAngleRegression regresses the anchor-relative yaw as one scalar, and
// kNoAnchor regresses a global pose from the situation feature alone.
enum class Variant : std::uint32_t { kAnchorBins = 0, kAngleRegression = 1, kNoAnchor = 2 };

std::string_view variant_name(Variant v);
// Throws ConfigError on an unknown name.
Variant variant_from_name(std::string_view name);

struct ModelConfig {
  Variant variant = Variant::kAnchorBins;
  int feature_dim = 64;    // d, width of h_GRD and h_k
  int cue_hidden = 64;
  int anchor_hidden = 64;
  int head_hidden = 128;
  int bins = 12;           // yaw bins B
  int bearing_bins = 8;    // must match the cue generator
  int distance_bands = 4;
  std::vector<std::string> vocabulary;  // an extra reserved slot holds unknown labels

  // 9 geometric features followed by a one-hot over vocabulary + unknown.
  int anchor_input_dim() const { return 9 + static_cast<int>(vocabulary.size()) + 1; }
  int label_slots() const { return static_cast<int>(vocabulary.size()) + 1; }
  int head_input_dim() const { return variant == Variant::kNoAnchor ? feature_dim : 2 * feature_dim; }
  int head_output_dim() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Throws ConfigError naming every invalid field.
void validate(const ModelConfig& cfg);

// Parameters of the cue encoder, anchor encoder and grounding head.
class Model {
 public:
  explicit Model(ModelConfig cfg);

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every block; embedding
  // tables use fan_in = 1.
  static Model initialized(ModelConfig cfg, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  const ParamLayout& layout() const { return layout_; }
  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  // Index into the one-hot label slots; unknown labels map to the last slot.
  int label_index(const std::string& label) const;

  struct Blocks {
    std::size_t cue_label_band = 0, cue_bearing_band = 0;
    std::size_t cue_w1 = 0, cue_b1 = 0, cue_w2 = 0, cue_b2 = 0;
    std::size_t anc_w1 = 0, anc_b1 = 0, anc_w2 = 0, anc_b2 = 0;
    std::size_t head_w1 = 0, head_b1 = 0, head_w2 = 0, head_b2 = 0;
    bool has_anchor_encoder = false;
  };
  const Blocks& blocks() const { return blocks_; }

  ParamLayout::ConstMatMap view(std::size_t block) const { return layout_.view(params_, block); }
  ParamLayout::MatMap view(std::size_t block) { return layout_.view(params_, block); }

 private:
  ModelConfig cfg_;
  ParamLayout layout_;
  Blocks blocks_;
  Eigen::VectorXd params_;
};

// Params file, all integers little-endian:
//   "SITUPRM1"                         8-byte magic
//   u32 version (=1)
//   u32 variant, feature_dim, cue_hidden, anchor_hidden, head_hidden,
//       bins, bearing_bins, distance_bands
//   u32 vocabulary size, then per label: u32 byte length + UTF-8 bytes
//   u32 block count, then per block: u32 name length + name, u32 rows, u32 cols
//   u64 value count, then that many IEEE-754 binary64 values (column-major
//   per block, blocks in header order)
void save_model(const std::filesystem::path& path, const Model& model);

// Throws DimensionMismatch when the block table disagrees with the
// dimension header, ParseError on a malformed file.
Model load_model(const std::filesystem::path& path);

}  // namespace situ
