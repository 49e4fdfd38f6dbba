#include "situ/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "situ/error.hpp"
#include "situ/rng.hpp"

namespace situ {

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::kAnchorBins: return "anchor_bins";
    case Variant::kAngleRegression: return "angle_regression";
    case Variant::kNoAnchor: return "no_anchor";
  }
  return "unknown";
}

Variant variant_from_name(std::string_view name) {
  for (Variant v : {Variant::kAnchorBins, Variant::kAngleRegression, Variant::kNoAnchor}) {
    if (variant_name(v) == name) {
      return v;
    }
  }
  throw ConfigError("variant: unknown value '" + std::string(name) + "'");
}

int ModelConfig::head_output_dim() const {
  switch (variant) {
    case Variant::kAnchorBins: return 1 + 3 + bins;
    case Variant::kAngleRegression: return 1 + 3 + 1;
    case Variant::kNoAnchor: return 3 + bins;
  }
  return 0;
}

void validate(const ModelConfig& cfg) {
  std::string bad;
  auto flag = [&](bool ok, const char* field) {
    if (!ok) {
      bad += bad.empty() ? field : std::string(", ") + field;
    }
  };
  flag(cfg.feature_dim > 0, "feature_dim");
  flag(cfg.cue_hidden > 0, "cue_hidden");
  flag(cfg.anchor_hidden > 0, "anchor_hidden");
  flag(cfg.head_hidden > 0, "head_hidden");
  flag(cfg.bins >= 2, "bins");
  flag(cfg.bearing_bins >= 2, "bearing_bins");
  flag(cfg.distance_bands >= 1, "distance_bands");
  flag(static_cast<std::uint32_t>(cfg.variant) <= 2, "variant");
  if (!bad.empty()) {
    throw ConfigError("invalid model config: " + bad);
  }
}

Model::Model(ModelConfig cfg) : cfg_(std::move(cfg)) {
  validate(cfg_);
  const int d = cfg_.feature_dim;
  auto& b = blocks_;
  b.cue_label_band = layout_.add("cue.label_band_embedding", d, cfg_.label_slots() * cfg_.distance_bands);
  b.cue_bearing_band = layout_.add("cue.bearing_band_embedding", d, cfg_.bearing_bins * cfg_.distance_bands);
  b.cue_w1 = layout_.add("cue.hidden.weight", cfg_.cue_hidden, d);
  b.cue_b1 = layout_.add("cue.hidden.bias", cfg_.cue_hidden, 1);
  b.cue_w2 = layout_.add("cue.out.weight", d, cfg_.cue_hidden);
  b.cue_b2 = layout_.add("cue.out.bias", d, 1);
  b.has_anchor_encoder = cfg_.variant != Variant::kNoAnchor;
  if (b.has_anchor_encoder) {
    b.anc_w1 = layout_.add("anchor.hidden.weight", cfg_.anchor_hidden, cfg_.anchor_input_dim());
    b.anc_b1 = layout_.add("anchor.hidden.bias", cfg_.anchor_hidden, 1);
    b.anc_w2 = layout_.add("anchor.out.weight", d, cfg_.anchor_hidden);
    b.anc_b2 = layout_.add("anchor.out.bias", d, 1);
  }
  b.head_w1 = layout_.add("head.hidden.weight", cfg_.head_hidden, cfg_.head_input_dim());
  b.head_b1 = layout_.add("head.hidden.bias", cfg_.head_hidden, 1);
  b.head_w2 = layout_.add("head.out.weight", cfg_.head_output_dim(), cfg_.head_hidden);
  b.head_b2 = layout_.add("head.out.bias", cfg_.head_output_dim(), 1);
  params_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout_.size()));
}

Model Model::initialized(ModelConfig cfg, std::uint64_t seed) {
  Model m(std::move(cfg));
  Rng rng(mix_seed(seed, 0x1417));
  const auto& b = m.blocks_;
  // Bias blocks share the fan-in of the weight block preceding them.
  int fan_in = 1;
  for (std::size_t i = 0; i < m.layout_.blocks().size(); ++i) {
    const auto& blk = m.layout_.block(i);
    if (i == b.cue_label_band || i == b.cue_bearing_band) {
      fan_in = 1;
    } else if (blk.cols > 1) {
      fan_in = blk.cols;
    }
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t k = 0; k < blk.size(); ++k) {
      m.params_[static_cast<Eigen::Index>(blk.offset + k)] = rng.uniform(-bound, bound);
    }
  }
  return m;
}

int Model::label_index(const std::string& label) const {
  for (std::size_t i = 0; i < cfg_.vocabulary.size(); ++i) {
    if (cfg_.vocabulary[i] == label) {
      return static_cast<int>(i);
    }
  }
  return static_cast<int>(cfg_.vocabulary.size());
}

namespace {

constexpr char kMagic[8] = {'S', 'I', 'T', 'U', 'P', 'R', 'M', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) {
    b[i] = static_cast<unsigned char>(v >> (8 * i));
  }
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) {
    b[i] = static_cast<unsigned char>(v >> (8 * i));
  }
  out.write(reinterpret_cast<const char*>(b), 8);
}

void put_str(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  void bytes(void* dst, std::size_t n) {
    in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw ParseError("params file is truncated");
    }
  }
  std::uint32_t u32() {
    unsigned char b[4];
    bytes(b, 4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) {
      v = (v << 8) | b[i];
    }
    return v;
  }
  std::uint64_t u64() {
    unsigned char b[8];
    bytes(b, 8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) {
      v = (v << 8) | b[i];
    }
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    if (n > (1u << 20)) {
      throw ParseError("params file string length is implausible");
    }
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }

 private:
  std::istream& in_;
};

}  // namespace

void save_model(const std::filesystem::path& path, const Model& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write params file " + path.string());
  }
  const auto& c = model.config();
  out.write(kMagic, sizeof kMagic);
  put_u32(out, 1);
  for (int v : {static_cast<int>(c.variant), c.feature_dim, c.cue_hidden, c.anchor_hidden,
                c.head_hidden, c.bins, c.bearing_bins, c.distance_bands}) {
    put_u32(out, static_cast<std::uint32_t>(v));
  }
  put_u32(out, static_cast<std::uint32_t>(c.vocabulary.size()));
  for (const auto& label : c.vocabulary) {
    put_str(out, label);
  }
  const auto& blocks = model.layout().blocks();
  put_u32(out, static_cast<std::uint32_t>(blocks.size()));
  for (const auto& b : blocks) {
    put_str(out, b.name);
    put_u32(out, static_cast<std::uint32_t>(b.rows));
    put_u32(out, static_cast<std::uint32_t>(b.cols));
  }
  const auto& p = model.params();
  put_u64(out, static_cast<std::uint64_t>(p.size()));
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    std::uint64_t bits;
    const double v = p[i];
    std::memcpy(&bits, &v, sizeof bits);
    put_u64(out, bits);
  }
  if (!out) {
    throw Error("failed writing params file " + path.string());
  }
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open params file " + path.string());
  }
  Reader r(in);
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw ParseError(path.string() + ": not a situ params file");
  }
  if (const auto version = r.u32(); version != 1) {
    throw ParseError(path.string() + ": unsupported params version " + std::to_string(version));
  }
  ModelConfig cfg;
  const std::uint32_t variant = r.u32();
  if (variant > 2) {
    throw ParseError(path.string() + ": unknown variant " + std::to_string(variant));
  }
  cfg.variant = static_cast<Variant>(variant);
  cfg.feature_dim = static_cast<int>(r.u32());
  cfg.cue_hidden = static_cast<int>(r.u32());
  cfg.anchor_hidden = static_cast<int>(r.u32());
  cfg.head_hidden = static_cast<int>(r.u32());
  cfg.bins = static_cast<int>(r.u32());
  cfg.bearing_bins = static_cast<int>(r.u32());
  cfg.distance_bands = static_cast<int>(r.u32());
  const std::uint32_t vocab = r.u32();
  if (vocab > 100000) {
    throw ParseError(path.string() + ": implausible vocabulary size");
  }
  for (std::uint32_t i = 0; i < vocab; ++i) {
    cfg.vocabulary.push_back(r.str());
  }
  Model model = [&] {
    try {
      return Model(cfg);
    } catch (const ConfigError& e) {
      throw DimensionMismatch(path.string() + ": " + e.what());
    }
  }();

  const auto& expected = model.layout().blocks();
  const std::uint32_t n_blocks = r.u32();
  if (n_blocks != expected.size()) {
    throw DimensionMismatch(path.string() + ": header implies " + std::to_string(expected.size()) +
                            " parameter blocks, file has " + std::to_string(n_blocks));
  }
  for (const auto& b : expected) {
    const std::string name = r.str();
    const auto rows = r.u32();
    const auto cols = r.u32();
    if (name != b.name || rows != static_cast<std::uint32_t>(b.rows) ||
        cols != static_cast<std::uint32_t>(b.cols)) {
      throw DimensionMismatch(path.string() + ": block '" + name + "' is " + std::to_string(rows) +
                              "x" + std::to_string(cols) + ", header implies '" + b.name + "' " +
                              std::to_string(b.rows) + "x" + std::to_string(b.cols));
    }
  }
  const std::uint64_t count = r.u64();
  if (count != model.layout().size()) {
    throw DimensionMismatch(path.string() + ": value count " + std::to_string(count) +
                            " does not match header (" + std::to_string(model.layout().size()) + ")");
  }
  auto& p = model.params();
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const std::uint64_t bits = r.u64();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    p[i] = v;
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ParseError(path.string() + ": trailing bytes after parameter values");
  }
  return model;
}

}  // namespace situ
