// Binary model container. All integers and reals are little-endian.
//
//   magic "MDNS" | u32 version
//   config:    u32 C | u32 K | u32 D | f64 lambda | u32 U | u8 aggregation mode
//   subspaces: C x (u32 begin, u32 end)
//   trees:     C x { 4 x u32 split index
//                    4 x (f64 offset, i32 scale exponent)
//                    15 x f64 thresholds (levels 0..3 concatenated)
//                    15 x u8 quantized thresholds }
//   P:         u32 rows | u32 cols | rows*cols x f32
//   tables:    u8 present; if 1: u32 M | u32 C | u32 K | i32 exponent |
//              C x f64 offsets | M*C*K x u8

#include <bit>
#include <cstring>

#include "maddness/pipeline.hpp"

namespace maddness {

namespace {

constexpr char kMagic[4] = {'M', 'D', 'N', 'S'};

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void size(std::size_t v) {
    if (v > 0xffffffffu) throw std::length_error("serialize: dimension exceeds u32");
    u32(static_cast<std::uint32_t>(v));
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::size_t offset() const { return pos_; }
  bool done() const { return pos_ == in_.size(); }

  std::span<const std::uint8_t> bytes(std::size_t n, const char* what) {
    if (in_.size() - pos_ < n) {
      throw ParseError(std::string("truncated stream reading ") + what, pos_);
    }
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint8_t u8(const char* what) { return bytes(1, what)[0]; }
  std::uint32_t u32(const char* what) {
    auto b = bytes(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }
  std::uint64_t u64(const char* what) {
    auto b = bytes(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  std::int32_t i32(const char* what) { return static_cast<std::int32_t>(u32(what)); }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> MaddnessModel::serialize() const {
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kFormatVersion);

  w.size(trees_.size());
  w.size(prototypes_.K);
  w.size(input_dims_);
  w.f64(config_.lambda);
  w.size(config_.aggregation.block_size);
  w.u8(static_cast<std::uint8_t>(config_.aggregation.mode));

  for (const auto& s : prototypes_.subspaces) {
    w.size(s.begin);
    w.size(s.end);
  }
  for (const auto& tree : trees_) {
    for (auto j : tree.split_indices) w.u32(j);
    for (std::size_t t = 0; t < kTreeDepth; ++t) {
      w.f64(tree.split_offsets[t]);
      w.i32(tree.scale_exponents[t]);
    }
    for (const auto& level : tree.thresholds)
      for (double v : level) w.f64(v);
    for (const auto& level : tree.quantized_thresholds)
      for (auto q : level) w.u8(q);
  }

  w.size(prototypes_.P.rows());
  w.size(prototypes_.P.cols());
  for (float v : prototypes_.P.data()) w.f32(v);

  w.u8(quantized_ ? 1 : 0);
  if (quantized_) {
    w.size(quantized_->M);
    w.size(quantized_->C);
    w.size(quantized_->K);
    w.i32(quantized_->exponent);
    for (double o : quantized_->offsets) w.f64(o);
    w.bytes(quantized_->values.data(), quantized_->values.size());
  }
  return w.take();
}

MaddnessModel MaddnessModel::deserialize(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  auto magic = r.bytes(sizeof kMagic, "magic");
  if (std::memcmp(magic.data(), kMagic, sizeof kMagic) != 0) {
    throw ParseError("bad magic", 0);
  }
  const std::uint32_t version = r.u32("version");
  if (version != kFormatVersion) throw UnsupportedVersionError(version);

  const std::size_t field_at = r.offset();
  MaddnessConfig config;
  config.codebooks = r.u32("codebook count");
  const std::size_t K = r.u32("K");
  const std::size_t D = r.u32("input dims");
  config.lambda = r.f64("lambda");
  config.aggregation.block_size = r.u32("block size");
  const std::uint8_t mode = r.u8("aggregation mode");
  if (config.codebooks == 0 || K != kLeaves || D == 0) {
    throw ParseError("invalid config (C, K, D)", field_at);
  }
  if (mode > 1) throw ParseError("invalid aggregation mode", r.offset() - 1);
  config.aggregation.mode = static_cast<AggregationMode>(mode);

  const std::size_t C = config.codebooks;
  // Cheap guard against absurd sizes before allocating.
  if (C > bytes.size()) throw ParseError("codebook count exceeds stream size", field_at);

  std::vector<Subspace> subspaces(C);
  for (auto& s : subspaces) {
    s.begin = r.u32("subspace begin");
    s.end = r.u32("subspace end");
  }

  std::vector<HashTreeParams> trees(C);
  for (auto& tree : trees) {
    for (auto& j : tree.split_indices) j = r.u32("split index");
    for (std::size_t t = 0; t < kTreeDepth; ++t) {
      tree.split_offsets[t] = r.f64("split offset");
      tree.scale_exponents[t] = r.i32("scale exponent");
    }
    for (auto& level : tree.thresholds)
      for (auto& v : level) v = r.f64("threshold");
    for (auto& level : tree.quantized_thresholds)
      for (auto& q : level) q = r.u8("quantized threshold");
    tree.quantized = true;
  }

  const std::size_t p_at = r.offset();
  const std::size_t rows = r.u32("prototype rows");
  const std::size_t cols = r.u32("prototype cols");
  if (rows != K * C || cols != D) throw ParseError("prototype shape mismatch", p_at);
  if (rows * cols > bytes.size()) throw ParseError("truncated stream reading prototypes", r.offset());
  std::vector<float> p(rows * cols);
  for (auto& v : p) v = r.f32("prototype entry");

  PrototypeMatrix prototypes;
  prototypes.K = K;
  prototypes.C = C;
  prototypes.subspaces = std::move(subspaces);
  try {
    prototypes.P = DenseMatrix(rows, cols, std::move(p));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), p_at);
  }

  std::optional<QuantizedTables> tables;
  const std::size_t t_at = r.offset();
  const std::uint8_t present = r.u8("table flag");
  if (present > 1) throw ParseError("invalid table flag", t_at);
  if (present) {
    QuantizedTables q;
    const std::size_t shape_at = r.offset();
    q.M = r.u32("table M");
    q.C = r.u32("table C");
    q.K = r.u32("table K");
    if (q.C != C || q.K != K || q.M == 0 || q.M > bytes.size()) {
      throw ParseError("table shape mismatch", shape_at);
    }
    q.exponent = r.i32("table exponent");
    q.offsets.resize(C);
    for (auto& o : q.offsets) o = r.f64("table offset");
    auto raw = r.bytes(q.M * q.C * q.K, "table entries");
    q.values.assign(raw.begin(), raw.end());
    tables = std::move(q);
  }
  if (!r.done()) throw ParseError("trailing bytes", r.offset());

  MaddnessModel model;
  try {
    model = MaddnessModel(config, D, std::move(trees), std::move(prototypes));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), field_at);
  }
  model.quantized_ = std::move(tables);
  return model;
}

}  // namespace maddness
