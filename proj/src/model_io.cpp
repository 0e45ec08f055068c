#include "dga/model_io.hpp"

#include <array>
#include <cstring>
#include <fstream>

namespace dga {

namespace {

constexpr char kMagic[8] = {'D', 'G', 'A', 'M', 'O', 'D', 'E', 'L'};
constexpr std::uint32_t kVersion = 1;

static_assert(sizeof(double) == 8, "f64 parameter blocks assume 8-byte doubles");

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}

void put_f64_block(std::string& out, const double* data, std::size_t count) {
  put_u64(out, count);
  const std::size_t bytes = count * 8;
  std::string raw(bytes, '\0');
  std::memcpy(raw.data(), data, bytes);
#if defined(__BYTE_ORDER__) && __BYTE_ORDER__ == __ORDER_BIG_ENDIAN__
  for (std::size_t i = 0; i < count; ++i) {
    std::reverse(raw.begin() + 8 * i, raw.begin() + 8 * (i + 1));
  }
#endif
  out += raw;
  put_u32(out, crc32(raw.data(), raw.size()));
}

class Reader {
 public:
  Reader(std::string bytes, std::string path)
      : bytes_(std::move(bytes)), path_(std::move(path)) {}

  std::size_t offset() const { return offset_; }

  void expect(std::size_t n) const {
    if (offset_ + n > bytes_.size()) {
      throw FormatError(path_ + ": truncated at offset " + std::to_string(offset_));
    }
  }

  std::uint32_t u32() {
    expect(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= std::uint32_t(static_cast<unsigned char>(bytes_[offset_ + i])) << (8 * i);
    }
    offset_ += 4;
    return v;
  }

  std::uint64_t u64() {
    expect(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= std::uint64_t(static_cast<unsigned char>(bytes_[offset_ + i])) << (8 * i);
    }
    offset_ += 8;
    return v;
  }

  std::string raw(std::size_t n) {
    expect(n);
    std::string out = bytes_.substr(offset_, n);
    offset_ += n;
    return out;
  }

  void f64_block_into(double* dst, std::size_t expected_count) {
    const std::uint64_t count = u64();
    if (count != expected_count) {
      throw FormatError(path_ + ": block of " + std::to_string(count) +
                        " values where " + std::to_string(expected_count) +
                        " were expected, at offset " + std::to_string(offset_ - 8));
    }
    const std::size_t data_offset = offset_;
    std::string raw_bytes = raw(count * 8);
    const std::uint32_t stored = u32();
    const std::uint32_t computed = crc32(raw_bytes.data(), raw_bytes.size());
    if (stored != computed) {
      throw FormatError(path_ + ": checksum mismatch in block at offset " +
                        std::to_string(data_offset));
    }
#if defined(__BYTE_ORDER__) && __BYTE_ORDER__ == __ORDER_BIG_ENDIAN__
    for (std::size_t i = 0; i < count; ++i) {
      std::reverse(raw_bytes.begin() + 8 * i, raw_bytes.begin() + 8 * (i + 1));
    }
#endif
    std::memcpy(dst, raw_bytes.data(), count * 8);
  }

  bool at_end() const { return offset_ == bytes_.size(); }

 private:
  std::string bytes_;
  std::string path_;
  std::size_t offset_ = 0;
};

nlohmann::json mlp_meta(const Mlp& net) {
  nlohmann::json sizes = nlohmann::json::array();
  nlohmann::json acts = nlohmann::json::array();
  sizes.push_back(net.input_dim());
  for (const Layer& layer : net.layers()) {
    sizes.push_back(layer.w.rows());
    acts.push_back(to_string(layer.act));
  }
  return nlohmann::json{{"sizes", sizes}, {"activations", acts}};
}

Mlp mlp_from_meta(const nlohmann::json& j) {
  const auto sizes = j.at("sizes").get<std::vector<Index>>();
  const auto act_names = j.at("activations").get<std::vector<std::string>>();
  std::vector<Activation> acts;
  acts.reserve(act_names.size());
  for (const auto& name : act_names) {
    acts.push_back(activation_from_string(name));
  }
  Rng dummy(0);
  return Mlp::init(sizes, acts, dummy);  // parameter values are overwritten
}

}  // namespace

std::uint32_t crc32(const void* data, std::size_t len) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) {
        c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      }
      t[i] = c;
    }
    return t;
  }();
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint32_t c = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < len; ++i) {
    c = table[(c ^ p[i]) & 0xFF] ^ (c >> 8);
  }
  return c ^ 0xFFFFFFFFu;
}

void save_model(const DeepDga& m, const std::string& path,
                const nlohmann::json& run_meta) {
  m.validate();

  nlohmann::json stages = nlohmann::json::array();
  for (const DgaModel& stage : m.stages) {
    stages.push_back(nlohmann::json{{"encoder", mlp_meta(stage.encoder)},
                                    {"decoder", mlp_meta(stage.decoder)},
                                    {"prior",
                                     {{"alpha", stage.prior.alpha()},
                                      {"decay", stage.prior.decay()}}}});
  }
  const nlohmann::json meta{
      {"kind", "dga-model"}, {"stages", stages}, {"run", run_meta}};
  const std::string meta_str = meta.dump();

  std::string out;
  out.append(kMagic, sizeof(kMagic));
  put_u32(out, kVersion);
  put_u64(out, meta_str.size());
  out += meta_str;
  put_u32(out, crc32(meta_str.data(), meta_str.size()));

  for (const DgaModel& stage : m.stages) {
    for (const Mlp* net : {&stage.encoder, &stage.decoder}) {
      for (const Layer& layer : net->layers()) {
        put_f64_block(out, layer.w.data(), static_cast<std::size_t>(layer.w.size()));
        put_f64_block(out, layer.b.data(), static_cast<std::size_t>(layer.b.size()));
      }
    }
    put_f64_block(out, stage.prior.ones().data(),
                  static_cast<std::size_t>(stage.prior.ones().size()));
    const double total = stage.prior.total();
    put_f64_block(out, &total, 1);
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) {
    throw FormatError(path + ": cannot open for writing");
  }
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) {
    throw FormatError(path + ": write failed");
  }
}

namespace {

std::pair<nlohmann::json, Reader> open_container(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    throw FormatError(path + ": cannot open");
  }
  std::string bytes((std::istreambuf_iterator<char>(file)),
                    std::istreambuf_iterator<char>());
  Reader reader(std::move(bytes), path);

  const std::string magic = reader.raw(sizeof(kMagic));
  if (std::memcmp(magic.data(), kMagic, sizeof(kMagic)) != 0) {
    throw FormatError(path + ": bad magic at offset 0");
  }
  const std::uint32_t version = reader.u32();
  if (version != kVersion) {
    throw FormatError(path + ": unsupported format version " +
                      std::to_string(version));
  }
  const std::uint64_t meta_len = reader.u64();
  const std::size_t meta_offset = reader.offset();
  const std::string meta_str = reader.raw(meta_len);
  const std::uint32_t stored = reader.u32();
  if (stored != crc32(meta_str.data(), meta_str.size())) {
    throw FormatError(path + ": metadata checksum mismatch at offset " +
                      std::to_string(meta_offset));
  }
  nlohmann::json meta = nlohmann::json::parse(meta_str, nullptr, false);
  if (meta.is_discarded() || meta.value("kind", "") != "dga-model") {
    throw FormatError(path + ": metadata is not a model description");
  }
  return {std::move(meta), std::move(reader)};
}

}  // namespace

DeepDga load_model(const std::string& path) {
  auto [meta, reader] = open_container(path);

  DeepDga m;
  for (const auto& stage_meta : meta.at("stages")) {
    DgaModel stage{mlp_from_meta(stage_meta.at("encoder")),
                   mlp_from_meta(stage_meta.at("decoder")),
                   PriorCounter(1)};
    for (Mlp* net : {&stage.encoder, &stage.decoder}) {
      for (Layer& layer : net->layers()) {
        reader.f64_block_into(layer.w.data(), static_cast<std::size_t>(layer.w.size()));
        reader.f64_block_into(layer.b.data(), static_cast<std::size_t>(layer.b.size()));
        layer.gw.setZero();
        layer.gb.setZero();
      }
    }
    const auto& prior_meta = stage_meta.at("prior");
    Vector ones(stage.encoder.output_dim());
    reader.f64_block_into(ones.data(), static_cast<std::size_t>(ones.size()));
    double total = 0.0;
    reader.f64_block_into(&total, 1);
    stage.prior = PriorCounter::restore(std::move(ones), total,
                                        prior_meta.at("alpha").get<double>(),
                                        prior_meta.at("decay").get<double>());
    m.stages.push_back(std::move(stage));
  }
  if (!reader.at_end()) {
    throw FormatError(path + ": trailing bytes at offset " +
                      std::to_string(reader.offset()));
  }
  m.validate();
  return m;
}

nlohmann::json read_model_run_meta(const std::string& path) {
  auto [meta, reader] = open_container(path);
  return meta.value("run", nlohmann::json::object());
}

}  // namespace dga
