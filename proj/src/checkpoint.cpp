#include "pgnet/checkpoint.hpp"

#include <cstring>

#include <json.hpp>

namespace pgnet {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'P', 'G', 'N', 'C'};

void put_u32(std::string& out, uint32_t x) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((x >> (8 * i)) & 0xff);
  out.append(b, 4);
}

class Reader {
 public:
  Reader(const std::string& data, const std::string& path)
      : data_(data), path_(path) {}

  uint32_t u32() {
    need(4, "u32");
    uint32_t x = 0;
    for (int i = 0; i < 4; ++i)
      x |= static_cast<uint32_t>(static_cast<unsigned char>(data_[pos_ + static_cast<size_t>(i)]))
           << (8 * i);
    pos_ += 4;
    return x;
  }

  std::string bytes(size_t n, const char* what) {
    need(n, what);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  void raw(void* dst, size_t n, const char* what) {
    need(n, what);
    std::memcpy(dst, data_.data() + pos_, n);
    pos_ += n;
  }

  bool at_end() const { return pos_ == data_.size(); }

 private:
  void need(size_t n, const char* what) {
    if (pos_ + n > data_.size())
      fail("checkpoint: truncated file ", path_, " while reading ", what);
  }

  const std::string& data_;
  std::string path_;
  size_t pos_ = 0;
};

}  // namespace

std::string checkpoint_bytes(const ModelParams& params, const CheckpointMeta& meta) {
  params.validate();

  json m;
  m["d_emb"] = meta.dims.d_emb;
  m["d_hid"] = meta.dims.d_hid;
  m["vocab_size"] = meta.dims.vocab_size;
  m["vocab_hash"] = meta.vocab_hash_hex;
  m["step"] = meta.step;
  m["coverage_enabled"] = meta.coverage_enabled;
  m["num_params"] = params.tensors.size();
  m["config"] = meta.config_json.empty() ? json::object()
                                         : json::parse(meta.config_json);
  const std::string meta_str = m.dump();

  std::string out;
  out.append(kMagic, 4);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<uint32_t>(meta_str.size()));
  out += meta_str;

  // std::map iteration gives sorted name order.
  for (const auto& [name, t] : params.tensors) {
    put_u32(out, static_cast<uint32_t>(name.size()));
    out += name;
    put_u32(out, static_cast<uint32_t>(t.shape.size()));
    for (int d : t.shape) put_u32(out, static_cast<uint32_t>(d));
    const size_t bytes = t.v.size() * sizeof(float);
    const size_t off = out.size();
    out.resize(off + bytes);
    std::memcpy(out.data() + off, t.v.data(), bytes);
  }
  return out;
}

void save_checkpoint(const ModelParams& params, const CheckpointMeta& meta,
                     const std::string& path) {
  write_file_atomic(path, checkpoint_bytes(params, meta));
}

Checkpoint load_checkpoint(const std::string& path) {
  const std::string data = read_file(path);
  Reader r(data, path);

  const std::string magic = r.bytes(4, "magic");
  if (std::memcmp(magic.data(), kMagic, 4) != 0)
    fail("checkpoint: ", path, " is not a PGNC file");
  const uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    fail("checkpoint: ", path, " has format version ", version, ", expected ",
         kCheckpointVersion);

  const uint32_t meta_len = r.u32();
  if (meta_len > data.size())
    fail("checkpoint: corrupt metadata length in ", path);
  json m = json::parse(r.bytes(meta_len, "metadata"), nullptr, false);
  if (m.is_discarded()) fail("checkpoint: corrupt metadata JSON in ", path);

  Checkpoint ck;
  ck.meta.dims.d_emb = m.at("d_emb").get<int>();
  ck.meta.dims.d_hid = m.at("d_hid").get<int>();
  ck.meta.dims.vocab_size = m.at("vocab_size").get<int>();
  ck.meta.vocab_hash_hex = m.at("vocab_hash").get<std::string>();
  ck.meta.step = m.at("step").get<int64_t>();
  ck.meta.coverage_enabled = m.at("coverage_enabled").get<bool>();
  ck.meta.config_json = m.at("config").dump();
  const auto num_params = m.at("num_params").get<size_t>();

  const auto expected = ModelParams::shapes(ck.meta.dims);
  if (num_params != expected.size())
    fail("checkpoint: ", path, " holds ", num_params, " parameters, expected ",
         expected.size());

  ck.params.dims = ck.meta.dims;
  for (const auto& [want_name, want_shape] : expected) {
    const uint32_t name_len = r.u32();
    if (name_len > 256) fail("checkpoint: corrupt name length in ", path);
    const std::string name = r.bytes(name_len, "parameter name");
    if (name != want_name)
      fail("checkpoint: parameter '", name, "' where '", want_name,
           "' expected (records must be sorted by name)");
    const uint32_t rank = r.u32();
    if (rank > 8) fail("checkpoint: corrupt rank ", rank, " for '", name, "'");
    std::vector<int> shape;
    int64_t numel = 1;
    for (uint32_t i = 0; i < rank; ++i) {
      const uint32_t d = r.u32();
      if (d == 0 || d > (1u << 30)) fail("checkpoint: corrupt dim for '", name, "'");
      shape.push_back(static_cast<int>(d));
      numel *= d;
    }
    if (shape != want_shape)
      fail("checkpoint: parameter '", name, "' has unexpected shape");
    ad::TensorF t(shape);
    r.raw(t.v.data(), static_cast<size_t>(numel) * sizeof(float), name.c_str());
    ck.params.tensors.emplace(want_name, std::move(t));
  }
  if (!r.at_end()) fail("checkpoint: trailing bytes in ", path);
  ck.params.validate();
  return ck;
}

}  // namespace pgnet
