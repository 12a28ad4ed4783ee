#include "nfpos/checkpoint.hpp"

#include <cstdio>
#include <filesystem>

#include "nfpos/tensor_io.hpp"

namespace fs = std::filesystem;

namespace nfpos {

namespace {
std::string tensor_filename(size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "t%04zu.bin", index);
  return buf;
}
}  // namespace

template <typename T>
void save_checkpoint(PosModel<T>& model, const std::string& dir, const KvFile& provenance) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create checkpoint directory " + dir + ": " + ec.message());

  KvFile kv;
  kv.set("kind", "checkpoint");
  kv.set_i64("format_version", 1);
  model.config().to_kv(kv);
  for (const auto& key : provenance.keys()) kv.set(key, provenance.get(key));

  auto reg = model.state();
  kv.set_i64("tensor_count", static_cast<int64_t>(reg.size()));
  std::vector<float> buf;
  for (size_t i = 0; i < reg.size(); ++i) {
    const Tensor<T>& t = *reg[i].value;
    buf.resize(static_cast<size_t>(t.numel()));
    for (int64_t j = 0; j < t.numel(); ++j) buf[static_cast<size_t>(j)] = static_cast<float>(t[j]);
    std::vector<uint64_t> dims(t.shape.begin(), t.shape.end());
    const std::string file = tensor_filename(i);
    const uint32_t crc = write_nfpd_f32(dir + "/" + file, dims, buf.data());
    const std::string p = "tensor." + std::to_string(i);
    kv.set(p + ".name", reg[i].name);
    kv.set(p + ".file", file);
    kv.set_u64(p + ".crc32", crc);
  }
  kv.save(dir + "/manifest");
}

template <typename T>
void load_checkpoint(PosModel<T>& model, const std::string& dir) {
  const KvFile kv = KvFile::load(dir + "/manifest");
  const ModelConfig stored = ModelConfig::from_kv(kv);
  if (!(stored == model.config()))
    throw ShapeError("checkpoint " + dir + " was written for a different model config (" +
                     model_kind_name(stored.kind) + ", " + std::to_string(stored.in_h) + "x" +
                     std::to_string(stored.in_w) + ", width " + std::to_string(stored.width) +
                     ")");

  auto reg = model.state();
  const int64_t count = kv.get_i64("tensor_count");
  if (count != static_cast<int64_t>(reg.size()))
    throw DataError("checkpoint tensor count mismatch in " + dir);

  for (size_t i = 0; i < reg.size(); ++i) {
    const std::string p = "tensor." + std::to_string(i);
    if (kv.get(p + ".name") != reg[i].name)
      throw DataError("checkpoint tensor order mismatch at " + reg[i].name);
    const std::string file = kv.get(p + ".file");
    F32File f = read_nfpd_f32(dir + "/" + file);
    if (f.crc32 != static_cast<uint32_t>(kv.get_u64(p + ".crc32")))
      throw DataError("checksum mismatch for " + dir + "/" + file);
    Tensor<T>& t = *reg[i].value;
    const std::vector<uint64_t> expect(t.shape.begin(), t.shape.end());
    if (f.dims != expect)
      throw ShapeError("checkpoint tensor " + reg[i].name + " has shape mismatch in " + dir);
    for (int64_t j = 0; j < t.numel(); ++j) t[j] = static_cast<T>(f.data[static_cast<size_t>(j)]);
  }
}

ModelConfig peek_checkpoint_config(const std::string& dir) {
  return ModelConfig::from_kv(KvFile::load(dir + "/manifest"));
}

KvFile read_checkpoint_manifest(const std::string& dir) {
  return KvFile::load(dir + "/manifest");
}

template void save_checkpoint<float>(PosModel<float>&, const std::string&, const KvFile&);
template void save_checkpoint<double>(PosModel<double>&, const std::string&, const KvFile&);
template void load_checkpoint<float>(PosModel<float>&, const std::string&);
template void load_checkpoint<double>(PosModel<double>&, const std::string&);

}  // namespace nfpos
