#include "nfpos/tensor_io.hpp"

#include <zlib.h>

#include <cstdio>
#include <fstream>

#include "nfpos/common.hpp"

namespace nfpos {

namespace {

// Bytes "NFPD" when stored little-endian.
constexpr uint32_t kMagic = 0x4450464Eu;

void write_bytes(std::ofstream& out, const void* p, size_t n, const std::string& path) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  if (!out) throw IoError("write failed: " + path);
}

void read_bytes(std::ifstream& in, void* p, size_t n, const std::string& path) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (in.gcount() != static_cast<std::streamsize>(n))
    throw DataError("truncated tensor file: " + path);
}

template <typename T>
uint32_t write_nfpd(const std::string& path, const std::vector<uint64_t>& dims, const T* data) {
  uint64_t count = 1;
  for (uint64_t d : dims) count *= d;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create " + path);
  uint32_t version = kNfpdVersion;
  uint32_t rank = static_cast<uint32_t>(dims.size());
  write_bytes(out, &kMagic, 4, path);
  write_bytes(out, &version, 4, path);
  write_bytes(out, &rank, 4, path);
  write_bytes(out, dims.data(), 8 * dims.size(), path);
  const size_t payload_size = sizeof(T) * static_cast<size_t>(count);
  write_bytes(out, data, payload_size, path);
  out.close();
  if (!out) throw IoError("error closing " + path);
  return payload_crc32(data, payload_size);
}

template <typename T>
void read_nfpd(const std::string& path, std::vector<uint64_t>& dims, std::vector<T>& data,
               uint32_t& crc) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  uint32_t magic = 0, version = 0, rank = 0;
  read_bytes(in, &magic, 4, path);
  if (magic != kMagic) throw DataError("bad magic (not an NFPD tensor file): " + path);
  read_bytes(in, &version, 4, path);
  if (version != kNfpdVersion)
    throw DataError("unsupported NFPD version " + std::to_string(version) + ": " + path);
  read_bytes(in, &rank, 4, path);
  if (rank > 8) throw DataError("implausible tensor rank " + std::to_string(rank) + ": " + path);
  dims.resize(rank);
  read_bytes(in, dims.data(), 8 * rank, path);
  uint64_t count = 1;
  for (uint64_t d : dims) {
    if (d > (1ull << 40)) throw DataError("implausible dimension in " + path);
    count *= d;
  }
  data.resize(static_cast<size_t>(count));
  const size_t payload_size = sizeof(T) * static_cast<size_t>(count);
  read_bytes(in, data.data(), payload_size, path);
  char extra;
  if (in.read(&extra, 1).gcount() != 0)
    throw DataError("trailing bytes after payload: " + path);
  crc = payload_crc32(data.data(), payload_size);
}

}  // namespace

uint32_t payload_crc32(const void* bytes, size_t size) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt chunks; split for >4GB safety.
  const unsigned char* p = static_cast<const unsigned char*>(bytes);
  while (size > 0) {
    uInt chunk = static_cast<uInt>(std::min<size_t>(size, 1u << 30));
    crc = crc32(crc, p, chunk);
    p += chunk;
    size -= chunk;
  }
  return static_cast<uint32_t>(crc);
}

uint32_t write_nfpd_f32(const std::string& path, const std::vector<uint64_t>& dims,
                        const float* data) {
  return write_nfpd(path, dims, data);
}

uint32_t write_nfpd_u64(const std::string& path, const std::vector<uint64_t>& dims,
                        const uint64_t* data) {
  return write_nfpd(path, dims, data);
}

F32File read_nfpd_f32(const std::string& path) {
  F32File f;
  read_nfpd(path, f.dims, f.data, f.crc32);
  return f;
}

U64File read_nfpd_u64(const std::string& path) {
  U64File f;
  read_nfpd(path, f.dims, f.data, f.crc32);
  return f;
}

}  // namespace nfpos
