#ifndef NFPOS_TENSOR_IO_HPP
#define NFPOS_TENSOR_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace nfpos {

// NFPD tensor container: 4-byte magic "NFPD", u32 version = 1, u32 rank,
// u64 dims[rank], then the payload in C row-major order. Payload elements
// are little-endian IEEE-754 float32, or u64 for seed arrays. The magic is
// compared as a native u32 so a foreign-endian file fails the magic check.
// CRC-32 is computed over the payload bytes and stored in the manifest that
// accompanies the file, not in the file itself.

inline constexpr uint32_t kNfpdVersion = 1;

struct F32File {
  std::vector<uint64_t> dims;
  std::vector<float> data;
  uint32_t crc32 = 0;
};

struct U64File {
  std::vector<uint64_t> dims;
  std::vector<uint64_t> data;
  uint32_t crc32 = 0;
};

uint32_t payload_crc32(const void* bytes, size_t size);

// Writers return the payload CRC-32 for the manifest.
uint32_t write_nfpd_f32(const std::string& path, const std::vector<uint64_t>& dims,
                        const float* data);
uint32_t write_nfpd_u64(const std::string& path, const std::vector<uint64_t>& dims,
                        const uint64_t* data);

F32File read_nfpd_f32(const std::string& path);
U64File read_nfpd_u64(const std::string& path);

}  // namespace nfpos

#endif
