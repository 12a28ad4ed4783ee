#ifndef NFPOS_COMMON_HPP
#define NFPOS_COMMON_HPP

#include <cmath>
#include <stdexcept>
#include <string>

namespace nfpos {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

inline double wavelength_from_frequency(double freq_hz) {
  if (freq_hz <= 0.0) throw std::domain_error("carrier frequency must be positive");
  return kSpeedOfLight / freq_hz;
}

// Error taxonomy. CLI maps ConfigError -> exit 2, ShapeError -> exit 3,
// everything else -> exit 4.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

// Tensor/batch shape incompatibilities between datasets, models, checkpoints.
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& msg) : Error(msg) {}
};

// Corrupt or inconsistent on-disk data (checksum, magic, version).
class DataError : public Error {
 public:
  explicit DataError(const std::string& msg) : Error(msg) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

inline void check(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

}  // namespace nfpos

#endif
