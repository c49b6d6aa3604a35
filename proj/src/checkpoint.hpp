#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tensor.hpp"

namespace isodiff {

// Binary checkpoint of named f64 arrays.
//
// Layout (all integers little-endian):
//   magic "ISODIFF1" (8 bytes)
//   format version  u16
//   array count     u32
//   per array: name length u16, name bytes, rank u8, dims u64 each,
//              data f64 each (row-major)
//   CRC32 of all preceding bytes, u32
//
// Save/load round trips are byte-identical; names must be unique.
class Checkpoint {
 public:
  static constexpr std::uint16_t kFormatVersion = 1;

  void put(const std::string& name, Tensor value);
  const Tensor& get(const std::string& name) const;
  bool has(const std::string& name) const;
  const std::vector<std::pair<std::string, Tensor>>& arrays() const { return arrays_; }

  void save(const std::string& path) const;          // atomic: temp + rename
  static Checkpoint load(const std::string& path);   // throws IoError on corruption

 private:
  std::vector<std::pair<std::string, Tensor>> arrays_;
};

std::uint32_t crc32(const unsigned char* data, std::size_t len);

}  // namespace isodiff
