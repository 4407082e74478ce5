#pragma once
#include <cstdint>
#include <string>

namespace shop {

class Checksum {
public:
  void update(const std::string& data);
  std::uint32_t value() const;

private:
  std::uint32_t state_ = 0;
};

std::uint32_t crc_of(const std::string& data);

}  // namespace shop
