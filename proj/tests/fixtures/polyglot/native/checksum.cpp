#include "checksum.h"

namespace shop {

static std::uint32_t mix(std::uint32_t s, unsigned char c) {
  return (s << 5) ^ (s >> 27) ^ c;
}

void Checksum::update(const std::string& data) {
  for (unsigned char c : data) state_ = mix(state_, c);
}

std::uint32_t Checksum::value() const { return state_; }

std::uint32_t crc_of(const std::string& data) {
  Checksum c;
  c.update(data);
  return c.value();
}

}  // namespace shop
