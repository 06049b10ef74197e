#pragma once

// Exact-length bit strings used as wire messages. Length is counted in bits
// so bandwidth accounting is exact; storage is byte-packed.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace netdecomp {

class BitString {
public:
  BitString() = default;

  int size_bits() const { return nbits_; }
  bool empty() const { return nbits_ == 0; }

  void append_bit(int b) {
    if ((nbits_ & 7) == 0) bytes_.push_back(0);
    if (b) bytes_.back() |= static_cast<uint8_t>(1u << (nbits_ & 7));
    ++nbits_;
  }

  // Appends `width` bits of `v`, least significant first.
  void append_uint(uint64_t v, int width) {
    for (int i = 0; i < width; ++i) append_bit(static_cast<int>((v >> i) & 1u));
  }

  void append(const BitString& other) {
    for (int i = 0; i < other.nbits_; ++i) append_bit(other.bit(i));
  }

  int bit(int i) const {
    if (i < 0 || i >= nbits_) throw std::out_of_range("BitString::bit: index " + std::to_string(i));
    return (bytes_[static_cast<size_t>(i >> 3)] >> (i & 7)) & 1;
  }

  // Reads `width` bits starting at `pos`, least significant first.
  uint64_t read_uint(int pos, int width) const {
    uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= static_cast<uint64_t>(bit(pos + i)) << i;
    return v;
  }

  bool operator==(const BitString& o) const { return nbits_ == o.nbits_ && bytes_ == o.bytes_; }

  std::string to_string() const {
    std::string s;
    s.reserve(static_cast<size_t>(nbits_));
    for (int i = 0; i < nbits_; ++i) s.push_back(bit(i) ? '1' : '0');
    return s;
  }

private:
  std::vector<uint8_t> bytes_;
  int nbits_ = 0;
};

}  // namespace netdecomp
