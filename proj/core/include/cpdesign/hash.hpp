#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>

namespace cpd {

/// Incremental SHA-256 over raw bytes, truncated to 64 bits for compact provenance tags.
class ContentHasher {
 public:
  ContentHasher();
  ~ContentHasher();
  ContentHasher(const ContentHasher&) = delete;
  ContentHasher& operator=(const ContentHasher&) = delete;

  ContentHasher& update(std::span<const std::byte> bytes);
  ContentHasher& update(std::string_view text);

  template <class T>
    requires std::is_trivially_copyable_v<T>
  ContentHasher& add(const T& value) {
    return update(std::as_bytes(std::span<const T, 1>(&value, 1)));
  }

  template <class T>
    requires std::is_trivially_copyable_v<T>
  ContentHasher& add(std::span<const T> values) {
    return update(std::as_bytes(values));
  }

  std::uint64_t digest64();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::string hash_to_hex(std::uint64_t hash);
std::uint64_t hash_from_hex(std::string_view hex);

}  // namespace cpd
