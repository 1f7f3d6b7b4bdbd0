#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace coic {

// Immutable, shareable task result. Copies share the underlying buffer so
// multi-megabyte model payloads can sit in the cache and in flight at once.
class ResultPayload {
 public:
  ResultPayload() : bytes_(std::make_shared<const std::vector<std::uint8_t>>()) {}
  explicit ResultPayload(std::vector<std::uint8_t> bytes)
      : bytes_(std::make_shared<const std::vector<std::uint8_t>>(std::move(bytes))) {}

  std::size_t size() const noexcept { return bytes_->size(); }
  bool empty() const noexcept { return bytes_->empty(); }
  std::span<const std::uint8_t> bytes() const noexcept { return *bytes_; }

  friend bool operator==(const ResultPayload& a, const ResultPayload& b) {
    return a.bytes_ == b.bytes_ || *a.bytes_ == *b.bytes_;
  }

 private:
  std::shared_ptr<const std::vector<std::uint8_t>> bytes_;
};

}  // namespace coic
