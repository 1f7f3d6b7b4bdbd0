#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace coic {

// Wire codes double as the enumerator values.
enum class TaskKind : std::uint8_t {
  ObjectRecognition = 1,
  ModelRender3D = 2,
  VRPanorama = 3,
};

inline constexpr std::array<TaskKind, 3> kAllTaskKinds = {
    TaskKind::ObjectRecognition, TaskKind::ModelRender3D, TaskKind::VRPanorama};

constexpr std::size_t kind_index(TaskKind kind) noexcept {
  return static_cast<std::size_t>(kind) - 1;
}

constexpr bool uses_feature_vector(TaskKind kind) noexcept {
  return kind == TaskKind::ObjectRecognition;
}

std::string_view to_string(TaskKind kind) noexcept;
std::optional<TaskKind> task_kind_from_string(std::string_view name) noexcept;
std::optional<TaskKind> task_kind_from_code(std::uint8_t code) noexcept;

// Dense feature vector. Components are stored as binary32 so the value the
// client computes is exactly the value that crosses the wire.
class FeatureVector {
 public:
  // Throws InvalidParameter on an empty or non-finite input.
  explicit FeatureVector(std::vector<float> values);

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const float> values() const noexcept { return values_; }
  double norm() const noexcept;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;

 private:
  std::vector<float> values_;
};

class ContentHash {
 public:
  static constexpr std::size_t kSize = 32;
  using Bytes = std::array<std::uint8_t, kSize>;

  ContentHash() = default;
  explicit ContentHash(const Bytes& bytes) : bytes_(bytes) {}

  // Throws InvalidParameter unless exactly 32 bytes are given.
  static ContentHash from_bytes(std::span<const std::uint8_t> bytes);

  const Bytes& bytes() const noexcept { return bytes_; }
  std::string hex() const;

  friend auto operator<=>(const ContentHash&, const ContentHash&) = default;

 private:
  Bytes bytes_{};
};

struct ContentHashHasher {
  std::size_t operator()(const ContentHash& h) const noexcept;
};

// A request key: a feature vector for recognition, a content hash otherwise.
class Descriptor {
 public:
  using Key = std::variant<FeatureVector, ContentHash>;

  // Throws InvalidParameter when the key variant does not match the kind.
  Descriptor(TaskKind kind, Key key);

  static Descriptor recognition(FeatureVector v) {
    return {TaskKind::ObjectRecognition, std::move(v)};
  }
  static Descriptor hashed(TaskKind kind, ContentHash h) { return {kind, h}; }

  TaskKind kind() const noexcept { return kind_; }
  const Key& key() const noexcept { return key_; }
  bool is_vector() const noexcept { return std::holds_alternative<FeatureVector>(key_); }
  const FeatureVector& vector() const { return std::get<FeatureVector>(key_); }
  const ContentHash& hash() const { return std::get<ContentHash>(key_); }

  friend bool operator==(const Descriptor&, const Descriptor&) = default;

 private:
  TaskKind kind_;
  Key key_;
};

enum class DistanceMetric : std::uint8_t { EuclideanL2, CosineDistance };

std::string_view to_string(DistanceMetric metric) noexcept;
std::optional<DistanceMetric> distance_metric_from_string(std::string_view name) noexcept;

// Throws DimensionMismatch, or ZeroNormVector for cosine on a zero vector.
double distance(const FeatureVector& a, const FeatureVector& b, DistanceMetric metric);

// SHA-256 of the content.
ContentHash hash_content(std::span<const std::uint8_t> content);

// Fixed unit-norm direction for an object. Deterministic in (object_id, dim).
FeatureVector object_centroid(std::uint64_t object_id, std::size_t dim);

// Stand-in for on-device feature extraction: centroid(object_id) plus
// per-component N(0, sigma^2) noise drawn from a PRNG seeded by noise_seed.
FeatureVector stub_extract(std::uint64_t object_id, std::uint64_t noise_seed, double sigma,
                           std::size_t dim);

// The 256-byte block whose SHA-256 identifies a model or panorama:
// object_id as 8 big-endian bytes, repeated.
std::vector<std::uint8_t> canonical_object_bytes(std::uint64_t object_id);

}  // namespace coic
