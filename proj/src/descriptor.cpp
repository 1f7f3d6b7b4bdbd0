#include "coic/descriptor.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "coic/error.hpp"
#include "coic/rng.hpp"

namespace coic {

namespace {

constexpr std::uint64_t kCentroidStream = 0xC0E7'901D'0000'0001ull;

}  // namespace

std::string_view to_string(TaskKind kind) noexcept {
  switch (kind) {
    case TaskKind::ObjectRecognition:
      return "object_recognition";
    case TaskKind::ModelRender3D:
      return "model_render_3d";
    case TaskKind::VRPanorama:
      return "vr_panorama";
  }
  return "unknown";
}

std::optional<TaskKind> task_kind_from_string(std::string_view name) noexcept {
  for (TaskKind k : kAllTaskKinds) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::optional<TaskKind> task_kind_from_code(std::uint8_t code) noexcept {
  if (code >= 1 && code <= 3) return static_cast<TaskKind>(code);
  return std::nullopt;
}

FeatureVector::FeatureVector(std::vector<float> values) : values_(std::move(values)) {
  if (values_.empty()) throw InvalidParameter("feature vector must have dim >= 1");
  if (!std::all_of(values_.begin(), values_.end(), [](float v) { return std::isfinite(v); })) {
    throw InvalidParameter("feature vector components must be finite");
  }
}

double FeatureVector::norm() const noexcept {
  double sum = 0.0;
  for (float v : values_) sum += static_cast<double>(v) * v;
  return std::sqrt(sum);
}

ContentHash ContentHash::from_bytes(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kSize) {
    throw InvalidParameter("content hash must be 32 bytes, got " + std::to_string(bytes.size()));
  }
  Bytes b{};
  std::copy(bytes.begin(), bytes.end(), b.begin());
  return ContentHash(b);
}

std::string ContentHash::hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(kSize * 2);
  for (std::uint8_t b : bytes_) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

std::size_t ContentHashHasher::operator()(const ContentHash& h) const noexcept {
  std::uint64_t word = 0;
  std::memcpy(&word, h.bytes().data(), sizeof(word));
  return static_cast<std::size_t>(word);
}

Descriptor::Descriptor(TaskKind kind, Key key) : kind_(kind), key_(std::move(key)) {
  if (uses_feature_vector(kind) != std::holds_alternative<FeatureVector>(key_)) {
    throw InvalidParameter(std::string("descriptor key does not match task kind ") +
                           std::string(to_string(kind)));
  }
}

std::string_view to_string(DistanceMetric metric) noexcept {
  return metric == DistanceMetric::EuclideanL2 ? "l2" : "cosine";
}

std::optional<DistanceMetric> distance_metric_from_string(std::string_view name) noexcept {
  if (name == "l2") return DistanceMetric::EuclideanL2;
  if (name == "cosine") return DistanceMetric::CosineDistance;
  return std::nullopt;
}

double distance(const FeatureVector& a, const FeatureVector& b, DistanceMetric metric) {
  if (a.dim() != b.dim()) throw DimensionMismatch(a.dim(), b.dim());
  const auto av = a.values();
  const auto bv = b.values();

  if (metric == DistanceMetric::EuclideanL2) {
    double sum = 0.0;
    for (std::size_t i = 0; i < av.size(); ++i) {
      const double d = static_cast<double>(av[i]) - static_cast<double>(bv[i]);
      sum += d * d;
    }
    return std::sqrt(sum);
  }

  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    dot += static_cast<double>(av[i]) * bv[i];
    na += static_cast<double>(av[i]) * av[i];
    nb += static_cast<double>(bv[i]) * bv[i];
  }
  if (na == 0.0 || nb == 0.0) throw ZeroNormVector();
  if (a == b) return 0.0;
  const double cosine = std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
  return std::max(0.0, 1.0 - cosine);
}

ContentHash hash_content(std::span<const std::uint8_t> content) {
  ContentHash::Bytes digest{};
  SHA256(content.data(), content.size(), digest.data());
  return ContentHash(digest);
}

FeatureVector object_centroid(std::uint64_t object_id, std::size_t dim) {
  if (dim == 0) throw InvalidParameter("dim must be >= 1");
  Prng rng(derive_seed(object_id, kCentroidStream));
  std::vector<double> dir(dim);
  double norm = 0.0;
  // A zero draw is astronomically unlikely but would break normalization.
  while (norm == 0.0) {
    norm = 0.0;
    for (double& x : dir) {
      x = rng.normal();
      norm += x * x;
    }
    norm = std::sqrt(norm);
  }
  std::vector<float> values(dim);
  for (std::size_t i = 0; i < dim; ++i) values[i] = static_cast<float>(dir[i] / norm);
  return FeatureVector(std::move(values));
}

FeatureVector stub_extract(std::uint64_t object_id, std::uint64_t noise_seed, double sigma,
                           std::size_t dim) {
  if (dim == 0) throw InvalidParameter("dim must be >= 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidParameter("sigma must be >= 0");
  const FeatureVector centroid = object_centroid(object_id, dim);
  if (sigma == 0.0) return centroid;

  Prng rng(noise_seed);
  std::vector<float> values(dim);
  const auto c = centroid.values();
  for (std::size_t i = 0; i < dim; ++i) {
    values[i] = static_cast<float>(static_cast<double>(c[i]) + sigma * rng.normal());
  }
  return FeatureVector(std::move(values));
}

std::vector<std::uint8_t> canonical_object_bytes(std::uint64_t object_id) {
  std::vector<std::uint8_t> block(256);
  for (std::size_t i = 0; i < block.size(); ++i) {
    block[i] = static_cast<std::uint8_t>(object_id >> (8 * (7 - i % 8)));
  }
  return block;
}

}  // namespace coic
