#include "pseudorep/dataset.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>
#include <sstream>
#include <unordered_set>

#include "pseudorep/errors.hpp"

namespace pseudorep {

std::size_t Shape::numel() const {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return dims.empty() ? 0 : n;
}

std::string Shape::to_string() const {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) os << ", ";
    os << dims[i];
  }
  os << ")";
  return os.str();
}

Dataset::Dataset(Shape shape, std::vector<float> samples,
                 std::vector<SampleId> ids,
                 std::optional<std::vector<int>> labels, int num_classes,
                 std::vector<SampleId> parents)
    : shape_(std::move(shape)),
      samples_(std::move(samples)),
      ids_(std::move(ids)),
      parents_(std::move(parents)),
      labels_(std::move(labels)),
      num_classes_(num_classes) {
  if (shape_.rank() != 1 && shape_.rank() != 3) {
    throw InputError("sample shape must be (D) or (C, H, W), got " +
                     shape_.to_string());
  }
  if (shape_.numel() == 0) throw InputError("sample shape has a zero dimension");
  if (num_classes_ < 1) throw InputError("num_classes must be positive");
  if (samples_.size() != ids_.size() * shape_.numel()) {
    throw ConsistencyError("sample buffer holds " +
                           std::to_string(samples_.size()) +
                           " values, expected " +
                           std::to_string(ids_.size() * shape_.numel()));
  }
  if (!parents_.empty() && parents_.size() != ids_.size()) {
    throw ConsistencyError("parent id count does not match sample count");
  }
  std::unordered_set<SampleId, SampleIdHash> seen;
  seen.reserve(ids_.size());
  for (auto id : ids_) {
    if (!seen.insert(id).second) {
      throw ConsistencyError("duplicate sample id " + std::to_string(id.value));
    }
  }
  if (labels_) {
    if (labels_->size() != ids_.size()) {
      throw ConsistencyError("label count does not match sample count");
    }
    for (int y : *labels_) {
      if (y < 0 || y >= num_classes_) {
        throw InputError("label " + std::to_string(y) + " outside [0, " +
                         std::to_string(num_classes_) + ")");
      }
    }
  }
  const bool image = shape_.is_image();
  for (float v : samples_) {
    if (!std::isfinite(v)) throw NonFiniteError("non-finite sample value");
    if (image && (v < 0.0f || v > 1.0f)) {
      throw InputError("image sample value outside [0, 1]");
    }
  }
}

const std::vector<int>& Dataset::labels() const {
  if (!labels_) throw InputError("dataset has no labels");
  return *labels_;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  const std::size_t d = sample_size();
  std::vector<float> samples(indices.size() * d);
  std::vector<SampleId> ids;
  std::vector<SampleId> parents;
  ids.reserve(indices.size());
  std::optional<std::vector<int>> labels;
  if (labels_) labels.emplace();
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const std::size_t i = indices[k];
    if (i >= size()) throw InputError("subset index out of range");
    std::memcpy(samples.data() + k * d, samples_.data() + i * d,
                d * sizeof(float));
    ids.push_back(ids_[i]);
    if (!parents_.empty()) parents.push_back(parents_[i]);
    if (labels) labels->push_back((*labels_)[i]);
  }
  return Dataset(shape_, std::move(samples), std::move(ids), std::move(labels),
                 num_classes_, std::move(parents));
}

Dataset Dataset::without_labels() const {
  return Dataset(shape_, samples_, ids_, std::nullopt, num_classes_, parents_);
}

Dataset Dataset::with_labels(std::vector<int> labels) const {
  return Dataset(shape_, samples_, ids_, std::move(labels), num_classes_,
                 parents_);
}

Dataset Dataset::with_num_classes(int num_classes) const {
  return Dataset(shape_, samples_, ids_, labels_, num_classes, parents_);
}

Dataset Dataset::concat(const Dataset& a, const Dataset& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  if (!(a.shape_ == b.shape_)) throw ConsistencyError("concat: shape mismatch");
  if (a.has_labels() != b.has_labels()) {
    throw ConsistencyError("concat: labeled and unlabeled datasets");
  }
  std::vector<float> samples = a.samples_;
  samples.insert(samples.end(), b.samples_.begin(), b.samples_.end());
  std::vector<SampleId> ids = a.ids_;
  ids.insert(ids.end(), b.ids_.begin(), b.ids_.end());
  std::vector<SampleId> parents;
  if (a.has_parents() || b.has_parents()) {
    for (std::size_t i = 0; i < a.size(); ++i) parents.push_back(a.parent(i));
    for (std::size_t i = 0; i < b.size(); ++i) parents.push_back(b.parent(i));
  }
  std::optional<std::vector<int>> labels;
  if (a.labels_) {
    labels = *a.labels_;
    labels->insert(labels->end(), b.labels_->begin(), b.labels_->end());
  }
  return Dataset(a.shape_, std::move(samples), std::move(ids),
                 std::move(labels), std::max(a.num_classes_, b.num_classes_),
                 std::move(parents));
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes_), 0);
  for (int y : labels()) ++counts[static_cast<std::size_t>(y)];
  return counts;
}

std::string Dataset::content_hash() const {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  auto feed = [&](const void* p, std::size_t n) {
    EVP_DigestUpdate(ctx.get(), p, n);
  };
  for (auto d : shape_.dims) {
    std::uint64_t v = d;
    feed(&v, sizeof v);
  }
  feed(&num_classes_, sizeof num_classes_);
  for (auto id : ids_) feed(&id.value, sizeof id.value);
  if (labels_) feed(labels_->data(), labels_->size() * sizeof(int));
  feed(samples_.data(), samples_.size() * sizeof(float));
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

HiddenTruth::HiddenTruth(const Dataset& labeled_source) {
  const auto& labels = labeled_source.labels();
  truth_.reserve(labeled_source.size());
  for (std::size_t i = 0; i < labeled_source.size(); ++i) {
    truth_.emplace(labeled_source.id(i), labels[i]);
  }
}

std::optional<int> HiddenTruth::lookup(SampleId id) const {
  auto it = truth_.find(id);
  if (it == truth_.end()) return std::nullopt;
  return it->second;
}

}  // namespace pseudorep
