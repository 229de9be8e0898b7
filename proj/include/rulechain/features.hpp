#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace rulechain {

/// Maps a statement to a fixed-dimension real vector.
class FeatureMap {
public:
    virtual ~FeatureMap() = default;
    virtual std::size_t dimension() const = 0;
    virtual std::string version() const = 0;
    virtual std::vector<double> extract(std::string_view statement) const = 0;
};

// Token-count features of a ranking statement:
//   [0]      token count / 32
//   [1]      type-token ratio
//   [2]      share of hypothesis content tokens that also occur in the
//            premise part (text before the last " we can get ")
//   [3..66]  hashed bag of words, 64 buckets, each count / token count
class StatementFeatures final : public FeatureMap {
public:
    static constexpr std::size_t kHashBuckets = 64;
    static constexpr std::size_t kDenseFeatures = 3;
    static constexpr std::string_view kVersion = "statement-features-v1";

    std::size_t dimension() const override { return kDenseFeatures + kHashBuckets; }
    std::string version() const override { return std::string(kVersion); }
    std::vector<double> extract(std::string_view statement) const override;
};

std::shared_ptr<const FeatureMap> default_feature_map();

} // namespace rulechain
