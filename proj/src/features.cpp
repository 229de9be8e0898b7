#include "rulechain/features.hpp"

#include <unordered_set>

#include "rulechain/backend.hpp"
#include "rulechain/extraction.hpp"
#include "rulechain/text.hpp"

namespace rulechain {

std::vector<double> StatementFeatures::extract(std::string_view statement) const {
    std::vector<double> f(dimension(), 0.0);
    const auto tokens = tokenize(statement);
    if (tokens.empty()) {
        return f;
    }
    const double n = static_cast<double>(tokens.size());
    f[0] = n / 32.0;
    f[1] = static_cast<double>(std::unordered_set<std::string>(tokens.begin(), tokens.end()).size()) / n;

    constexpr std::string_view marker = " we can get ";
    if (auto cut = statement.rfind(marker); cut != std::string_view::npos) {
        auto premise = content_tokens(statement.substr(0, cut), default_stopwords());
        auto hypothesis = content_tokens(statement.substr(cut + marker.size()), default_stopwords());
        std::unordered_set<std::string> known(premise.begin(), premise.end());
        std::size_t shared = 0;
        for (const auto& t : hypothesis) {
            shared += known.contains(t) ? 1 : 0;
        }
        f[2] = hypothesis.empty() ? 0.0
                                  : static_cast<double>(shared) / static_cast<double>(hypothesis.size());
    }

    for (const auto& t : tokens) {
        f[kDenseFeatures + fnv1a64(t) % kHashBuckets] += 1.0 / n;
    }
    return f;
}

std::shared_ptr<const FeatureMap> default_feature_map() {
    static const auto map = std::make_shared<const StatementFeatures>();
    return map;
}

} // namespace rulechain
