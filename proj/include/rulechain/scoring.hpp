#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rulechain/core.hpp"
#include "rulechain/features.hpp"

namespace rulechain {

/// Linear statement scorer: score(s) = <weights, features(s)>.
class Scorer {
public:
    // Zero weights over `features`.
    explicit Scorer(std::shared_ptr<const FeatureMap> features);
    // Throws invalid_input on a dimension mismatch or a non-finite weight.
    Scorer(std::shared_ptr<const FeatureMap> features, std::vector<double> weights);

    const FeatureMap& feature_map() const noexcept { return *features_; }
    std::shared_ptr<const FeatureMap> feature_map_ptr() const noexcept { return features_; }
    const std::vector<double>& weights() const noexcept { return weights_; }

private:
    std::shared_ptr<const FeatureMap> features_;
    std::vector<double> weights_;
};

// Throws invalid_input on a blank statement.
double score(const Scorer& scorer, std::string_view statement);

double dot(std::span<const double> a, std::span<const double> b);

/// Statements ordered best first; duplicates rejected.
class RankedList {
public:
    explicit RankedList(std::vector<std::string> items);

    const std::vector<std::string>& items() const noexcept { return items_; }
    std::size_t size() const noexcept { return items_.size(); }

private:
    std::vector<std::string> items_;
};

/// Pairwise logistic loss over a best-first score list:
///   sum over i < j of -ln sigma(s_i - s_j).
/// Throws invalid_input on fewer than two scores or a non-finite score.
double ranking_loss(std::span<const double> scores);

/// d ranking_loss / d s_k for every k.
std::vector<double> ranking_loss_score_gradient(std::span<const double> scores);

struct TrainingExample {
    RankedList ranking;
    std::vector<std::vector<double>> features;  // aligned with ranking.items()
};

TrainingExample make_training_example(RankedList ranking, const FeatureMap& features);

double example_loss(const TrainingExample& example, std::span<const double> weights);

/// Gradient of example_loss with respect to the weights.
std::vector<double> example_loss_gradient(const TrainingExample& example,
                                          std::span<const double> weights);

double mean_ranking_loss(std::span<const TrainingExample> examples, std::span<const double> weights);

struct TrainingOptions {
    int steps = 100;
    double learning_rate = 0.1;
    std::uint64_t seed = 0;
    // 0 means full batch; otherwise examples are reshuffled from `seed` every epoch.
    std::size_t batch_size = 0;
};

struct TrainingTrace {
    double initial_loss = 0.0;
    double final_loss = 0.0;
    int steps = 0;
};

/// Gradient descent from zero weights on the mean ranking loss. Returns the
/// lowest-loss iterate seen.
Scorer train_pairwise_scorer(std::span<const TrainingExample> examples, const TrainingOptions& options,
                             std::shared_ptr<const FeatureMap> features,
                             TrainingTrace* trace = nullptr);

// Index of the maximum; ties go to the lowest index.
std::size_t select_best(std::span<const double> scores);

/// sum p_i ln(p_i / q_i). Throws invalid_input on length mismatch, entries
/// outside [0,1], sums off 1 by more than 1e-9, or p_i > 0 where q_i = 0.
double kl_divergence(std::span<const double> p, std::span<const double> q);

/// r_theta - lambda * r_kl.
double penalized_reward(double r_theta, double lambda, double r_kl);

/// Maximum statement score.
double episode_reward(const Scorer& scorer, std::span<const std::string> statements);

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> scores);

Json scorer_to_json(const Scorer& scorer);
// Throws invalid_input when the stored feature_map_version or dimension does
// not match `features`.
Scorer scorer_from_json(const Json& j, std::shared_ptr<const FeatureMap> features = default_feature_map());

void save_scorer(const Scorer& scorer, const std::string& path);
Scorer load_scorer(const std::string& path, std::shared_ptr<const FeatureMap> features = default_feature_map());

} // namespace rulechain
