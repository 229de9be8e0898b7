#include "rulechain/scoring.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <unordered_set>

namespace rulechain {

namespace {

// -ln sigma(x) = ln(1 + e^{-x})
double neg_log_sigmoid(double x) {
    return x > 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x));
}

double sigmoid(double x) {
    if (x >= 0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

void require_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw invalid_input(std::string(what) + ": non-finite value");
        }
    }
}

std::vector<double> scores_of(const TrainingExample& example, std::span<const double> weights) {
    std::vector<double> scores;
    scores.reserve(example.features.size());
    for (const auto& f : example.features) {
        scores.push_back(dot(weights, f));
    }
    return scores;
}

} // namespace

Scorer::Scorer(std::shared_ptr<const FeatureMap> features)
    : Scorer(features, std::vector<double>(features ? features->dimension() : 0, 0.0)) {}

Scorer::Scorer(std::shared_ptr<const FeatureMap> features, std::vector<double> weights)
    : features_(std::move(features)), weights_(std::move(weights)) {
    if (!features_) {
        throw invalid_input("scorer: feature map is null");
    }
    if (weights_.size() != features_->dimension()) {
        throw invalid_input("scorer: " + std::to_string(weights_.size()) +
                            " weights for a feature map of dimension " +
                            std::to_string(features_->dimension()));
    }
    require_finite(weights_, "scorer weights");
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw invalid_input("dot: dimension mismatch");
    }
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double score(const Scorer& scorer, std::string_view statement) {
    if (trim(statement).empty()) {
        throw invalid_input("score: statement is empty");
    }
    auto features = scorer.feature_map().extract(statement);
    return dot(scorer.weights(), features);
}

RankedList::RankedList(std::vector<std::string> items) : items_(std::move(items)) {
    std::unordered_set<std::string> seen;
    for (const auto& item : items_) {
        if (!seen.insert(item).second) {
            throw invalid_input("ranked list: duplicate item '" + item + "'");
        }
    }
}

double ranking_loss(std::span<const double> scores) {
    if (scores.size() < 2) {
        throw invalid_input("ranking loss: need at least two scores");
    }
    require_finite(scores, "ranking loss");
    double loss = 0.0;
    for (std::size_t w = 0; w < scores.size(); ++w) {
        for (std::size_t l = w + 1; l < scores.size(); ++l) {
            loss += neg_log_sigmoid(scores[w] - scores[l]);
        }
    }
    return loss;
}

std::vector<double> ranking_loss_score_gradient(std::span<const double> scores) {
    if (scores.size() < 2) {
        throw invalid_input("ranking loss: need at least two scores");
    }
    require_finite(scores, "ranking loss");
    std::vector<double> grad(scores.size(), 0.0);
    for (std::size_t w = 0; w < scores.size(); ++w) {
        for (std::size_t l = w + 1; l < scores.size(); ++l) {
            // d/dx [-ln sigma(x)] = -sigma(-x)
            double g = -sigmoid(-(scores[w] - scores[l]));
            grad[w] += g;
            grad[l] -= g;
        }
    }
    return grad;
}

TrainingExample make_training_example(RankedList ranking, const FeatureMap& features) {
    TrainingExample example{std::move(ranking), {}};
    for (const auto& item : example.ranking.items()) {
        example.features.push_back(features.extract(item));
    }
    return example;
}

double example_loss(const TrainingExample& example, std::span<const double> weights) {
    return ranking_loss(scores_of(example, weights));
}

std::vector<double> example_loss_gradient(const TrainingExample& example,
                                          std::span<const double> weights) {
    auto score_grad = ranking_loss_score_gradient(scores_of(example, weights));
    std::vector<double> grad(weights.size(), 0.0);
    for (std::size_t k = 0; k < score_grad.size(); ++k) {
        const auto& f = example.features[k];
        for (std::size_t i = 0; i < grad.size(); ++i) {
            grad[i] += score_grad[k] * f[i];
        }
    }
    return grad;
}

double mean_ranking_loss(std::span<const TrainingExample> examples, std::span<const double> weights) {
    if (examples.empty()) {
        throw invalid_input("mean ranking loss: no examples");
    }
    double total = 0.0;
    for (const auto& ex : examples) {
        total += example_loss(ex, weights);
    }
    return total / static_cast<double>(examples.size());
}

Scorer train_pairwise_scorer(std::span<const TrainingExample> examples, const TrainingOptions& options,
                             std::shared_ptr<const FeatureMap> features, TrainingTrace* trace) {
    if (!features) {
        throw invalid_input("train: feature map is null");
    }
    if (examples.empty()) {
        throw invalid_input("train: empty training set");
    }
    if (options.steps < 0 || !(options.learning_rate > 0.0) || !std::isfinite(options.learning_rate)) {
        throw invalid_input("train: steps must be >= 0 and learning_rate positive");
    }
    const std::size_t dim = features->dimension();
    for (const auto& ex : examples) {
        if (ex.ranking.size() < 2 || ex.features.size() != ex.ranking.size()) {
            throw invalid_input("train: every ranked list needs >= 2 items with aligned features");
        }
        for (const auto& f : ex.features) {
            if (f.size() != dim) {
                throw invalid_input("train: feature vector dimension mismatch");
            }
            require_finite(f, "train features");
        }
    }

    std::vector<double> weights(dim, 0.0);
    const double initial = mean_ranking_loss(examples, weights);
    std::vector<double> best = weights;
    double best_loss = initial;

    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(options.seed);
    const std::size_t batch =
        options.batch_size == 0 ? examples.size() : std::min(options.batch_size, examples.size());
    std::size_t cursor = examples.size();

    for (int step = 0; step < options.steps; ++step) {
        if (cursor + batch > examples.size()) {
            if (batch < examples.size()) {
                for (std::size_t i = order.size() - 1; i > 0; --i) {
                    std::swap(order[i], order[rng() % (i + 1)]);
                }
            }
            cursor = 0;
        }
        std::vector<double> grad(dim, 0.0);
        for (std::size_t b = 0; b < batch; ++b) {
            auto g = example_loss_gradient(examples[order[cursor + b]], weights);
            for (std::size_t i = 0; i < dim; ++i) {
                grad[i] += g[i];
            }
        }
        cursor += batch;
        for (std::size_t i = 0; i < dim; ++i) {
            weights[i] -= options.learning_rate * grad[i] / static_cast<double>(batch);
        }
        double loss = mean_ranking_loss(examples, weights);
        if (loss < best_loss) {
            best_loss = loss;
            best = weights;
        }
    }

    if (trace) {
        *trace = TrainingTrace{initial, best_loss, options.steps};
    }
    return Scorer(std::move(features), std::move(best));
}

std::size_t select_best(std::span<const double> scores) {
    if (scores.empty()) {
        throw invalid_input("select_best: empty score list");
    }
    require_finite(scores, "select_best");
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i] > scores[best]) {
            best = i;
        }
    }
    return best;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size() || p.empty()) {
        throw invalid_input("kl_divergence: distributions must be nonempty and of equal length");
    }
    double sum_p = 0.0;
    double sum_q = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(p[i] >= 0.0 && p[i] <= 1.0) || !(q[i] >= 0.0 && q[i] <= 1.0)) {
            throw invalid_input("kl_divergence: probabilities must lie in [0,1]");
        }
        sum_p += p[i];
        sum_q += q[i];
    }
    if (std::abs(sum_p - 1.0) > 1e-9 || std::abs(sum_q - 1.0) > 1e-9) {
        throw invalid_input("kl_divergence: distributions must sum to 1");
    }
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) {
            continue;
        }
        if (q[i] == 0.0) {
            throw invalid_input("kl_divergence: p has mass where q has none");
        }
        kl += p[i] * std::log(p[i] / q[i]);
    }
    // Rounding can leave a tiny negative value for p ~= q.
    return std::max(kl, 0.0);
}

double penalized_reward(double r_theta, double lambda, double r_kl) {
    if (!(lambda >= 0.0) || !(r_kl >= 0.0)) {
        throw invalid_input("penalized_reward: lambda and r_kl must be nonnegative");
    }
    return r_theta - lambda * r_kl;
}

double episode_reward(const Scorer& scorer, std::span<const std::string> statements) {
    if (statements.empty()) {
        throw invalid_input("episode_reward: no statements");
    }
    double best = score(scorer, statements.front());
    for (std::size_t i = 1; i < statements.size(); ++i) {
        best = std::max(best, score(scorer, statements[i]));
    }
    return best;
}

std::vector<double> softmax(std::span<const double> scores) {
    if (scores.empty()) {
        return {};
    }
    double top = *std::max_element(scores.begin(), scores.end());
    std::vector<double> out;
    out.reserve(scores.size());
    double total = 0.0;
    for (double s : scores) {
        out.push_back(std::exp(s - top));
        total += out.back();
    }
    for (double& v : out) {
        v /= total;
    }
    return out;
}

Json scorer_to_json(const Scorer& scorer) {
    Json j;
    j["dimension"] = scorer.weights().size();
    j["weights"] = scorer.weights();
    j["feature_map_version"] = scorer.feature_map().version();
    return j;
}

Scorer scorer_from_json(const Json& j, std::shared_ptr<const FeatureMap> features) {
    if (!j.is_object() || !j.contains("dimension") || !j.contains("weights") ||
        !j.contains("feature_map_version")) {
        throw invalid_input("scorer file: expected {dimension, weights, feature_map_version}");
    }
    const auto version = j.at("feature_map_version").get<std::string>();
    if (version != features->version()) {
        throw invalid_input("scorer file: feature map version '" + version +
                            "' does not match '" + features->version() + "'");
    }
    const auto dimension = j.at("dimension").get<std::size_t>();
    auto weights = j.at("weights").get<std::vector<double>>();
    if (dimension != weights.size()) {
        throw invalid_input("scorer file: dimension field disagrees with weight count");
    }
    return Scorer(std::move(features), std::move(weights));
}

void save_scorer(const Scorer& scorer, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorKind::io, "cannot write scorer to " + path);
    }
    out << scorer_to_json(scorer).dump(2) << '\n';
}

Scorer load_scorer(const std::string& path, std::shared_ptr<const FeatureMap> features) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::io, "cannot read scorer " + path);
    }
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorKind::parse, "scorer " + path + ": " + e.what());
    }
    try {
        return scorer_from_json(j, std::move(features));
    } catch (const Json::exception& e) {
        throw Error(ErrorKind::parse, "scorer " + path + ": " + e.what());
    }
}

} // namespace rulechain
