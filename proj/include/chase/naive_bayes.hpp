#pragma once

// Categorical Naive Bayes over string-valued features, e.g. predicting shot
// type from {phase, bowler type, required-rate band}.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace chase {

using FeatureMap = std::map<std::string, std::string>;

struct LabeledExample {
    FeatureMap features;
    std::string label;
};

/// Each conditional row carries an extra kUnseenValue entry holding the
/// smoothing mass for values never observed in training, so every row sums to 1.
struct CategoricalNaiveBayesModel {
    static inline const std::string kUnseenValue = "<unseen>";

    std::map<std::string, double> class_priors;
    /// feature -> class -> value -> P(value | class)
    std::map<std::string, std::map<std::string, std::map<std::string, double>>> conditionals;

    double conditional(const std::string& feature, const std::string& cls, const std::string& value) const {
        const auto& row = conditionals.at(feature).at(cls);
        if (auto it = row.find(value); it != row.end()) return it->second;
        return row.at(kUnseenValue);
    }
};

/// Maximum-likelihood priors; conditionals (n_cv + alpha) / (n_c + alpha * (V + 1))
/// over the V observed values plus the unseen slot.
inline CategoricalNaiveBayesModel trainNaiveBayes(const std::vector<LabeledExample>& examples, double smoothing_alpha) {
    if (examples.empty()) throw std::invalid_argument("empty training set");
    if (smoothing_alpha < 0.0) throw std::invalid_argument("smoothing_alpha must be >= 0");

    std::map<std::string, double> classCounts;
    std::map<std::string, std::map<std::string, std::map<std::string, double>>> counts;
    std::map<std::string, std::vector<std::string>> values;
    for (const auto& ex : examples) {
        classCounts[ex.label] += 1.0;
        for (const auto& [feature, value] : ex.features) {
            counts[feature][ex.label][value] += 1.0;
            auto& v = values[feature];
            if (std::find(v.begin(), v.end(), value) == v.end()) v.push_back(value);
        }
    }

    CategoricalNaiveBayesModel model;
    const double n = static_cast<double>(examples.size());
    for (const auto& [cls, c] : classCounts) model.class_priors[cls] = c / n;

    for (const auto& [feature, vals] : values) {
        const double slots = static_cast<double>(vals.size() + 1);
        for (const auto& [cls, _] : classCounts) {
            const auto& byValue = counts[feature][cls];
            double nc = 0.0;
            for (const auto& [__, c] : byValue) nc += c;
            const double denom = nc + smoothing_alpha * slots;
            auto& row = model.conditionals[feature][cls];
            for (const auto& v : vals) {
                const auto it = byValue.find(v);
                const double c = it == byValue.end() ? 0.0 : it->second;
                row[v] = denom > 0.0 ? (c + smoothing_alpha) / denom : 1.0 / slots;
            }
            row[CategoricalNaiveBayesModel::kUnseenValue] = denom > 0.0 ? smoothing_alpha / denom : 1.0 / slots;
        }
    }
    return model;
}

/// Posterior over classes. Features the model has never seen are ignored, as
/// are features whose likelihood is zero under every class (no evidence).
inline std::map<std::string, double> classifyNaiveBayes(const CategoricalNaiveBayesModel& model,
                                                        const FeatureMap& features) {
    std::map<std::string, double> logp;
    for (const auto& [cls, prior] : model.class_priors)
        logp[cls] = prior > 0.0 ? std::log(prior) : -std::numeric_limits<double>::infinity();

    for (const auto& [feature, value] : features) {
        if (!model.conditionals.contains(feature)) continue;
        std::map<std::string, double> lik;
        bool any = false;
        for (const auto& [cls, _] : model.class_priors) {
            lik[cls] = model.conditional(feature, cls, value);
            any = any || lik[cls] > 0.0;
        }
        if (!any) continue;
        for (auto& [cls, lp] : logp) lp += lik[cls] > 0.0 ? std::log(lik[cls]) : -std::numeric_limits<double>::infinity();
    }

    double top = -std::numeric_limits<double>::infinity();
    for (const auto& [_, lp] : logp) top = std::max(top, lp);
    double z = 0.0;
    for (const auto& [_, lp] : logp) z += std::exp(lp - top);
    std::map<std::string, double> posterior;
    for (const auto& [cls, lp] : logp) posterior[cls] = std::exp(lp - top) / z;
    return posterior;
}

}  // namespace chase
