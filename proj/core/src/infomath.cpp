#include "intentsketch/infomath.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace intentsketch::infomath {

std::vector<double> checked_normalize(std::span<const double> probs) {
    if (probs.empty()) {
        throw Error(ErrorCode::InvalidDistribution, "distribution is empty");
    }
    double sum = 0.0;
    for (double p : probs) {
        if (!std::isfinite(p) || p < 0.0) {
            throw Error(ErrorCode::InvalidDistribution, "negative or non-finite probability");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kRenormTolerance) {
        std::ostringstream msg;
        msg << "probabilities sum to " << sum;
        throw Error(ErrorCode::InvalidDistribution, msg.str());
    }
    std::vector<double> out(probs.begin(), probs.end());
    if (std::abs(sum - 1.0) > kNormTolerance) {
        for (double& p : out) p /= sum;
    }
    return out;
}

Distribution::Distribution(std::vector<double> probs) : probs_(checked_normalize(probs)) {}

namespace {

double entropy_unchecked(std::span<const double> probs) {
    double h = 0.0;
    for (double p : probs) {
        if (p > 0.0) h -= p * std::log(p);
    }
    const double upper = std::log(static_cast<double>(probs.size()));
    return std::clamp(h, 0.0, upper);
}

}  // namespace

double entropy(const Distribution& d) { return entropy_unchecked(d.probs()); }

double entropy(std::span<const double> probs) {
    return entropy_unchecked(checked_normalize(probs));
}

double semantic_entropy(const ClassDistribution& cd) {
    validate(cd);
    return entropy_unchecked(cd.probs);
}

ClassDistribution mixture(std::span<const ClassDistribution> cds) {
    if (cds.empty()) {
        throw Error(ErrorCode::InvalidDistribution, "mixture of zero distributions");
    }
    for (const auto& cd : cds) validate(cd);

    const ClassDistribution& first = cds.front();
    std::map<int, std::size_t> slot;
    for (std::size_t k = 0; k < first.classes.size(); ++k) {
        if (!slot.emplace(first.classes[k], k).second) {
            throw Error(ErrorCode::ClassIdMismatch, "duplicate class id in mixture member");
        }
    }

    ClassDistribution out{first.classes, std::vector<double>(first.classes.size(), 0.0)};
    for (const auto& cd : cds) {
        if (cd.classes.size() != first.classes.size()) {
            throw Error(ErrorCode::ClassIdMismatch, "mixture members differ in class count");
        }
        std::vector<bool> seen(first.classes.size(), false);
        for (std::size_t k = 0; k < cd.classes.size(); ++k) {
            auto it = slot.find(cd.classes[k]);
            if (it == slot.end() || seen[it->second]) {
                throw Error(ErrorCode::ClassIdMismatch, "mixture members differ in class ids");
            }
            seen[it->second] = true;
            out.probs[it->second] += cd.probs[k];
        }
    }
    const double n = static_cast<double>(cds.size());
    for (double& p : out.probs) p /= n;
    return out;
}

double set_objective(std::span<const ClassDistribution> cds, const ObjectiveWeights& w, double div) {
    if (div < 0.0) {
        throw Error(ErrorCode::InvalidDistribution, "diversity must be non-negative");
    }
    validate(w);
    const ClassDistribution mix = mixture(cds);
    double mean_member = 0.0;
    for (const auto& cd : cds) mean_member += semantic_entropy(cd);
    mean_member /= static_cast<double>(cds.size());
    return entropy_unchecked(mix.probs) - w.alpha * mean_member + w.gamma * div;
}

double pairwise_diversity(std::span<const std::vector<double>> vectors) {
    if (vectors.empty()) {
        throw Error(ErrorCode::NonUnitVector, "no vectors");
    }
    const std::size_t dim = vectors.front().size();
    for (const auto& v : vectors) {
        if (v.size() != dim) {
            throw Error(ErrorCode::NonUnitVector, "vectors differ in dimension");
        }
        const double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
        if (std::abs(norm - 1.0) > 1e-6) {
            throw Error(ErrorCode::NonUnitVector, "vector norm " + std::to_string(norm));
        }
    }
    if (vectors.size() == 1) return 0.0;

    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        for (std::size_t j = i + 1; j < vectors.size(); ++j) {
            const double dot = std::inner_product(vectors[i].begin(), vectors[i].end(),
                                                  vectors[j].begin(), 0.0);
            total += 1.0 - std::clamp(dot, -1.0, 1.0);
            ++pairs;
        }
    }
    return total / static_cast<double>(pairs);
}

double bayes_risk_01(const AnswerPosterior& p) {
    const auto probs = checked_normalize(p.probs);
    return 1.0 - *std::max_element(probs.begin(), probs.end());
}

double information_gain(double prior_entropy, double conditional_entropy) {
    if (prior_entropy < 0.0 || conditional_entropy < 0.0) {
        throw Error(ErrorCode::NegativeEntropyInput, "entropies must be non-negative");
    }
    return prior_entropy - conditional_entropy;
}

double fano_error_lower_bound(double conditional_entropy, std::size_t alphabet_size) {
    if (conditional_entropy < 0.0) {
        throw Error(ErrorCode::NegativeEntropyInput, "entropy must be non-negative");
    }
    if (alphabet_size < 2 || conditional_entropy <= 0.0) return 0.0;

    // h(Pe) + Pe ln(k-1) increases on [0, (k-1)/k]; bisect for the crossing.
    const double k = static_cast<double>(alphabet_size);
    auto bound = [k](double pe) {
        double h = 0.0;
        if (pe > 0.0) h -= pe * std::log(pe);
        if (pe < 1.0) h -= (1.0 - pe) * std::log(1.0 - pe);
        return h + pe * std::log(k - 1.0);
    };
    double lo = 0.0;
    double hi = (k - 1.0) / k;
    if (bound(hi) <= conditional_entropy) return hi;
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        (bound(mid) < conditional_entropy ? lo : hi) = mid;
    }
    return hi;
}

}  // namespace intentsketch::infomath
