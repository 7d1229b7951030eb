#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "addrkit/errors.hpp"

namespace addrkit {

// Row-major dense feature matrix.
struct FeatureMatrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> data;

    FeatureMatrix() = default;
    FeatureMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double* row(std::size_t i) { return &data[i * cols]; }
    const double* row(std::size_t i) const { return &data[i * cols]; }

    static FeatureMatrix from_rows(const std::vector<std::vector<double>>& rows_in) {
        FeatureMatrix m(rows_in.size(), rows_in.empty() ? 0 : rows_in[0].size());
        for (std::size_t i = 0; i < rows_in.size(); ++i) {
            if (rows_in[i].size() != m.cols) throw InputError("ragged feature rows");
            std::copy(rows_in[i].begin(), rows_in[i].end(), m.row(i));
        }
        return m;
    }
};

struct SoftmaxConfig {
    double l2 = 1.0;
    std::size_t iters = 5000;
    double lr = 0.1;
    std::uint64_t seed = 0; // reserved; zero initialization needs no randomness
};

// Multinomial logistic model. weights is K x (dim + 1) with the bias in the
// last column; classes are sorted lexicographically.
struct ClassifierModel {
    std::vector<std::string> classes;
    std::size_t dim = 0;
    std::vector<double> weights;
    double l2 = 0.0;
    std::size_t iters = 0;
    double final_loss = 0.0;

    std::size_t n_classes() const { return classes.size(); }
    double* row(std::size_t k) { return &weights[k * (dim + 1)]; }
    const double* row(std::size_t k) const { return &weights[k * (dim + 1)]; }
};

struct Prediction {
    std::vector<double> probs; // aligned with model.classes, sums to 1
    std::size_t predicted = 0; // argmax, ties to the lowest class index
};

namespace detail {

inline void softmax_scores(const double* weights, std::size_t K, std::size_t d1, const double* x,
                           std::size_t xd, double* probs) {
    // x has xd = d1 - 1 features; the implicit bias input is 1.
    double maxz = -1e300;
    for (std::size_t k = 0; k < K; ++k) {
        const double* wk = weights + k * d1;
        double z = wk[xd];
        for (std::size_t j = 0; j < xd; ++j) z += wk[j] * x[j];
        probs[k] = z;
        maxz = std::max(maxz, z);
    }
    double denom = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        probs[k] = std::exp(probs[k] - maxz);
        denom += probs[k];
    }
    for (std::size_t k = 0; k < K; ++k) probs[k] /= denom;
}

} // namespace detail

// Mean cross-entropy plus (l2/2)*||W||^2 over non-bias weights, with the
// gradient written into `grad` (same layout as weights). Shared by training
// and by the finite-difference tests, so there is a single code path to get
// right.
inline double softmax_loss_and_gradient(const std::vector<double>& weights,
                                        const FeatureMatrix& features,
                                        const std::vector<std::size_t>& labels, std::size_t K,
                                        double l2, std::vector<double>& grad) {
    const std::size_t n = features.rows;
    const std::size_t d = features.cols;
    const std::size_t d1 = d + 1;
    grad.assign(weights.size(), 0.0);

    double loss = 0.0;
    std::vector<double> z(K);
    for (std::size_t i = 0; i < n; ++i) {
        const double* x = features.row(i);
        double maxz = -1e300;
        for (std::size_t k = 0; k < K; ++k) {
            const double* wk = &weights[k * d1];
            double s = wk[d];
            for (std::size_t j = 0; j < d; ++j) s += wk[j] * x[j];
            z[k] = s;
            maxz = std::max(maxz, s);
        }
        double denom = 0.0;
        for (std::size_t k = 0; k < K; ++k) denom += std::exp(z[k] - maxz);
        const double log_denom = std::log(denom) + maxz;
        loss -= z[labels[i]] - log_denom;

        for (std::size_t k = 0; k < K; ++k) {
            const double p = std::exp(z[k] - log_denom);
            const double g = p - (labels[i] == k ? 1.0 : 0.0);
            double* gk = &grad[k * d1];
            for (std::size_t j = 0; j < d; ++j) gk[j] += g * x[j];
            gk[d] += g;
        }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    loss *= inv_n;
    for (auto& g : grad) g *= inv_n;
    for (std::size_t k = 0; k < K; ++k) {
        const double* wk = &weights[k * d1];
        double* gk = &grad[k * d1];
        for (std::size_t j = 0; j < d; ++j) { // bias is not regularized
            loss += 0.5 * l2 * wk[j] * wk[j];
            gk[j] += l2 * wk[j];
        }
    }
    return loss;
}

// Full-batch gradient descent from zero weights with a fixed step size.
// Deterministic: iters == 0 leaves the uniform predictor.
inline ClassifierModel train_softmax(const FeatureMatrix& features,
                                     const std::vector<std::string>& labels,
                                     const SoftmaxConfig& config = {},
                                     const std::vector<std::string>& class_list = {}) {
    if (features.rows != labels.size()) throw InputError("feature/label count mismatch");
    if (features.rows == 0) throw InputError("empty training set");

    ClassifierModel model;
    if (class_list.empty()) {
        std::set<std::string> uniq(labels.begin(), labels.end());
        model.classes.assign(uniq.begin(), uniq.end());
    } else {
        model.classes = class_list;
        std::sort(model.classes.begin(), model.classes.end());
        std::set<std::string> seen(labels.begin(), labels.end());
        for (const auto& c : model.classes)
            if (!seen.count(c))
                throw ConfigError("class \"" + c + "\" has no training examples");
    }
    if (model.classes.size() < 2) throw ConfigError("need at least two classes");
    if (features.rows < model.classes.size())
        throw InputError("fewer examples than classes");

    std::unordered_map<std::string, std::size_t> class_index;
    for (std::size_t k = 0; k < model.classes.size(); ++k) class_index[model.classes[k]] = k;
    std::vector<std::size_t> y(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto it = class_index.find(labels[i]);
        if (it == class_index.end())
            throw InputError("label \"" + labels[i] + "\" is not in the class list");
        y[i] = it->second;
    }

    const std::size_t K = model.classes.size();
    model.dim = features.cols;
    model.l2 = config.l2;
    model.iters = config.iters;
    model.weights.assign(K * (features.cols + 1), 0.0);

    std::vector<double> grad;
    for (std::size_t it = 0; it < config.iters; ++it) {
        softmax_loss_and_gradient(model.weights, features, y, K, config.l2, grad);
        for (std::size_t i = 0; i < model.weights.size(); ++i)
            model.weights[i] -= config.lr * grad[i];
    }
    model.final_loss = softmax_loss_and_gradient(model.weights, features, y, K, config.l2, grad);
    return model;
}

inline Prediction predict(const ClassifierModel& model, const std::vector<double>& values) {
    if (values.size() != model.dim)
        throw InputError("feature dimension " + std::to_string(values.size()) +
                         " does not match model dimension " + std::to_string(model.dim));
    Prediction p;
    p.probs.resize(model.n_classes());
    detail::softmax_scores(model.weights.data(), model.n_classes(), model.dim + 1, values.data(),
                           model.dim, p.probs.data());
    p.predicted = 0;
    for (std::size_t k = 1; k < p.probs.size(); ++k)
        if (p.probs[k] > p.probs[p.predicted]) p.predicted = k;
    return p;
}

struct EvalReport {
    std::size_t total = 0;
    std::size_t correct = 0;
    double accuracy = 0.0;
    std::vector<std::string> classes;
    std::vector<std::uint64_t> confusion;     // K x K, row = true, col = predicted
    std::vector<double> precision, recall;    // per class; 0 when undefined
    std::array<std::uint64_t, 20> max_prob_histogram{}; // fixed 0.05-wide bins
    double mean_max_prob = 0.0;
    double median_max_prob = 0.0;
};

inline EvalReport evaluate(const ClassifierModel& model, const FeatureMatrix& features,
                           const std::vector<std::string>& labels,
                           std::vector<Prediction>* predictions_out = nullptr) {
    if (features.rows != labels.size()) throw InputError("feature/label count mismatch");
    if (features.rows == 0) throw InputError("empty evaluation set");

    std::unordered_map<std::string, std::size_t> class_index;
    for (std::size_t k = 0; k < model.classes.size(); ++k) class_index[model.classes[k]] = k;

    EvalReport report;
    report.classes = model.classes;
    const std::size_t K = model.classes.size();
    report.confusion.assign(K * K, 0);
    report.total = features.rows;

    std::vector<double> max_probs;
    max_probs.reserve(features.rows);
    std::vector<double> x(features.cols);
    for (std::size_t i = 0; i < features.rows; ++i) {
        auto it = class_index.find(labels[i]);
        if (it == class_index.end())
            throw InputError("label \"" + labels[i] + "\" is not known to the model");
        x.assign(features.row(i), features.row(i) + features.cols);
        Prediction p = predict(model, x);
        const double maxp = p.probs[p.predicted];
        max_probs.push_back(maxp);
        const auto bin = std::min<std::size_t>(19, static_cast<std::size_t>(maxp * 20.0));
        report.max_prob_histogram[bin] += 1;
        report.confusion[it->second * K + p.predicted] += 1;
        if (p.predicted == it->second) ++report.correct;
        if (predictions_out) predictions_out->push_back(std::move(p));
    }
    report.accuracy = static_cast<double>(report.correct) / static_cast<double>(report.total);

    report.precision.assign(K, 0.0);
    report.recall.assign(K, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        std::uint64_t row_sum = 0, col_sum = 0;
        for (std::size_t j = 0; j < K; ++j) {
            row_sum += report.confusion[k * K + j];
            col_sum += report.confusion[j * K + k];
        }
        const auto diag = report.confusion[k * K + k];
        if (col_sum) report.precision[k] = static_cast<double>(diag) / static_cast<double>(col_sum);
        if (row_sum) report.recall[k] = static_cast<double>(diag) / static_cast<double>(row_sum);
    }

    double sum = 0.0;
    for (double p : max_probs) sum += p;
    report.mean_max_prob = sum / static_cast<double>(max_probs.size());
    std::sort(max_probs.begin(), max_probs.end());
    const std::size_t m = max_probs.size();
    report.median_max_prob =
        (m % 2 == 1) ? max_probs[m / 2] : 0.5 * (max_probs[m / 2 - 1] + max_probs[m / 2]);
    return report;
}

} // namespace addrkit
