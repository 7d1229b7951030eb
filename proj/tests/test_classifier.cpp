#include <catch2/catch.hpp>

#include <cmath>

#include "addrkit/classifier.hpp"
#include "addrkit/rng.hpp"

using namespace addrkit;

namespace {

// Two well-separated clusters via Box-Muller noise around distant centers.
struct ToySet {
    FeatureMatrix features;
    std::vector<std::string> labels;
};

double gaussian(addrkit::Rng& rng) {
    const double u1 = std::max(rng.next_double(), 1e-12);
    const double u2 = rng.next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

ToySet separable_toy_set(std::size_t per_class, std::uint64_t seed) {
    addrkit::Rng rng(seed);
    ToySet toy;
    toy.features = FeatureMatrix(per_class * 2, 2);
    for (std::size_t i = 0; i < per_class * 2; ++i) {
        const bool second = i >= per_class;
        double* row = toy.features.row(i);
        row[0] = (second ? 4.0 : -4.0) + 0.5 * gaussian(rng);
        row[1] = (second ? 4.0 : -4.0) + 0.5 * gaussian(rng);
        toy.labels.push_back(second ? "north" : "south");
    }
    return toy;
}

} // namespace

TEST_CASE("zero iterations give the uniform predictor") {
    auto toy = separable_toy_set(10, 1);
    SoftmaxConfig config;
    config.iters = 0;
    const auto model = train_softmax(toy.features, toy.labels, config);
    const auto pred = predict(model, {1.5, -2.0});
    for (double p : pred.probs) CHECK(p == Approx(0.5));
    CHECK(pred.predicted == 0); // tie broken toward the lowest class index
}

TEST_CASE("training separates two well-separated clusters") {
    auto toy = separable_toy_set(50, 2);
    SoftmaxConfig config;
    config.iters = 500;
    config.lr = 0.5;
    config.l2 = 1e-4;
    const auto model = train_softmax(toy.features, toy.labels, config);
    const auto report = evaluate(model, toy.features, toy.labels);
    CHECK(report.accuracy == 1.0);

    // Held-out points deep inside each cluster score confidently.
    const auto p = predict(model, {4.0, 4.0});
    CHECK(model.classes[p.predicted] == "north");
    CHECK(p.probs[p.predicted] > 0.9);
}

TEST_CASE("softmax gradient matches central finite differences") {
    addrkit::Rng rng(12);
    const std::size_t n = 12, d = 5, K = 3;
    FeatureMatrix features(n, d);
    for (auto& x : features.data) x = rng.next_double() * 2.0 - 1.0;
    std::vector<std::size_t> labels(n);
    for (auto& y : labels) y = rng.next_below(K);

    for (int point = 0; point < 10; ++point) {
        std::vector<double> weights(K * (d + 1));
        for (auto& w : weights) w = rng.next_double() - 0.5;
        const double l2 = 0.05 * static_cast<double>(point % 3);

        std::vector<double> grad;
        softmax_loss_and_gradient(weights, features, labels, K, l2, grad);

        const double eps = 1e-6;
        std::vector<double> dummy;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            const double saved = weights[i];
            weights[i] = saved + eps;
            const double up = softmax_loss_and_gradient(weights, features, labels, K, l2, dummy);
            weights[i] = saved - eps;
            const double down = softmax_loss_and_gradient(weights, features, labels, K, l2, dummy);
            weights[i] = saved;
            const double numeric = (up - down) / (2 * eps);
            const double denom = std::max({std::abs(numeric), std::abs(grad[i]), 1e-8});
            INFO("point=" << point << " weight=" << i);
            CHECK(std::abs(numeric - grad[i]) / denom <= 1e-5);
        }
    }
}

TEST_CASE("loss is non-increasing under a small fixed step") {
    auto toy = separable_toy_set(30, 3);
    std::vector<std::size_t> labels(toy.labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = toy.labels[i] == "north" ? 1 : 0;

    std::vector<double> weights(2 * 3, 0.0);
    std::vector<double> grad;
    double prev = softmax_loss_and_gradient(weights, toy.features, labels, 2, 0.01, grad);
    for (int it = 0; it < 200; ++it) {
        for (std::size_t i = 0; i < weights.size(); ++i) weights[i] -= 0.05 * grad[i];
        const double cur = softmax_loss_and_gradient(weights, toy.features, labels, 2, 0.01, grad);
        CHECK(cur <= prev + 1e-12);
        prev = cur;
    }
}

TEST_CASE("predictions form a probability simplex") {
    auto toy = separable_toy_set(40, 4);
    SoftmaxConfig config;
    config.iters = 200;
    const auto model = train_softmax(toy.features, toy.labels, config);

    addrkit::Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        const std::vector<double> x = {rng.next_double() * 10 - 5, rng.next_double() * 10 - 5};
        const auto pred = predict(model, x);
        double sum = 0;
        for (double p : pred.probs) {
            CHECK(p >= 0.0);
            sum += p;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-9);
        for (double p : pred.probs) CHECK(p <= pred.probs[pred.predicted]);
    }
}

TEST_CASE("softmax probabilities are invariant to score shifts") {
    ClassifierModel model;
    model.classes = {"a", "b", "c"};
    model.dim = 2;
    model.weights = {0.5, -1.0, 0.2, 1.5, 0.3, -0.7, -0.2, 0.8, 0.1};
    const std::vector<double> x = {0.4, -1.2};
    const auto before = predict(model, x);

    // Add a constant to every class score by shifting all biases.
    for (std::size_t k = 0; k < 3; ++k) model.weights[k * 3 + 2] += 7.5;
    const auto after = predict(model, x);
    CHECK(after.predicted == before.predicted);
    for (std::size_t k = 0; k < 3; ++k)
        CHECK(after.probs[k] == Approx(before.probs[k]).epsilon(1e-9));
}

TEST_CASE("train_softmax validates inputs") {
    auto toy = separable_toy_set(10, 6);
    SoftmaxConfig config;
    config.iters = 1;
    CHECK_THROWS_AS(train_softmax(toy.features, toy.labels, config, {"north", "south", "ghost"}),
                    ConfigError);
    try {
        train_softmax(toy.features, toy.labels, config, {"north", "south", "ghost"});
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("ghost") != std::string::npos);
    }

    const std::vector<std::string> one_class(toy.labels.size(), "same");
    CHECK_THROWS_AS(train_softmax(toy.features, one_class, config), ConfigError);
}

TEST_CASE("predict rejects dimension mismatches") {
    auto toy = separable_toy_set(10, 7);
    SoftmaxConfig config;
    config.iters = 1;
    const auto model = train_softmax(toy.features, toy.labels, config);
    CHECK_THROWS_AS(predict(model, {1.0, 2.0, 3.0}), InputError);
}

TEST_CASE("evaluate reports accuracy, confusion and the probability histogram") {
    SECTION("an oracle model has accuracy 1 and a diagonal confusion matrix") {
        auto toy = separable_toy_set(25, 8);
        SoftmaxConfig config;
        config.iters = 400;
        config.lr = 0.5;
        config.l2 = 1e-4;
        const auto model = train_softmax(toy.features, toy.labels, config);
        const auto report = evaluate(model, toy.features, toy.labels);
        CHECK(report.accuracy == 1.0);
        const std::size_t K = report.classes.size();
        for (std::size_t i = 0; i < K; ++i)
            for (std::size_t j = 0; j < K; ++j)
                if (i != j) CHECK(report.confusion[i * K + j] == 0);
        for (std::size_t k = 0; k < K; ++k) {
            CHECK(report.precision[k] == 1.0);
            CHECK(report.recall[k] == 1.0);
        }
        std::uint64_t total = 0;
        for (auto b : report.max_prob_histogram) total += b;
        CHECK(total == report.total);
    }
    SECTION("a constant predictor scores the majority share") {
        ClassifierModel model;
        model.classes = {"big", "small"};
        model.dim = 1;
        // Bias strongly toward class 0 regardless of input.
        model.weights = {0.0, 50.0, 0.0, -50.0};
        FeatureMatrix features(10, 1);
        std::vector<std::string> labels;
        for (int i = 0; i < 10; ++i) labels.push_back(i < 7 ? "big" : "small");
        const auto report = evaluate(model, features, labels);
        CHECK(report.accuracy == Approx(0.7));
    }
}
