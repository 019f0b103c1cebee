#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "leofl/fl_engine.hpp"

using namespace leofl;
using fl::Params;

namespace {

fl::Dataset tiny_dataset() {
    // Two classes in one dimension, separable at 0.
    fl::Dataset d;
    d.num_classes = 2;
    d.num_features = 1;
    d.x = {2.0, 1.5, -2.0, -1.0};
    d.y = {0, 0, 1, 1};
    return d;
}

double composite_loss(const Params& w, const fl::ModelShape& s,
                      std::span<const double> x, int label, double lambda,
                      const Params& anchor) {
    double l = fl::sample_loss(w, s, x, label);
    if (lambda > 0.0) {
        double q = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i)
            q += (w[i] - anchor[i]) * (w[i] - anchor[i]);
        l += 0.5 * lambda * q;
    }
    return l;
}

} // namespace

TEST_CASE("model dimension") {
    REQUIRE(fl::ModelShape{10, 20}.dim() == 210);
    REQUIRE(fl::ModelShape{2, 1}.dim() == 4);
    REQUIRE_THROWS_AS((fl::ModelShape{1, 5}.validate()), config_error);
}

TEST_CASE("synthetic data is deterministic per seed and well-formed") {
    const auto a = fl::synth_dataset(4, 6, 500, 77);
    const auto b = fl::synth_dataset(4, 6, 500, 77);
    const auto c = fl::synth_dataset(4, 6, 500, 78);
    REQUIRE(a.x == b.x);
    REQUIRE(a.y == b.y);
    REQUIRE(a.x != c.x);
    a.validate();
    REQUIRE(a.size() == 500);
    std::set<int> seen(a.y.begin(), a.y.end());
    REQUIRE(seen.size() == 4);   // all classes occur in 500 uniform draws
}

TEST_CASE("dirichlet partition conserves samples and leaves nobody empty") {
    const auto data = fl::synth_dataset(5, 4, 873, 11);
    const int k = 40;
    const auto parts = fl::dirichlet_partition(data, k, 0.5, 99);
    REQUIRE(parts.size() == static_cast<std::size_t>(k));
    int total = 0;
    for (const auto& p : parts) {
        REQUIRE(p.size() >= 1);
        p.validate();
        total += p.size();
    }
    REQUIRE(total == data.size());

    // Identical seeds reproduce the split.
    const auto again = fl::dirichlet_partition(data, k, 0.5, 99);
    for (int i = 0; i < k; ++i) {
        REQUIRE(parts[static_cast<std::size_t>(i)].x ==
                again[static_cast<std::size_t>(i)].x);
        REQUIRE(parts[static_cast<std::size_t>(i)].y ==
                again[static_cast<std::size_t>(i)].y);
    }
}

TEST_CASE("partition with one client returns the full dataset") {
    const auto data = fl::synth_dataset(3, 2, 50, 5);
    const auto parts = fl::dirichlet_partition(data, 1, 0.5, 1);
    REQUIRE(parts.size() == 1);
    REQUIRE(parts[0].size() == data.size());
    // Same multiset of samples (order may differ after the per-class shuffle).
    std::multiset<double> a(parts[0].x.begin(), parts[0].x.end());
    std::multiset<double> b(data.x.begin(), data.x.end());
    REQUIRE(a == b);
}

TEST_CASE("smaller alpha concentrates classes on fewer clients") {
    const auto data = fl::synth_dataset(6, 3, 3000, 42);
    const int k = 20;
    auto concentration = [&](double alpha) {
        const auto parts = fl::dirichlet_partition(data, k, alpha, 7);
        // Mean over classes of the largest single-client share of that class.
        std::vector<std::vector<int>> counts(
            6, std::vector<int>(static_cast<std::size_t>(k), 0));
        for (int c = 0; c < k; ++c)
            for (int label : parts[static_cast<std::size_t>(c)].y)
                ++counts[static_cast<std::size_t>(label)][static_cast<std::size_t>(c)];
        double acc = 0.0;
        for (int label = 0; label < 6; ++label) {
            int total = 0, best = 0;
            for (int c = 0; c < k; ++c) {
                total += counts[static_cast<std::size_t>(label)][static_cast<std::size_t>(c)];
                best = std::max(best,
                                counts[static_cast<std::size_t>(label)][static_cast<std::size_t>(c)]);
            }
            acc += static_cast<double>(best) / total;
        }
        return acc / 6.0;
    };
    REQUIRE(concentration(0.1) > concentration(100.0) + 0.1);
}

TEST_CASE("partition preconditions") {
    const auto data = fl::synth_dataset(3, 2, 10, 5);
    REQUIRE_THROWS_AS(fl::dirichlet_partition(data, 11, 0.5, 1), config_error);
    REQUIRE_THROWS_AS(fl::dirichlet_partition(data, 5, 0.0, 1), config_error);
    REQUIRE_THROWS_AS(fl::dirichlet_partition(data, 0, 0.5, 1), config_error);
}

TEST_CASE("analytic gradient matches central finite differences") {
    std::mt19937_64 gen(31337);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const fl::ModelShape s{3, 4};

    for (int trial = 0; trial < 20; ++trial) {
        Params w(static_cast<std::size_t>(s.dim()));
        for (double& v : w) v = gauss(gen);
        std::vector<double> x(4);
        for (double& v : x) v = gauss(gen);
        const int label = static_cast<int>(gen() % 3);
        const double lambda = (trial % 2 == 0) ? 0.0 : 0.3;
        Params anchor(w.size());
        for (double& v : anchor) v = gauss(gen);

        Params grad(w.size(), 0.0);
        fl::sample_grad_accum(w, s, x, label, grad);
        if (lambda > 0.0)
            for (std::size_t i = 0; i < w.size(); ++i)
                grad[i] += lambda * (w[i] - anchor[i]);

        const double h = 1e-6;
        for (std::size_t i = 0; i < w.size(); ++i) {
            Params wp = w, wm = w;
            wp[i] += h;
            wm[i] -= h;
            const double fd = (composite_loss(wp, s, x, label, lambda, anchor) -
                               composite_loss(wm, s, x, label, lambda, anchor)) /
                              (2 * h);
            const double scale = std::max(1.0, std::abs(fd));
            REQUIRE(std::abs(grad[i] - fd) / scale < 1e-5);
        }
    }
}

TEST_CASE("one SGD step equals the hand-computed batch update") {
    const auto data = tiny_dataset();
    const fl::ModelShape s = data.shape();
    Params w0 = {0.3, -0.2, 0.1, 0.05};

    fl::HyperParams hp;
    hp.learning_rate = 0.2;
    hp.batch_size = 4;   // one batch per epoch, shuffle order irrelevant
    hp.epochs = 1;
    hp.seed = 5;

    const auto res = fl::local_sgd(w0, data, hp, w0);
    Params grad(w0.size(), 0.0);
    for (int i = 0; i < data.size(); ++i)
        fl::sample_grad_accum(w0, s, data.row(i), data.y[static_cast<std::size_t>(i)],
                              grad);
    for (std::size_t i = 0; i < w0.size(); ++i) {
        const double expect = w0[i] - 0.2 / 4.0 * grad[i];
        REQUIRE(res.params[i] == Catch::Approx(expect).margin(1e-15));
    }
    REQUIRE(res.samples == 4);
    const auto pre = res.weighted();
    for (std::size_t i = 0; i < w0.size(); ++i)
        REQUIRE(pre[i] == Catch::Approx(4.0 * res.params[i]).margin(1e-15));
}

TEST_CASE("zero learning rate and zero epochs leave parameters untouched") {
    const auto data = tiny_dataset();
    Params w0 = {0.3, -0.2, 0.1, 0.05};
    fl::HyperParams hp;
    hp.learning_rate = 0.0;
    hp.epochs = 3;
    hp.seed = 9;
    REQUIRE(fl::local_sgd(w0, data, hp, w0).params == w0);
    hp.learning_rate = 0.5;
    hp.epochs = 0;
    REQUIRE(fl::local_sgd(w0, data, hp, w0).params == w0);
}

TEST_CASE("epoch decomposition is exact") {
    const auto data = fl::synth_dataset(3, 5, 60, 21);
    Params w0(fl::ModelShape{3, 5}.dim(), 0.0);

    fl::HyperParams all;
    all.learning_rate = 0.1;
    all.batch_size = 7;
    all.epochs = 3;
    all.seed = 1001;
    const auto full = fl::local_sgd(w0, data, all, w0);

    Params w = w0;
    for (int e = 0; e < 3; ++e) {
        fl::HyperParams one = all;
        one.epochs = 1;
        one.epoch_start = e;
        w = fl::local_sgd(w, data, one, w0).params;
    }
    REQUIRE(w == full.params);   // bitwise: same shuffles, same arithmetic
}

TEST_CASE("proximal term pulls toward the anchor") {
    const auto data = tiny_dataset();
    Params w0 = {5.0, -5.0, 2.0, -2.0};
    Params anchor(4, 0.0);
    fl::HyperParams hp;
    hp.learning_rate = 0.1;
    hp.batch_size = 4;
    hp.epochs = 50;
    hp.seed = 3;
    hp.proximal_coeff = 10.0;   // dominates the data term
    const auto res = fl::local_sgd(w0, data, hp, anchor);
    double dist0 = 0.0, dist1 = 0.0;
    for (std::size_t i = 0; i < w0.size(); ++i) {
        dist0 += w0[i] * w0[i];
        dist1 += res.params[i] * res.params[i];
    }
    REQUIRE(dist1 < 0.05 * dist0);
}

TEST_CASE("divergent training reports the epoch") {
    fl::Dataset data;
    data.num_classes = 2;
    data.num_features = 1;
    data.x = {1e150, -1e150};
    data.y = {1, 0};   // mislabeled on purpose: the gradient is huge, not zero
    Params w0 = {1.0, -1.0, 0.0, 0.0};
    fl::HyperParams hp;
    hp.learning_rate = 1e200;
    hp.batch_size = 2;
    hp.epochs = 2;
    hp.seed = 4;
    REQUIRE_THROWS_AS(fl::local_sgd(w0, data, hp, w0), divergence_error);
    try {
        fl::local_sgd(w0, data, hp, w0);
    } catch (const divergence_error& e) {
        REQUIRE(std::string(e.what()).find("epoch") != std::string::npos);
    }
}

TEST_CASE("global update is invariant to contribution order") {
    std::mt19937_64 gen(555);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<fl::Contribution> contribs;
    for (int id = 0; id < 50; ++id) {
        fl::Contribution c;
        c.client_id = id;
        c.samples = 1 + static_cast<long long>(gen() % 500);
        for (int i = 0; i < 30; ++i) c.params.push_back(gauss(gen));
        contribs.push_back(std::move(c));
    }
    const auto base = fl::global_update(contribs, fl::WeightConvention::RawWithWeight);

    auto shuffled = contribs;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    const auto permuted =
        fl::global_update(shuffled, fl::WeightConvention::RawWithWeight);
    REQUIRE(base == permuted);   // bitwise equal after id-sorted summation

    // Pre-weighted inputs give the same mean.
    auto pre = contribs;
    for (auto& c : pre)
        for (double& v : c.params) v *= static_cast<double>(c.samples);
    const auto preweighted = fl::global_update(pre, fl::WeightConvention::Preweighted);
    for (std::size_t i = 0; i < base.size(); ++i)
        REQUIRE(preweighted[i] == Catch::Approx(base[i]).epsilon(1e-12));

    REQUIRE_THROWS_AS(
        fl::global_update(std::vector<fl::Contribution>{},
                          fl::WeightConvention::RawWithWeight),
        protocol_error);
}

TEST_CASE("evaluation matches a hand computation") {
    fl::Dataset test;
    test.num_classes = 2;
    test.num_features = 1;
    test.x = {2.0, -2.0, 0.5};
    test.y = {0, 1, 1};
    // logits = (x, -x): sample 3 (x=0.5, label 1) is misclassified.
    Params w = {1.0, -1.0, 0.0, 0.0};
    const auto m = fl::evaluate(w, test);
    REQUIRE(m.accuracy == Catch::Approx(2.0 / 3.0));
    const double l1 = std::log1p(std::exp(-4.0));
    const double l2 = std::log1p(std::exp(-4.0));
    const double l3 = std::log1p(std::exp(1.0));
    REQUIRE(m.mean_loss == Catch::Approx((l1 + l2 + l3) / 3.0).epsilon(1e-12));
}

TEST_CASE("argmax ties resolve to the lowest class") {
    fl::Dataset test;
    test.num_classes = 3;
    test.num_features = 1;
    test.x = {1.0};
    test.y = {0};
    Params w(fl::ModelShape{3, 1}.dim(), 0.0);   // all logits equal
    REQUIRE(fl::evaluate(w, test).accuracy == Catch::Approx(1.0));
    test.y = {1};
    REQUIRE(fl::evaluate(w, test).accuracy == Catch::Approx(0.0));
}

TEST_CASE("training reduces the loss on a learnable problem") {
    const auto data = fl::synth_dataset(3, 4, 300, 2718);
    Params w0(fl::ModelShape{3, 4}.dim(), 0.0);
    const auto before = fl::evaluate(w0, data);
    fl::HyperParams hp;
    hp.learning_rate = 0.05;
    hp.batch_size = 10;
    hp.epochs = 5;
    hp.seed = 12;
    const auto after = fl::evaluate(fl::local_sgd(w0, data, hp, w0).params, data);
    REQUIRE(after.mean_loss < before.mean_loss);
    REQUIRE(after.accuracy > 0.8);
}

TEST_CASE("numerically extreme logits stay finite through the stable softmax") {
    fl::Dataset test;
    test.num_classes = 2;
    test.num_features = 1;
    test.x = {500.0};
    test.y = {0};
    Params w = {3.0, -3.0, 0.0, 0.0};   // logits +-1500: naive exp overflows
    const auto m = fl::evaluate(w, test);
    REQUIRE(std::isfinite(m.mean_loss));
    REQUIRE(m.accuracy == Catch::Approx(1.0));
    Params grad(w.size(), 0.0);
    fl::sample_grad_accum(w, test.shape(), test.row(0), 0, grad);
    for (double g : grad) REQUIRE(std::isfinite(g));
}
