#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "leofl/errors.hpp"
#include "leofl/rng.hpp"

// Desk-scale federated learning: multinomial logistic regression trained with
// mini-batch SGD on synthetic Gaussian mixture data. Everything is deterministic
// given the seeds; no threads, no global state.

namespace leofl::fl {

using Params = std::vector<double>;

// Parameter layout: weights row-major by class (c * features + f), then one bias
// per class at the tail. dim = classes * features + classes.
struct ModelShape {
    int num_classes = 0;
    int num_features = 0;

    int dim() const { return num_classes * num_features + num_classes; }

    void validate() const {
        if (num_classes < 2) throw config_error("model needs at least two classes");
        if (num_features < 1) throw config_error("model needs at least one feature");
    }
};

inline Params zero_params(const ModelShape& s) {
    s.validate();
    return Params(static_cast<std::size_t>(s.dim()), 0.0);
}

struct Dataset {
    int num_classes = 0;
    int num_features = 0;
    std::vector<double> x;   // size() * num_features, row-major
    std::vector<int> y;

    int size() const { return static_cast<int>(y.size()); }

    std::span<const double> row(int i) const {
        return {x.data() + static_cast<std::size_t>(i) * num_features,
                static_cast<std::size_t>(num_features)};
    }

    ModelShape shape() const { return {num_classes, num_features}; }

    void validate() const {
        shape().validate();
        if (x.size() != y.size() * static_cast<std::size_t>(num_features))
            throw config_error("dataset feature matrix has the wrong size");
        for (int label : y)
            if (label < 0 || label >= num_classes)
                throw config_error("dataset label out of range");
    }
};

// Gaussian class-conditional synthesis: one mean vector per class (scaled standard
// normals), unit-variance features around the class mean, uniform labels.
inline Dataset synth_dataset(int num_classes, int num_features, int num_samples,
                             std::uint64_t seed, double class_separation = 3.0) {
    ModelShape{num_classes, num_features}.validate();
    if (num_samples < 1) throw config_error("dataset needs at least one sample");
    std::mt19937_64 gen(rng::derive_seed(seed, 0xDA7A));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_int_distribution<int> pick(0, num_classes - 1);

    std::vector<double> means(static_cast<std::size_t>(num_classes) * num_features);
    for (double& m : means) m = class_separation * gauss(gen);

    Dataset d;
    d.num_classes = num_classes;
    d.num_features = num_features;
    d.x.resize(static_cast<std::size_t>(num_samples) * num_features);
    d.y.resize(static_cast<std::size_t>(num_samples));
    for (int i = 0; i < num_samples; ++i) {
        const int label = pick(gen);
        d.y[static_cast<std::size_t>(i)] = label;
        double* row = d.x.data() + static_cast<std::size_t>(i) * num_features;
        const double* mu = means.data() + static_cast<std::size_t>(label) * num_features;
        for (int f = 0; f < num_features; ++f) row[f] = mu[f] + gauss(gen);
    }
    return d;
}

// Heterogeneous split: per class, client shares are Dirichlet(alpha) (normalized
// gamma draws), counts fixed by largest remainder, samples handed out in shuffled
// order. Clients left empty take one sample from the currently largest client so
// every client ends up with at least one.
inline std::vector<Dataset> dirichlet_partition(const Dataset& data, int num_clients,
                                                double alpha, std::uint64_t seed) {
    data.validate();
    if (num_clients < 1) throw config_error("need at least one client");
    if (!(alpha > 0.0)) throw config_error("dirichlet alpha must be positive");
    if (data.size() < num_clients)
        throw config_error("fewer samples than clients");

    std::mt19937_64 gen(rng::derive_seed(seed, 0xD112));
    std::gamma_distribution<double> gamma(alpha, 1.0);

    std::vector<std::vector<int>> assigned(static_cast<std::size_t>(num_clients));
    for (int c = 0; c < data.num_classes; ++c) {
        std::vector<int> idx;
        for (int i = 0; i < data.size(); ++i)
            if (data.y[static_cast<std::size_t>(i)] == c) idx.push_back(i);
        if (idx.empty()) continue;
        std::shuffle(idx.begin(), idx.end(), gen);

        std::vector<double> share(static_cast<std::size_t>(num_clients));
        double total = 0.0;
        for (double& s : share) {
            s = gamma(gen);
            total += s;
        }
        if (!(total > 0.0)) {
            share.assign(share.size(), 1.0);
            total = static_cast<double>(num_clients);
        }

        // Largest-remainder apportionment of idx.size() samples.
        const int n_c = static_cast<int>(idx.size());
        std::vector<int> count(static_cast<std::size_t>(num_clients));
        std::vector<std::pair<double, int>> rem;
        int given = 0;
        for (int k = 0; k < num_clients; ++k) {
            const double exact = share[static_cast<std::size_t>(k)] / total * n_c;
            count[static_cast<std::size_t>(k)] = static_cast<int>(std::floor(exact));
            given += count[static_cast<std::size_t>(k)];
            rem.push_back({exact - std::floor(exact), k});
        }
        std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
            return a.first > b.first || (a.first == b.first && a.second < b.second);
        });
        for (int i = 0; given < n_c; ++i, ++given)
            ++count[static_cast<std::size_t>(rem[static_cast<std::size_t>(i)].second)];

        int cursor = 0;
        for (int k = 0; k < num_clients; ++k)
            for (int i = 0; i < count[static_cast<std::size_t>(k)]; ++i)
                assigned[static_cast<std::size_t>(k)].push_back(
                    idx[static_cast<std::size_t>(cursor++)]);
    }

    // Nobody goes home empty: move single samples off the largest client.
    for (;;) {
        int empty = -1, largest = 0;
        for (int k = 0; k < num_clients; ++k) {
            if (assigned[static_cast<std::size_t>(k)].empty() && empty < 0) empty = k;
            if (assigned[static_cast<std::size_t>(k)].size() >
                assigned[static_cast<std::size_t>(largest)].size())
                largest = k;
        }
        if (empty < 0) break;
        if (assigned[static_cast<std::size_t>(largest)].size() <= 1)
            throw config_error("cannot give every client a sample");
        assigned[static_cast<std::size_t>(empty)].push_back(
            assigned[static_cast<std::size_t>(largest)].back());
        assigned[static_cast<std::size_t>(largest)].pop_back();
    }

    std::vector<Dataset> out;
    out.reserve(static_cast<std::size_t>(num_clients));
    for (int k = 0; k < num_clients; ++k) {
        Dataset d;
        d.num_classes = data.num_classes;
        d.num_features = data.num_features;
        for (int i : assigned[static_cast<std::size_t>(k)]) {
            auto row = data.row(i);
            d.x.insert(d.x.end(), row.begin(), row.end());
            d.y.push_back(data.y[static_cast<std::size_t>(i)]);
        }
        out.push_back(std::move(d));
    }
    return out;
}

namespace detail {

inline void logits_of(const Params& w, const ModelShape& s,
                      std::span<const double> x, std::vector<double>& logits) {
    logits.assign(static_cast<std::size_t>(s.num_classes), 0.0);
    for (int c = 0; c < s.num_classes; ++c) {
        const double* wc = w.data() + static_cast<std::size_t>(c) * s.num_features;
        double z = w[static_cast<std::size_t>(s.num_classes) * s.num_features +
                     static_cast<std::size_t>(c)];
        for (int f = 0; f < s.num_features; ++f) z += wc[f] * x[static_cast<std::size_t>(f)];
        logits[static_cast<std::size_t>(c)] = z;
    }
}

// Stable softmax in place: subtract the max before exponentiating.
inline void softmax_inplace(std::vector<double>& v) {
    const double m = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (double& z : v) {
        z = std::exp(z - m);
        sum += z;
    }
    for (double& z : v) z /= sum;
}

} // namespace detail

// Cross-entropy of one sample under the current parameters.
inline double sample_loss(const Params& w, const ModelShape& s,
                          std::span<const double> x, int label) {
    std::vector<double> logits;
    detail::logits_of(w, s, x, logits);
    const double m = *std::max_element(logits.begin(), logits.end());
    double lse = 0.0;
    for (double z : logits) lse += std::exp(z - m);
    lse = m + std::log(lse);
    return lse - logits[static_cast<std::size_t>(label)];
}

// Analytic gradient of sample_loss, accumulated into grad (caller zeroes it).
inline void sample_grad_accum(const Params& w, const ModelShape& s,
                              std::span<const double> x, int label, Params& grad) {
    std::vector<double> p;
    detail::logits_of(w, s, x, p);
    detail::softmax_inplace(p);
    p[static_cast<std::size_t>(label)] -= 1.0;
    for (int c = 0; c < s.num_classes; ++c) {
        const double coeff = p[static_cast<std::size_t>(c)];
        double* gc = grad.data() + static_cast<std::size_t>(c) * s.num_features;
        for (int f = 0; f < s.num_features; ++f)
            gc[f] += coeff * x[static_cast<std::size_t>(f)];
        grad[static_cast<std::size_t>(s.num_classes) * s.num_features +
             static_cast<std::size_t>(c)] += coeff;
    }
}

struct HyperParams {
    double learning_rate = 0.1;
    int batch_size = 10;
    int epochs = 1;
    double proximal_coeff = 0.0;   // pull toward the anchor parameters when > 0
    std::uint64_t seed = 0;
    int epoch_start = 0;           // global epoch index of the first local epoch
};

struct LocalResult {
    long long samples = 0;
    Params params;                 // raw trained parameters

    // Pre-weighted form used when contributions already carry their sample counts.
    Params weighted() const {
        Params out = params;
        for (double& v : out) v *= static_cast<double>(samples);
        return out;
    }
};

// Mini-batch SGD over the local dataset. Per epoch the sample order reshuffles with
// a seed derived from (seed, epoch_start + epoch), so a run of n epochs equals n
// runs of one epoch with an advancing epoch_start. The optional proximal term pulls
// toward `anchor` (usually the incoming global model).
inline LocalResult local_sgd(const Params& w_in, const Dataset& data,
                             const HyperParams& hp, const Params& anchor) {
    data.validate();
    const ModelShape s = data.shape();
    if (w_in.size() != static_cast<std::size_t>(s.dim()))
        throw protocol_error("parameter vector does not match the dataset shape");
    if (hp.proximal_coeff != 0.0 && anchor.size() != w_in.size())
        throw protocol_error("anchor dimension mismatch");
    if (data.size() < 1) throw config_error("local dataset is empty");
    if (hp.batch_size < 1) throw config_error("batch size must be positive");
    if (hp.epochs < 0) throw config_error("epoch count must be non-negative");
    if (!(hp.learning_rate >= 0.0)) throw config_error("learning rate must be >= 0");

    Params w = w_in;
    Params grad(w.size());
    std::vector<int> order(static_cast<std::size_t>(data.size()));

    for (int e = 0; e < hp.epochs; ++e) {
        // The permutation must depend only on (seed, absolute epoch index) so that
        // an n-epoch run decomposes into n single-epoch runs exactly.
        std::iota(order.begin(), order.end(), 0);
        std::mt19937_64 gen(rng::derive_seed(
            hp.seed, 0xE90C, static_cast<std::uint64_t>(hp.epoch_start + e)));
        std::shuffle(order.begin(), order.end(), gen);

        for (int begin = 0; begin < data.size(); begin += hp.batch_size) {
            const int end = std::min(begin + hp.batch_size, data.size());
            const int bsz = end - begin;
            std::fill(grad.begin(), grad.end(), 0.0);
            for (int i = begin; i < end; ++i) {
                const int idx = order[static_cast<std::size_t>(i)];
                sample_grad_accum(w, s, data.row(idx),
                                  data.y[static_cast<std::size_t>(idx)], grad);
            }
            const double scale = hp.learning_rate / bsz;
            if (hp.proximal_coeff > 0.0) {
                const double prox = hp.learning_rate * hp.proximal_coeff;
                for (std::size_t i = 0; i < w.size(); ++i)
                    w[i] -= scale * grad[i] + prox * (w[i] - anchor[i]);
            } else {
                for (std::size_t i = 0; i < w.size(); ++i) w[i] -= scale * grad[i];
            }
        }
        for (double v : w)
            if (!std::isfinite(v))
                throw divergence_error("training diverged in epoch " +
                                       std::to_string(hp.epoch_start + e + 1));
    }
    return {data.size(), std::move(w)};
}

// How contribution parameters are encoded on the wire.
enum class WeightConvention {
    RawWithWeight,   // params are raw, the sample count travels separately
    Preweighted      // params already hold samples * w
};

struct Contribution {
    int client_id = 0;
    long long samples = 0;
    Params params;
};

// Sample-weighted average of client contributions. Inputs are summed in ascending
// client order regardless of arrival order, so the result is bitwise independent of
// permutation.
inline Params global_update(std::span<const Contribution> contributions,
                            WeightConvention convention) {
    if (contributions.empty()) throw protocol_error("no contributions to aggregate");
    std::vector<const Contribution*> sorted;
    sorted.reserve(contributions.size());
    for (const auto& c : contributions) sorted.push_back(&c);
    std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
        return a->client_id < b->client_id;
    });

    const std::size_t dim = sorted.front()->params.size();
    Params acc(dim, 0.0);
    long long weight = 0;
    for (const auto* c : sorted) {
        if (c->params.size() != dim)
            throw protocol_error("contribution dimension mismatch");
        if (c->samples <= 0) throw protocol_error("contribution needs samples > 0");
        weight += c->samples;
        if (convention == WeightConvention::RawWithWeight) {
            const double d = static_cast<double>(c->samples);
            for (std::size_t i = 0; i < dim; ++i) acc[i] += d * c->params[i];
        } else {
            for (std::size_t i = 0; i < dim; ++i) acc[i] += c->params[i];
        }
    }
    for (double& v : acc) v /= static_cast<double>(weight);
    return acc;
}

struct Metrics {
    double accuracy = 0.0;
    double mean_loss = 0.0;
};

// Accuracy (argmax, ties to the lowest class) and mean cross-entropy on a dataset.
inline Metrics evaluate(const Params& w, const Dataset& test) {
    test.validate();
    const ModelShape s = test.shape();
    if (w.size() != static_cast<std::size_t>(s.dim()))
        throw protocol_error("parameter vector does not match the dataset shape");
    if (test.size() < 1) throw config_error("evaluation set is empty");

    std::vector<double> logits;
    int correct = 0;
    double loss = 0.0;
    for (int i = 0; i < test.size(); ++i) {
        detail::logits_of(w, s, test.row(i), logits);
        int arg = 0;
        for (int c = 1; c < s.num_classes; ++c)
            if (logits[static_cast<std::size_t>(c)] > logits[static_cast<std::size_t>(arg)])
                arg = c;
        if (arg == test.y[static_cast<std::size_t>(i)]) ++correct;
        loss += sample_loss(w, s, test.row(i), test.y[static_cast<std::size_t>(i)]);
    }
    return {static_cast<double>(correct) / test.size(), loss / test.size()};
}

} // namespace leofl::fl
