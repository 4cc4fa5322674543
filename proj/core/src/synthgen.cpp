#include "hbary/synthgen.hpp"

#include <cmath>
#include <numeric>

#include "hbary/error.hpp"
#include "hbary/random.hpp"

namespace hbary {

namespace {

double bump(double z1) { return 4.0 * z1 * (1.0 - z1); }

Row make_row(double x, std::optional<double> z1, std::optional<double> z2) {
    Row r;
    r.x = {x};
    r.z.push_back(z1 ? CovariateCell(*z1) : std::nullopt);
    r.z.push_back(z2 ? CovariateCell(*z2) : std::nullopt);
    return r;
}

}  // namespace

CovariateSchema synthetic_schema() {
    return CovariateSchema({{"z1", CovariateKind::continuous}, {"z2", CovariateKind::continuous}}, 1);
}

int draw_hidden_label(Rng& rng) { return rng.uniform() < 1.0 / 3.0 ? -1 : 1; }

GeneratedData gen_missing_test(int test_id, std::size_t n1, std::size_t n2, std::size_t n3, std::size_t n_val,
                               std::uint64_t seed) {
    if (test_id < 1 || test_id > 3) throw ConfigError("missing test id must be 1, 2 or 3");
    if (n1 < 1 || n2 < 1 || n3 < 1) throw ConfigError("group sizes must be >= 1");

    SyntheticTruth truth;
    switch (test_id) {
        case 1:
            truth.f = [](double a, double b) { return bump(a) + 0.5 * b; };
            truth.g = [](double, double) { return 0.2; };
            break;
        case 2:
            truth.f = [](double a, double b) { return bump(a) + 0.5 * a * b; };
            truth.g = [](double, double) { return 0.2; };
            break;
        default:
            truth.f = [](double a, double b) { return bump(a) + 0.5 * b; };
            truth.g = [](double a, double b) { return 0.25 * (std::sqrt(a) + std::sqrt(b)); };
    }
    truth.z_support = {{0.0, 1.0}, {0.0, 1.0}};
    truth.descriptor = {{"generator", "missing"}, {"test", test_id}, {"n1", n1}, {"n2", n2},
                        {"n3", n3},             {"n_val", n_val}, {"seed", seed}};

    const std::size_t total = n1 + n2 + n3 + n_val;
    Rng rng(seed);
    std::vector<double> z1(total), z2(total), noise(total);
    for (std::size_t i = 0; i < total; ++i) {
        z1[i] = rng.uniform();
        z2[i] = rng.uniform();
    }
    for (auto& e : noise) e = rng.normal();
    // Random assignment of draws to groups I1, I2, I3, validation.
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = total; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    std::vector<Row> train, complete, val;
    for (std::size_t p = 0; p < total; ++p) {
        const std::size_t i = order[p];
        const double x = truth.f(z1[i], z2[i]) + truth.g(z1[i], z2[i]) * noise[i];
        if (p < n1 + n2 + n3) {
            const bool hide2 = p < n1;
            const bool hide1 = p >= n1 && p < n1 + n2;
            train.push_back(make_row(x, hide1 ? std::nullopt : std::optional(z1[i]),
                                     hide2 ? std::nullopt : std::optional(z2[i])));
            complete.push_back(make_row(x, z1[i], z2[i]));
        } else {
            val.push_back(make_row(x, z1[i], z2[i]));
        }
    }
    const auto schema = synthetic_schema();
    GeneratedData out{HeterogeneousDataset(schema, std::move(train)), HeterogeneousDataset(schema, std::move(complete)),
                      HeterogeneousDataset(schema, std::move(val)), std::move(truth), {}, {}, {n1, n2, n3}};
    return out;
}

namespace {

// Shared body of the structured, extrapolation and hidden-factor generators.
GeneratedData gen_two_group(double alpha, double z1_max_i1, bool hidden, std::size_t n1, std::size_t n2,
                            std::size_t n_val, std::uint64_t seed, nlohmann::json descriptor) {
    const std::size_t n1v = n1 + n_val;
    const std::size_t total = n1v + n2;
    Rng rng(seed);
    std::vector<double> z1(total), z2(total, 0.0);
    for (std::size_t i = 0; i < total; ++i) {
        if (i < n1v) {
            z1[i] = rng.uniform(0.0, z1_max_i1);
            z2[i] = rng.uniform();
        } else {
            z1[i] = rng.uniform();
        }
    }
    std::vector<double> noise(total);
    std::vector<int> labels(total, 0);
    for (std::size_t i = 0; i < total; ++i) {
        if (hidden) {
            labels[i] = draw_hidden_label(rng);
            noise[i] = 0.2 * (labels[i] + 0.25 * rng.normal());
        } else {
            noise[i] = 0.2 * rng.normal();
        }
    }
    // Validation rows are a random n_val of the I1-law draws.
    std::vector<std::size_t> order(n1v);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = n1v; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    std::vector<Row> train, val;
    std::vector<int> train_labels;
    for (std::size_t p = 0; p < n1v; ++p) {
        const std::size_t i = order[p];
        const double x = bump(z1[i]) + alpha * (z2[i] - 0.5) + noise[i];
        if (p < n1) {
            train.push_back(make_row(x, z1[i], z2[i]));
            train_labels.push_back(labels[i]);
        } else {
            val.push_back(make_row(x, z1[i], z2[i]));
        }
    }
    for (std::size_t i = n1v; i < total; ++i) {
        train.push_back(make_row(bump(z1[i]) + noise[i], z1[i], std::nullopt));
        train_labels.push_back(labels[i]);
    }

    SyntheticTruth truth;
    const double shift = hidden ? 0.2 / 3.0 : 0.0;
    const double sd = hidden ? 0.2 * std::sqrt(0.0625 + 8.0 / 9.0) : 0.2;
    truth.f = [alpha, shift](double a, double b) { return bump(a) + alpha * (b - 0.5) + shift; };
    truth.g = [sd](double, double) { return sd; };
    truth.z_support = {{0.0, z1_max_i1}, {0.0, 1.0}};
    truth.noise_kind = hidden ? NoiseKind::bimodal : NoiseKind::gaussian;
    truth.descriptor = std::move(descriptor);

    const auto schema = synthetic_schema();
    GeneratedData out;
    out.train = HeterogeneousDataset(schema, std::move(train));
    out.validation = HeterogeneousDataset(schema, std::move(val));
    out.truth = std::move(truth);
    out.group_sizes = {n1, n2};
    if (hidden) out.hidden_labels = std::move(train_labels);
    return out;
}

}  // namespace

GeneratedData gen_structured(double alpha, std::size_t n1, std::size_t n2, std::size_t n_val, std::uint64_t seed) {
    if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
    if (n1 < 1 || n2 < 1) throw ConfigError("group sizes must be >= 1");
    return gen_two_group(alpha, 1.0, false, n1, n2, n_val, seed,
                         {{"generator", "structured"}, {"alpha", alpha}, {"n1", n1}, {"n2", n2}, {"n_val", n_val},
                          {"seed", seed}});
}

GeneratedData gen_extrapolation(std::size_t n1, std::size_t n2, std::size_t n_val, std::uint64_t seed) {
    if (n1 < 1 || n2 < 1) throw ConfigError("group sizes must be >= 1");
    auto out = gen_two_group(1.0, 0.5, false, n1, n2, n_val, seed,
                             {{"generator", "extrapolation"}, {"n1", n1}, {"n2", n2}, {"n_val", n_val},
                              {"seed", seed}});
    out.targets = {CovariateRecord{{"z1", 0.85}, {"z2", 0.25}}, CovariateRecord{{"z1", 0.25}, {"z2", 0.25}}};
    return out;
}

GeneratedData gen_hidden_factor(std::size_t n1, std::size_t n2, std::size_t n_val, std::uint64_t seed) {
    if (n1 < 1 || n2 < 1) throw ConfigError("group sizes must be >= 1");
    return gen_two_group(1.0, 1.0, true, n1, n2, n_val, seed,
                         {{"generator", "hidden"}, {"n1", n1}, {"n2", n2}, {"n_val", n_val}, {"seed", seed}});
}

}  // namespace hbary
