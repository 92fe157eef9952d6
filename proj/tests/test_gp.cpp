/*
 * Copyright 2026 The autotune Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <autotune/gp.hpp>

#include <doctest.h>

#include <Eigen/LU>

#include <random>

using namespace autotune::gp;

namespace {

using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using LVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

// Reference posterior: explicit inverse in extended precision, kernel written out directly.
struct DenseOracle {
    long double mean;
    long double variance;
};

long double oracle_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Hypers<double>& h) {
    long double r2 = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const long double d = static_cast<long double>(a[i]) - b[i];
        r2 += d * d;
    }
    const long double s = std::sqrt(3.0L) * std::sqrt(r2) / h.lengthscale;
    return static_cast<long double>(h.signal_variance) * (1.0L + s) * std::exp(-s);
}

DenseOracle dense_posterior(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Hypers<double>& h,
                            double jitter, const Eigen::VectorXd& at) {
    const auto n = x.rows();
    long double mu = 0;
    for (Eigen::Index i = 0; i < n; ++i) mu += y[i];
    mu /= n;
    long double var = 0;
    for (Eigen::Index i = 0; i < n; ++i) var += (y[i] - mu) * (y[i] - mu);
    var /= n;
    const long double scale = var > 0 ? std::sqrt(var) : 1.0L;

    LMatrix k(n, n);
    LVector ks(n), ys(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        ys[i] = (y[i] - mu) / scale;
        ks[i] = oracle_kernel(x.row(i).transpose(), at, h);
        for (Eigen::Index j = 0; j < n; ++j) k(i, j) = oracle_kernel(x.row(i).transpose(), x.row(j).transpose(), h);
        k(i, i) += static_cast<long double>(h.noise_variance) + jitter;
    }
    const LMatrix kinv = k.fullPivLu().inverse();
    const long double m = ks.dot(kinv * ys);
    const long double v = static_cast<long double>(h.signal_variance) - ks.dot(kinv * ks);
    return {mu + scale * m, v < 0 ? 0.0L : v};
}

Eigen::MatrixXd random_points(std::mt19937_64& rng, Eigen::Index n, Eigen::Index d) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd x(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) x(i, j) = u(rng);
    return x;
}

}  // namespace

TEST_SUITE("gp") {

TEST_CASE("matern 3/2 closed form") {
    CHECK(matern32(0.0, 0.3, 2.0) == 2.0);
    const double r = 0.25, l = 0.4, a = std::sqrt(3.0) * r / l;
    CHECK(matern32(r, l, 1.5) == doctest::Approx(1.5 * (1 + a) * std::exp(-a)).epsilon(1e-15));
}

TEST_CASE("interpolates a single datum") {
    Eigen::MatrixXd x(1, 1);
    x << 0.5;
    Eigen::VectorXd y(1);
    y << 2.0;
    const auto m = GpModel<double>::fit(x, y, {0.2, 1.0, 1e-10});
    Eigen::VectorXd at(1);
    at << 0.5;
    const auto p = m.predict(at);
    CHECK(std::abs(p.mean - 2.0) < 1e-6);
    CHECK(p.variance < 1e-8);
}

TEST_CASE("reverts to the prior far from data") {
    Eigen::MatrixXd x(3, 1);
    x << 0.0, 0.01, 0.02;
    Eigen::VectorXd y(3);
    y << 1.0, 2.0, 6.0;
    const auto m = GpModel<double>::fit(x, y, {0.05, 1.5, 1e-6});
    Eigen::VectorXd far(1);
    far << 50.0;
    const auto p = m.predict(far);
    CHECK(p.mean == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(p.variance == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("five 2-D observations match the dense oracle at 20 points") {
    std::mt19937_64 rng(17);
    const auto x = random_points(rng, 5, 2);
    Eigen::VectorXd y(5);
    for (int i = 0; i < 5; ++i) y[i] = std::sin(3 * x(i, 0)) + x(i, 1) * x(i, 1);
    const Hypers<double> h{0.3, 1.0, 1e-6};
    const auto m = GpModel<double>::fit(x, y, h);
    const auto tests = random_points(rng, 20, 2);
    for (Eigen::Index t = 0; t < 20; ++t) {
        const Eigen::VectorXd at = tests.row(t).transpose();
        const auto p = m.predict(at);
        const auto o = dense_posterior(x, y, h, m.jitter(), at);
        CHECK(std::abs(p.mean - static_cast<double>(o.mean)) < 1e-8);
        CHECK(std::abs(p.variance - static_cast<double>(o.variance)) < 1e-8);
    }
}

TEST_CASE("random instances across the hyperparameter grid match the dense oracle") {
    std::mt19937_64 rng(4242);
    double worst = 0;
    for (int inst = 0; inst < 50; ++inst) {
        const auto n = static_cast<Eigen::Index>(1 + rng() % 30);
        const auto d = static_cast<Eigen::Index>(1 + rng() % 5);
        const Hypers<double> h{kLengthscaleGrid[rng() % 6], kSignalVarianceGrid[rng() % 3],
                               kNoiseVarianceGrid[rng() % 3]};
        const auto x = random_points(rng, n, d);
        Eigen::VectorXd y(n);
        std::normal_distribution<double> g(0.0, 1.0);
        for (Eigen::Index i = 0; i < n; ++i) y[i] = x.row(i).sum() + 0.3 * g(rng);
        const auto m = GpModel<double>::fit(x, y, h);
        const auto tests = random_points(rng, 10, d);
        for (Eigen::Index t = 0; t < tests.rows(); ++t) {
            const Eigen::VectorXd at = tests.row(t).transpose();
            const auto p = m.predict(at);
            const auto o = dense_posterior(x, y, h, m.jitter(), at);
            worst = std::max({worst, std::abs(p.mean - static_cast<double>(o.mean)),
                              std::abs(p.variance - static_cast<double>(o.variance))});
        }
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("an extra observation never raises posterior variance") {
    std::mt19937_64 rng(8);
    const Hypers<double> h{0.2, 1.0, 1e-4};
    const auto all = random_points(rng, 12, 3);
    const auto tests = random_points(rng, 30, 3);
    Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(12, 0.0, 1.0);
    for (Eigen::Index n = 1; n < 12; ++n) {
        const auto before = GpModel<double>::fit(all.topRows(n), y.head(n), h);
        const auto after = GpModel<double>::fit(all.topRows(n + 1), y.head(n + 1), h);
        for (Eigen::Index t = 0; t < tests.rows(); ++t) {
            const Eigen::VectorXd at = tests.row(t).transpose();
            CHECK(after.predict(at).variance <= before.predict(at).variance + 1e-8);
        }
    }
}

TEST_CASE("duplicate points trigger jitter instead of failure") {
    Eigen::MatrixXd x(3, 1);
    x << 0.3, 0.3, 0.3;
    Eigen::VectorXd y(3);
    y << 1.0, 1.0, 1.0;
    const auto m = GpModel<double>::fit(x, y, {1.6, 2.0, 1e-300});
    CHECK(m.jitter() <= 1e-4);
    Eigen::VectorXd at(1);
    at << 0.3;
    CHECK(std::isfinite(m.predict(at).mean));
}

TEST_CASE("fit rejects bad input") {
    Eigen::MatrixXd x(2, 1);
    x << 0.1, 0.2;
    Eigen::VectorXd y(2);
    y << 1.0, std::nan("");
    CHECK_THROWS_AS(GpModel<double>::fit(x, y, {}), autotune::ModelError);
    y << 1.0, 2.0;
    CHECK_THROWS_AS(GpModel<double>::fit(x, y, {0.0, 1.0, 1e-6}), autotune::ModelError);
    CHECK_THROWS_AS(select_hypers<double>(x.topRows(1), y.head(1)), autotune::ModelError);
}

TEST_CASE("log marginal likelihood matches the dense formula") {
    std::mt19937_64 rng(12);
    const auto x = random_points(rng, 8, 2);
    Eigen::VectorXd y(8);
    for (int i = 0; i < 8; ++i) y[i] = x(i, 0) - 2 * x(i, 1);
    const Hypers<double> h{0.4, 2.0, 1e-4};
    const auto m = GpModel<double>::fit(x, y, h);
    Eigen::MatrixXd k = kernel_matrix(x, x, h);
    k.diagonal().array() += h.noise_variance + m.jitter();
    const Eigen::VectorXd ys = (y.array() - m.y_mean()) / m.y_scale();
    const double expected = -0.5 * ys.dot(k.inverse() * ys) - 0.5 * std::log(k.determinant()) -
                            4.0 * std::log(2 * std::numbers::pi);
    CHECK(m.log_marginal_likelihood() == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("hyperparameter selection: constant targets, shift invariance, recovery") {
    std::mt19937_64 rng(21);
    const auto x = random_points(rng, 10, 2);
    const Eigen::VectorXd flat = Eigen::VectorXd::Constant(10, 3.0);
    CHECK(select_hypers<double>(x, flat).noise_variance == 1e-6);

    Eigen::VectorXd y(10);
    for (int i = 0; i < 10; ++i) y[i] = std::sin(5 * x(i, 0)) * std::cos(2 * x(i, 1));
    const Eigen::VectorXd shifted = y.array() + 1000.0;
    CHECK(select_hypers<double>(x, y) == select_hypers<double>(x, shifted));

    // Draw a noiseless sample path from the l = 0.2 prior and check the grid recovers it.
    const auto xs = random_points(rng, 30, 1);
    const Hypers<double> truth{0.2, 1.0, 1e-6};
    Eigen::MatrixXd k = kernel_matrix(xs, xs, truth);
    k.diagonal().array() += 1e-9;
    const Eigen::MatrixXd l = k.llt().matrixL();
    std::normal_distribution<double> g(0.0, 1.0);
    int hits = 0;
    for (int rep = 0; rep < 5; ++rep) {
        Eigen::VectorXd z(30);
        for (auto& v : z) v = g(rng);
        const Eigen::VectorXd sample = l * z;
        const double sel = select_hypers<double>(xs, sample).lengthscale;
        if (sel == 0.1 || sel == 0.2 || sel == 0.4) ++hits;
    }
    CHECK(hits >= 4);
}

TEST_CASE("expected improvement closed forms") {
    CHECK(expected_improvement(1.0, 0.0, 0.5) == 0.0);
    CHECK(expected_improvement(0.5, 0.0, 0.5) == 0.0);
    CHECK(expected_improvement(0.0, 0.0, 0.5) == doctest::Approx(0.49));
    CHECK(expected_improvement(1.0 - kExplorationMargin, 1.0, 1.0) == doctest::Approx(0.3989422804014327).epsilon(1e-12));
}

TEST_CASE("expected improvement matches Monte Carlo") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int t = 0; t < 5; ++t) {
        const double mu = u(rng), sigma = 0.05 + std::abs(u(rng)), f_best = u(rng);
        double acc = 0, acc2 = 0;
        constexpr int kSamples = 1'000'000;
        for (int i = 0; i < kSamples; ++i) {
            const double gain = std::max(f_best - (mu + sigma * g(rng)) - kExplorationMargin, 0.0);
            acc += gain;
            acc2 += gain * gain;
        }
        const double mean = acc / kSamples;
        const double se = std::sqrt((acc2 / kSamples - mean * mean) / kSamples);
        CHECK(std::abs(expected_improvement(mu, sigma, f_best) - mean) <= 4 * se + 1e-12);
    }
}

TEST_CASE("EI at an interpolated observation is negligible") {
    Eigen::MatrixXd x(3, 1);
    x << 0.1, 0.5, 0.9;
    Eigen::VectorXd y(3);
    y << 1.0, 0.2, 0.7;
    const auto m = GpModel<double>::fit(x, y, {0.2, 1.0, 1e-10});
    Eigen::VectorXd at(1);
    at << 0.5;
    CHECK(expected_improvement(m, at, 0.2) < 1e-6);
    for (double p = 0; p <= 1.0; p += 0.01) {
        at << p;
        CHECK(expected_improvement(m, at, 0.2) >= 0.0);
    }
}

}  // TEST_SUITE
