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

#pragma once

#include <autotune/error.hpp>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace autotune::gp {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct Hypers {
    Scalar lengthscale = Scalar(0.2);
    Scalar signal_variance = Scalar(1);
    Scalar noise_variance = Scalar(1e-6);

    bool operator==(const Hypers&) const = default;
};

/// Matérn 3/2 covariance at distance r: sf2 (1 + sqrt(3) r / l) exp(-sqrt(3) r / l).
template <typename Scalar>
Scalar matern32(Scalar r, Scalar lengthscale, Scalar signal_variance) {
    using std::exp;
    using std::sqrt;
    const Scalar a = sqrt(Scalar(3)) * r / lengthscale;
    return signal_variance * (Scalar(1) + a) * exp(-a);
}

/// Cross-covariance between the rows of `a` (n x d) and the rows of `b` (m x d).
template <typename DerivedA, typename DerivedB>
auto kernel_matrix(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
                   const Hypers<typename DerivedA::Scalar>& h) {
    using Scalar = typename DerivedA::Scalar;
    Matrix<Scalar> k(a.rows(), b.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < b.rows(); ++j)
            k(i, j) = matern32<Scalar>((a.row(i) - b.row(j)).norm(), h.lengthscale, h.signal_variance);
    return k;
}

template <typename Scalar>
struct Prediction {
    Scalar mean;      ///< in the original target units
    Scalar variance;  ///< latent-function variance in standardized units (prior value: signal variance)
    bool floored;     ///< variance came out negative and was clamped to zero
};

/// Gaussian-process regression over points in the unit hypercube.
///
/// Targets are standardized to zero mean and unit (population) variance before
/// fitting; a zero-variance target set uses divisor 1. The Gram matrix K + sn2 I
/// is Cholesky-factorized once at fit time; on failure a diagonal jitter of 1e-10
/// is added and grown by 10x up to 1e-4 before giving up.
template <typename Scalar>
class GpModel {
public:
    static GpModel fit(const Matrix<Scalar>& x, const Vector<Scalar>& y, const Hypers<Scalar>& hypers) {
        using std::isfinite;
        using std::sqrt;
        if (x.rows() < 1) throw ModelError("gp fit needs at least one observation");
        if (x.rows() != y.size()) throw ModelError("gp fit: point and target counts differ");
        if (!(hypers.lengthscale > 0 && hypers.signal_variance > 0 && hypers.noise_variance > 0))
            throw ModelError("gp fit: hyperparameters must be positive");
        for (Eigen::Index i = 0; i < y.size(); ++i)
            if (!isfinite(y[i])) throw ModelError("gp fit: non-finite target");

        GpModel m;
        m.x_ = x;
        m.hypers_ = hypers;
        const auto n = static_cast<Scalar>(y.size());
        m.y_mean_ = y.mean();
        const Scalar var = (y.array() - m.y_mean_).square().sum() / n;
        m.y_scale_ = var > Scalar(0) ? sqrt(var) : Scalar(1);
        m.y_std_ = (y.array() - m.y_mean_) / m.y_scale_;

        Matrix<Scalar> gram = kernel_matrix(x, x, hypers);
        gram.diagonal().array() += hypers.noise_variance;
        m.llt_.compute(gram);
        Scalar jitter = Scalar(1e-10);
        while (m.llt_.info() != Eigen::Success) {
            if (jitter > Scalar(1e-4) * Scalar(1.0001))
                throw ModelError("gp fit: covariance not positive definite after jitter escalation");
            Matrix<Scalar> jittered = gram;
            jittered.diagonal().array() += jitter;
            m.llt_.compute(jittered);
            m.jitter_ = jitter;
            jitter *= Scalar(10);
        }
        m.alpha_ = m.llt_.solve(m.y_std_);
        return m;
    }

    template <typename Derived>
    Prediction<Scalar> predict(const Eigen::MatrixBase<Derived>& point) const {
        const Vector<Scalar> k_star = kernel_matrix(x_, point.transpose(), hypers_);
        const Scalar mean_std = k_star.dot(alpha_);
        const Vector<Scalar> v = llt_.matrixL().solve(k_star);
        Scalar variance = hypers_.signal_variance - v.squaredNorm();
        const bool floored = variance < Scalar(0);
        if (floored) variance = Scalar(0);
        return {y_mean_ + y_scale_ * mean_std, variance, floored};
    }

    /// log p(y_std | X) = -1/2 y^T (K + sn2 I)^-1 y - 1/2 log det(K + sn2 I) - n/2 log 2 pi.
    Scalar log_marginal_likelihood() const {
        using std::log;
        const Scalar n = static_cast<Scalar>(y_std_.size());
        const Scalar log_det = Scalar(2) * llt_.matrixLLT().diagonal().array().log().sum();
        return Scalar(-0.5) * y_std_.dot(alpha_) - Scalar(0.5) * log_det -
               Scalar(0.5) * n * log(Scalar(2) * std::numbers::pi_v<Scalar>);
    }

    /// Maps an original-units value to the standardized scale the model works in.
    Scalar standardize(Scalar y) const { return (y - y_mean_) / y_scale_; }

    const Hypers<Scalar>& hypers() const noexcept { return hypers_; }
    const Matrix<Scalar>& points() const noexcept { return x_; }
    Scalar y_mean() const noexcept { return y_mean_; }
    Scalar y_scale() const noexcept { return y_scale_; }
    Scalar jitter() const noexcept { return jitter_; }

private:
    GpModel() = default;

    Matrix<Scalar> x_;
    Vector<Scalar> y_std_;
    Vector<Scalar> alpha_;
    Eigen::LLT<Matrix<Scalar>> llt_;
    Hypers<Scalar> hypers_;
    Scalar y_mean_ = 0;
    Scalar y_scale_ = 1;
    Scalar jitter_ = 0;
};

inline constexpr std::array<double, 6> kLengthscaleGrid{0.05, 0.1, 0.2, 0.4, 0.8, 1.6};
inline constexpr std::array<double, 3> kSignalVarianceGrid{0.5, 1.0, 2.0};
inline constexpr std::array<double, 3> kNoiseVarianceGrid{1e-6, 1e-4, 1e-2};

/// Exhaustive grid search for the hyperparameters maximizing the log marginal
/// likelihood of the standardized targets. Grid points are visited in
/// lexicographic (lengthscale, signal, noise) order and only a strictly better
/// likelihood replaces the incumbent, so ties keep the smallest triple.
template <typename Scalar>
Hypers<Scalar> select_hypers(const Matrix<Scalar>& x, const Vector<Scalar>& y) {
    if (x.rows() < 2) throw ModelError("hyperparameter selection needs at least two observations");
    Hypers<Scalar> best{};
    Scalar best_lml = -std::numeric_limits<Scalar>::infinity();
    bool found = false;
    for (double l : kLengthscaleGrid)
        for (double sf2 : kSignalVarianceGrid)
            for (double sn2 : kNoiseVarianceGrid) {
                const Hypers<Scalar> h{Scalar(l), Scalar(sf2), Scalar(sn2)};
                Scalar lml;
                try {
                    lml = GpModel<Scalar>::fit(x, y, h).log_marginal_likelihood();
                } catch (const ModelError&) {
                    continue;
                }
                if (!found || lml > best_lml) {
                    best = h;
                    best_lml = lml;
                    found = true;
                }
            }
    if (!found) throw ModelError("no grid hyperparameters yield a positive-definite covariance");
    return best;
}

template <typename Scalar>
Scalar normal_pdf(Scalar z) {
    using std::exp;
    using std::sqrt;
    return exp(Scalar(-0.5) * z * z) / sqrt(Scalar(2) * std::numbers::pi_v<Scalar>);
}

template <typename Scalar>
Scalar normal_cdf(Scalar z) {
    using std::erfc;
    using std::sqrt;
    return Scalar(0.5) * erfc(-z / sqrt(Scalar(2)));
}

inline constexpr double kExplorationMargin = 0.01;

/// Expected improvement below `f_best` for a normal predictive N(mean, sigma^2), minimizing.
template <typename Scalar>
Scalar expected_improvement(Scalar mean, Scalar sigma, Scalar f_best, Scalar xi = Scalar(kExplorationMargin)) {
    const Scalar gain = f_best - mean - xi;
    if (sigma < Scalar(1e-12)) return gain > Scalar(0) ? gain : Scalar(0);
    const Scalar z = gain / sigma;
    const Scalar ei = gain * normal_cdf(z) + sigma * normal_pdf(z);
    return ei > Scalar(0) ? ei : Scalar(0);
}

/// EI of a fitted model at `point`, evaluated on the model's standardized scale:
/// `f_best` is given in original units and standardized with the model's transform.
template <typename Scalar, typename Derived>
Scalar expected_improvement(const GpModel<Scalar>& model, const Eigen::MatrixBase<Derived>& point, Scalar f_best) {
    using std::sqrt;
    const auto p = model.predict(point);
    return expected_improvement(model.standardize(p.mean), sqrt(p.variance), model.standardize(f_best));
}

}  // namespace autotune::gp
