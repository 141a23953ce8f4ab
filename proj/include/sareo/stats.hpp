#pragma once

#include "sareo/error.hpp"
#include "sareo/linalg.hpp"

#include <cmath>
#include <cstddef>
#include <vector>

namespace sareo {

struct GaussianStats {
    std::size_t n = 0;
    std::vector<double> mean;
    SquareMatrix cov;

    std::size_t dim() const { return mean.size(); }
};

// Single-pass mean/covariance accumulator (Welford update, Chan merge).
// Partial accumulators merge associatively, so any partitioning of a stream
// reproduces the batch statistics.
class StatsAccumulator {
public:
    StatsAccumulator() = default;
    explicit StatsAccumulator(std::size_t dim) : d_(dim), mean_(dim, 0.0), m2_(dim) {}

    std::size_t count() const { return n_; }
    std::size_t dim() const { return d_; }

    void add(const std::vector<double>& x) {
        if (d_ == 0 && n_ == 0) {
            d_ = x.size();
            mean_.assign(d_, 0.0);
            m2_ = SquareMatrix(d_);
        }
        require(x.size() == d_, Errc::DimensionMismatch, "feature dimension mismatch in accumulator");
        for (double xi : x)
            require(std::isfinite(xi), Errc::NotFiniteInput, "non-finite feature value");

        ++n_;
        std::vector<double> delta(d_), delta2(d_);
        for (std::size_t i = 0; i < d_; ++i) {
            delta[i] = x[i] - mean_[i];
            mean_[i] += delta[i] / static_cast<double>(n_);
            delta2[i] = x[i] - mean_[i];
        }
        for (std::size_t i = 0; i < d_; ++i)
            for (std::size_t j = 0; j < d_; ++j) m2_.at(i, j) += delta[i] * delta2[j];
    }

    void merge(const StatsAccumulator& other) {
        if (other.n_ == 0) return;
        if (n_ == 0) {
            *this = other;
            return;
        }
        require(d_ == other.d_, Errc::DimensionMismatch, "accumulator dimension mismatch in merge");
        const double na = static_cast<double>(n_), nb = static_cast<double>(other.n_);
        const double n = na + nb;
        std::vector<double> delta(d_);
        for (std::size_t i = 0; i < d_; ++i) delta[i] = other.mean_[i] - mean_[i];
        for (std::size_t i = 0; i < d_; ++i)
            for (std::size_t j = 0; j < d_; ++j)
                m2_.at(i, j) += other.m2_.at(i, j) + delta[i] * delta[j] * (na * nb / n);
        for (std::size_t i = 0; i < d_; ++i) mean_[i] += delta[i] * (nb / n);
        n_ += other.n_;
    }

    GaussianStats finalize() const {
        require(n_ >= 1, Errc::EmptyStream, "no samples accumulated");
        GaussianStats out;
        out.n = n_;
        out.mean = mean_;
        out.cov = SquareMatrix(d_);
        if (n_ >= 2) {
            const double div = static_cast<double>(n_ - 1);
            for (std::size_t i = 0; i < d_; ++i)
                for (std::size_t j = 0; j <= i; ++j) {
                    const double c = 0.5 * (m2_.at(i, j) + m2_.at(j, i)) / div;
                    out.cov.at(i, j) = c;
                    out.cov.at(j, i) = c;
                }
        }
        return out;
    }

private:
    std::size_t d_ = 0;
    std::size_t n_ = 0;
    std::vector<double> mean_;
    SquareMatrix m2_;
};

}  // namespace sareo
