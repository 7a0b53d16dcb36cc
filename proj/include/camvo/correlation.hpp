#pragma once

// Online pairwise correlation of arm rewards and correlated binary sampling
// through a Gaussian copula.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "camvo/core.hpp"
#include "camvo/rng.hpp"
#include "camvo/special.hpp"

namespace camvo {

using BinaryMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Running univariate and pairwise reward statistics for K arms.
///
/// Pairwise deviation products use the post-update means of both arms. This
/// differs from the textbook co-moment update by a small-sample bias.
class CorrelationState {
  public:
    explicit CorrelationState(std::size_t arm_count = 0)
        : n_(arm_count, 0),
          mean_(arm_count, 0.0),
          sigma_(arm_count, 0.0),
          M_(Eigen::MatrixXd::Zero(arm_count, arm_count)),
          N_(Eigen::MatrixXi::Zero(arm_count, arm_count)),
          C_(Eigen::MatrixXd::Identity(arm_count, arm_count)) {}

    std::size_t arm_count() const { return n_.size(); }

    /// rewards is indexed by arm id; only entries listed in `selected` are read.
    void update(std::span<const int> rewards, std::span<const std::size_t> selected) {
        for (auto i : selected) {
            const double r = rewards[i];
            const double old_mean = mean_[i];
            ++n_[i];
            const double delta = r - old_mean;
            mean_[i] = old_mean + delta / static_cast<double>(n_[i]);
            M_(i, i) += (r - mean_[i]) * (r - old_mean);
            sigma_[i] = n_[i] > 1 ? std::sqrt(M_(i, i) / static_cast<double>(n_[i] - 1)) : 0.0;
        }
        for (std::size_t a = 0; a < selected.size(); ++a) {
            for (std::size_t b = a + 1; b < selected.size(); ++b) {
                const auto i = selected[a];
                const auto j = selected[b];
                const double di = rewards[i] - mean_[i];
                const double dj = rewards[j] - mean_[j];
                M_(i, j) += di * dj;
                M_(j, i) = M_(i, j);
                N_(i, j) += 1;
                N_(j, i) = N_(i, j);
                if (N_(i, j) > 1 && sigma_[i] > 0.0 && sigma_[j] > 0.0) {
                    const double cov = M_(i, j) / static_cast<double>(N_(i, j) - 1);
                    const double rho = std::clamp(cov / (sigma_[i] * sigma_[j]), -1.0, 1.0);
                    C_(i, j) = rho;
                    C_(j, i) = rho;
                }
            }
        }
    }

    const Eigen::MatrixXd& correlation() const { return C_; }
    const Eigen::MatrixXd& deviation_products() const { return M_; }
    const Eigen::MatrixXi& co_counts() const { return N_; }
    std::int64_t count(std::size_t i) const { return n_[i]; }
    double mean(std::size_t i) const { return mean_[i]; }
    double stddev(std::size_t i) const { return sigma_[i]; }

  private:
    std::vector<std::int64_t> n_;
    std::vector<double> mean_;
    std::vector<double> sigma_;
    Eigen::MatrixXd M_;
    Eigen::MatrixXi N_;
    Eigen::MatrixXd C_;
};

inline constexpr double kEigenFloor = 1e-10;

/// Eigenvalue clipping to a positive semidefinite matrix, rescaled to unit diagonal.
inline Eigen::MatrixXd make_psd(const Eigen::MatrixXd& estimate) {
    if (estimate.rows() != estimate.cols()) throw Error("make_psd: matrix is not square");
    if (!estimate.allFinite()) throw Error("make_psd: non-finite entries");
    const Eigen::MatrixXd sym = 0.5 * (estimate + estimate.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    if (eig.info() != Eigen::Success) throw Error("make_psd: eigendecomposition failed");
    const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(kEigenFloor);
    Eigen::MatrixXd out = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
    const Eigen::VectorXd inv_sqrt = out.diagonal().cwiseSqrt().cwiseInverse();
    out = inv_sqrt.asDiagonal() * out * inv_sqrt.asDiagonal();
    out = (0.5 * (out + out.transpose())).eval();
    out.diagonal().setOnes();
    return out.cwiseMax(-1.0).cwiseMin(1.0);
}

/// Square-root factor F with F F' = C: Cholesky, or the eigen factor when C is singular.
inline Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& C) {
    Eigen::LLT<Eigen::MatrixXd> llt(C);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
    if (eig.info() != Eigen::Success) throw Error("covariance_factor: eigendecomposition failed");
    return eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

/// Fills `out` (n x K) with draws from N(0, F F').
inline void sample_normals(Engine& rng, const Eigen::MatrixXd& factor, std::size_t n,
                           Eigen::MatrixXd& out) {
    const auto K = factor.rows();
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd g(static_cast<Eigen::Index>(n), K);
    for (Eigen::Index r = 0; r < g.rows(); ++r)
        for (Eigen::Index c = 0; c < K; ++c) g(r, c) = gauss(rng);
    out = g * factor.transpose();
}

/// n x K correctness draws: Z ~ N(0, make_psd(C)), U = Phi(Z), X = 1{U < mu}.
inline BinaryMatrix sample_correlated_binary(std::size_t n, std::span<const double> mu,
                                             const Eigen::MatrixXd& C, std::uint64_t seed) {
    const auto K = static_cast<Eigen::Index>(mu.size());
    if (C.rows() != K || C.cols() != K) throw Error("sample_correlated_binary: shape mismatch");
    const Eigen::MatrixXd factor = covariance_factor(make_psd(C));
    // U < mu  <=>  Z < Phi^-1(mu), since Phi is strictly increasing
    std::vector<double> cut(mu.size());
    for (std::size_t j = 0; j < mu.size(); ++j) {
        if (!(mu[j] >= 0.0 && mu[j] <= 1.0))
            throw Error("sample_correlated_binary: marginal outside [0,1]");
        cut[j] = special::normal_quantile(mu[j]);
    }
    Engine rng = make_engine(seed);
    Eigen::MatrixXd z;
    sample_normals(rng, factor, n, z);
    BinaryMatrix x(static_cast<Eigen::Index>(n), K);
    for (Eigen::Index r = 0; r < z.rows(); ++r)
        for (Eigen::Index c = 0; c < K; ++c)
            x(r, c) = z(r, c) < cut[static_cast<std::size_t>(c)] ? 1 : 0;
    return x;
}

}  // namespace camvo
