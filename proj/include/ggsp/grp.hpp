#ifndef GGSP_GRP_HPP
#define GGSP_GRP_HPP

#include "ggsp/spectral.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ggsp {

/// Joint power spectral density: nonnegative grid p(k, tau) indexed like a
/// coefficient grid (rows = graph frequencies, columns = Hilbert
/// frequencies).
struct Jpsd {
    Eigen::MatrixXd values;

    Jpsd() = default;
    explicit Jpsd(Eigen::MatrixXd v); // validates nonnegativity and finiteness
};

/// Covariance of the vectorized signal (layout as in vectorize()): an
/// nd x nd symmetric PSD matrix.
using CovarianceOperator = Eigen::MatrixXd;

/// A Gaussian JWSS process: joint eigenbasis, JPSD and mean signal.
struct GrpModel {
    JointBasis basis;
    Jpsd jpsd;
    GeneralizedSignal mean;
};

/// C = sum_{k,tau} p(k,tau) (phi_k (x) psi_tau)(phi_k (x) psi_tau)^T.
CovarianceOperator covariance_from_jpsd(const Jpsd& jpsd, const JointBasis& b);

/// Draws m independent realizations: mean + ijft(Z) with independent
/// Gaussian coefficients Z(k,tau) of variance p(k,tau). Each sample uses its
/// own stream derived from (seed, index), so output is identical however the
/// batch is partitioned.
std::vector<GeneralizedSignal> sample_grp(const GrpModel& model, int m, std::uint64_t seed);

struct JwssCheck {
    bool stationary = false;
    double commutator_norm = 0.0;
};

struct DomainWssCheck {
    bool stationary = false;
    double worst_norm = 0.0;
};

/// Tests C S = S C for the joint shift S = A_g (x) A_h (reconstructed from
/// the basis). The norm is ||CS - SC||_F / max(1, ||C||_F ||S||_F).
JwssCheck check_jwss(const CovarianceOperator& c, const JointBasis& b, double tol);

/// Vertex-domain stationarity: every diagonal-in-coordinate block K(t,t)
/// must commute with A_g. Reports the worst normalized commutator norm.
DomainWssCheck check_vwss(const CovarianceOperator& c, const Eigen::MatrixXd& a_g, double tol);

/// Hilbert-domain stationarity: every per-vertex block must commute with
/// A_h.
DomainWssCheck check_hwss(const CovarianceOperator& c, const Eigen::MatrixXd& a_h, double tol);

struct Moments {
    GeneralizedSignal mean;
    CovarianceOperator cov;
};

/// Sample mean and 1/m-normalized sample covariance of the vectorized
/// signals.
Moments estimate_moments(const std::vector<GeneralizedSignal>& samples);

// Serialization ----------------------------------------------------------------

/// Long CSV format with header `sample,vertex,coord,value`.
std::string samples_to_csv(const std::vector<GeneralizedSignal>& samples);
std::vector<GeneralizedSignal> samples_from_csv(std::istream& in);

} // namespace ggsp

#endif // GGSP_GRP_HPP
