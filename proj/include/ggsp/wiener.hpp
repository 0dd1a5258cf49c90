#ifndef GGSP_WIENER_HPP
#define GGSP_WIENER_HPP

#include "ggsp/grp.hpp"

#include <vector>

namespace ggsp {

/// Entrywise observation mask over a signal grid; true = observed. The same
/// type also carries lane/time masks in the experiment pipelines (rows need
/// not be vertices).
struct ObservationMask {
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> observed;

    static ObservationMask all(Eigen::Index rows, Eigen::Index cols, bool value = true);
    /// Vertex-sampling mask: rows in `vertices` fully observed, others hidden.
    static ObservationMask from_vertices(int n, int d, const std::vector<int>& vertices);

    Eigen::Index rows() const { return observed.rows(); }
    Eigen::Index cols() const { return observed.cols(); }
    Eigen::Index count_observed() const { return observed.count(); }
    double hidden_fraction() const;
    /// Vectorized indices (row-major layout, as in vectorize()) of observed
    /// cells, ascending.
    std::vector<Eigen::Index> observed_indices() const;
};

/// Convolution Wiener filter for the additive-noise model: gains
/// p_X / (p_X + p_E) per joint frequency, in [0, 1].
struct DenoiseFilter {
    Eigen::MatrixXd gains;
    JointBasis basis;
};

DenoiseFilter denoise_filter(const Jpsd& p_x, const Jpsd& p_e, const JointBasis& b);

GeneralizedSignal denoise(const GeneralizedSignal& y, const DenoiseFilter& f);

/// Linear map from vectorized observations to vectorized estimates,
/// G = ((Pi (C_X + C_E) Pi)^+ Pi C_X)^T; annihilates the unobserved
/// subspace.
struct CompletionFilter {
    Eigen::MatrixXd op; // nd x nd
    ObservationMask mask;
};

CompletionFilter completion_filter(const CovarianceOperator& c_x, const CovarianceOperator& c_e,
                                   const ObservationMask& mask, double pinv_tol = 1e-10);

/// Advanced constructor for an arbitrary observation subspace given by a
/// dense orthogonal projector.
CompletionFilter completion_filter_projector(const CovarianceOperator& c_x,
                                             const CovarianceOperator& c_e,
                                             const Eigen::MatrixXd& projector,
                                             double pinv_tol = 1e-10);

/// Truncated filter: both sides pre-projected onto the span of the first m
/// Hilbert frequencies. Equals completion_filter at m = d.
CompletionFilter completion_approx(const CovarianceOperator& c_x, const CovarianceOperator& c_e,
                                   const ObservationMask& mask, const JointBasis& b, int m,
                                   double pinv_tol = 1e-10);

GeneralizedSignal complete(const GeneralizedSignal& y, const CompletionFilter& f);

/// Applies the completion filter without materializing the nd x nd operator:
/// solves on the observed-coordinate submatrix (Cholesky fast path, spectral
/// pseudoinverse fallback). Identical to complete() with the dense filter.
Eigen::VectorXd completion_estimate(const Eigen::VectorXd& y, const CovarianceOperator& c_x,
                                    const CovarianceOperator& c_e, const ObservationMask& mask,
                                    double pinv_tol = 1e-10);

/// Exact MSE of the completion Wiener filter when only the vertices in
/// `observed_vertices` are observed:
///   sum_{tau active} sum_k p_X(k,tau)
///     - sum_{tau active} tr((Phi_U Lambda_tau Phi_U^T)^{-1} Phi_U Gamma_tau Phi_U^T).
/// A column tau is active when p_X + p_E is positive for every k; columns
/// that are identically zero are skipped; mixed columns are rejected.
double mse_completion(const Jpsd& p_x, const Jpsd& p_e, const SpectralBasis& graph_basis,
                      const std::vector<int>& observed_vertices);

/// Linear conditional expectation of X given an observation y of Y, plus the
/// residual covariance (the ALCC). Brute-force reference route:
///   estimate = m_X + (C_Y^+ C_YX)^T (y - m_Y),
///   residual_cov = C_X - C_XY C_Y^+ C_YX.
struct LceResult {
    Eigen::VectorXd estimate;
    Eigen::MatrixXd residual_cov;
};

LceResult lce_oracle(const Eigen::MatrixXd& c_x, const Eigen::MatrixXd& c_y,
                     const Eigen::MatrixXd& c_xy, const Eigen::VectorXd& m_x,
                     const Eigen::VectorXd& m_y, const Eigen::VectorXd& y,
                     double pinv_tol = 1e-10);

/// Moore-Penrose pseudoinverse of a symmetric PSD matrix via its
/// eigendecomposition; eigenvalues below pinv_tol * lambda_max are dropped.
Eigen::MatrixXd pinv_psd(const Eigen::MatrixXd& m, double pinv_tol = 1e-10);

} // namespace ggsp

#endif // GGSP_WIENER_HPP
