#ifndef GGSP_ESTIMATION_HPP
#define GGSP_ESTIMATION_HPP

#include "ggsp/grp.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace ggsp {

// Spectral estimation -----------------------------------------------------------

/// Raw periodogram: p_hat(k,tau) = (1/m) sum_i |jft(x_i)(k,tau)|^2.
Jpsd jpsd_periodogram(const std::vector<GeneralizedSignal>& samples, const JointBasis& b);

/// Pools every vertex row of every sample and eigendecomposes their d x d
/// sample covariance (1/count normalization, mean-centered). The result is
/// the data-driven Hilbert basis Psi_hat.
SpectralBasis learn_hilbert_basis(const std::vector<GeneralizedSignal>& samples);

/// Per-feature graph periodogram: identical to jpsd_periodogram with the
/// identity Hilbert basis.
Jpsd gsp_periodogram_per_feature(const std::vector<GeneralizedSignal>& samples,
                                 const SpectralBasis& graph_basis);

// Continuous-time regression -----------------------------------------------------

/// Sample time instants per vertex, all within [-pi, pi].
struct SamplePlan {
    std::vector<std::vector<double>> times; // times[v] = instants observed at vertex v

    int total_count() const;
};

/// Trigonometric dictionary truncation: harmonics tau = 1..m0.
struct ContinuousTrigSpec {
    int m0 = 20;
};

/// Design matrix for the graph-coupled dictionary
/// { phi_k (x) sin(tau t), phi_k (x) cos(tau t) : tau = 1..m0 }.
/// Rows are vertex-major then time. Columns: all sin entries first then all
/// cos entries, each ordered k-major, tau-minor (column of (k,tau,sin) is
/// k*m0 + tau - 1; cos adds an n*m0 offset).
Eigen::MatrixXd design_matrix(const SamplePlan& plan, const SpectralBasis& graph_basis,
                              const ContinuousTrigSpec& spec);

/// Per-vertex time-stationary dictionary { sin(tau t) : tau = 1..m0 } then
/// { cos(tau t) : tau = 0..m0 } (constant included).
Eigen::MatrixXd design_matrix_ts(const std::vector<double>& times, int m0);

/// Evaluates dictionary coefficients at arbitrary query times; returns a
/// vertices x times grid.
Eigen::MatrixXd recover_continuous(const Eigen::VectorXd& coeffs,
                                   const SpectralBasis& graph_basis,
                                   const ContinuousTrigSpec& spec,
                                   const std::vector<double>& query_times);

Eigen::VectorXd recover_continuous_ts(const Eigen::VectorXd& coeffs, int m0,
                                      const std::vector<double>& query_times);

// Variational EM ------------------------------------------------------------------

struct VemOptions {
    int max_iter = 500;
    double tol = 1e-6;      // relative parameter change
    double p_floor = 1e-12; // lower clamp for per-coefficient variances
};

struct VemResult {
    Eigen::VectorXd p;              // per-coefficient variances
    double sigma2 = 0.0;            // noise variance
    Eigen::MatrixXd posterior_mean; // s x m (one column per observation vector)
    Eigen::MatrixXd posterior_cov;  // s x s, shared across columns
    bool converged = false;
    int iterations = 0;
    std::vector<double> evidence; // log evidence after each iteration
};

/// Evidence-maximization EM for y = B c + e with c_i ~ N(0, p_i) and
/// e ~ N(0, sigma2 I): exact Gaussian E-step, closed-form M-step
/// (p_i <- mu_i^2 + Sigma_ii, sigma2 <- (|y - B mu|^2 + tr(B Sigma B^T)) / N),
/// both clamped from below, which keeps the evidence nondecreasing.
VemResult variational_em(const Eigen::MatrixXd& b, const Eigen::VectorXd& y,
                         const VemOptions& opts = {});

/// Same model with several observation vectors sharing the design matrix
/// and the hyperparameters (columns of y_set are independent signals).
VemResult variational_em_pooled(const Eigen::MatrixXd& b, const Eigen::MatrixXd& y_set,
                                const VemOptions& opts = {});

// Serialization --------------------------------------------------------------------

/// CSV with header `vertex,t,value`; plan plus stacked observations
/// (vertex-major then time, matching design_matrix rows).
struct PlannedSamples {
    SamplePlan plan;
    Eigen::VectorXd values;
};

std::string planned_samples_to_csv(const PlannedSamples& ps);
PlannedSamples planned_samples_from_csv(std::istream& in);

/// JSON document {p, sigma2, converged, iterations}.
std::string vem_result_to_json(const VemResult& r);

} // namespace ggsp

#endif // GGSP_ESTIMATION_HPP
