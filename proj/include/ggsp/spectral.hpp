#ifndef GGSP_SPECTRAL_HPP
#define GGSP_SPECTRAL_HPP

#include <Eigen/Core>
#include <iosfwd>
#include <string>

namespace ggsp {

/// A generalized signal in matrix form: rows index vertices, columns index
/// Hilbert-space coordinates.
using GeneralizedSignal = Eigen::MatrixXd;

/// Orthonormal eigenbasis of a symmetric operator, eigenvalues ascending.
/// Deterministic sign convention: within each column the entry of largest
/// absolute value (lowest index on ties) is positive.
struct SpectralBasis {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors; // columns paired with eigenvalues
    bool degenerate = false;

    int dim() const { return static_cast<int>(eigenvalues.size()); }

    /// Reconstructs the operator V diag(lambda) V^T.
    Eigen::MatrixXd reconstruct() const;
};

/// Eigenbases of the two shift factors; the joint basis is their tensor
/// product phi_k (x) psi_tau.
struct JointBasis {
    SpectralBasis graph_basis;  // n-dimensional
    SpectralBasis hilbert_basis; // d-dimensional

    int n() const { return graph_basis.dim(); }
    int d() const { return hilbert_basis.dim(); }
};

/// Flips eigenvector signs in place to satisfy the canonical convention.
void apply_sign_convention(Eigen::MatrixXd& vectors);

/// Full symmetric eigendecomposition. Sets `degenerate` (and warns on
/// stderr) when an adjacent eigenvalue gap falls below
/// gap_tol * max(1, |lambda|_max).
SpectralBasis eigendecompose(const Eigen::MatrixXd& a, double gap_tol = 1e-8);

/// Real harmonic eigenbasis of the undirected T-cycle Laplacian: constant,
/// canonical cos/sin pairs, alternating vector for even T. Eigenvalues
/// 2 - 2 cos(2 pi k / T).
SpectralBasis fourier_basis_cycle(int t);

/// Identity eigenvectors with unit eigenvalues; the Hilbert basis used when
/// coordinates are processed independently.
SpectralBasis identity_basis(int d);

// Transforms -----------------------------------------------------------------

/// Joint Fourier transform: C(k, tau) = <x, phi_k (x) psi_tau>, i.e.
/// Phi^T X Psi for real bases.
Eigen::MatrixXd jft(const GeneralizedSignal& x, const JointBasis& b);

/// Inverse transform: X = Phi C Psi^T.
GeneralizedSignal ijft(const Eigen::MatrixXd& coeffs, const JointBasis& b);

/// Convolution filter: pointwise multiplication by g in the joint frequency
/// domain.
GeneralizedSignal apply_convolution(const Eigen::MatrixXd& gains, const GeneralizedSignal& x,
                                    const JointBasis& b);

/// Joint shift A_g (x) A_h, applied spectrally (gains lambda_k * nu_tau).
GeneralizedSignal apply_shift(const GeneralizedSignal& x, const JointBasis& b);

// Vectorization ---------------------------------------------------------------

/// Fixed vectorization: entry (v, t) of the signal grid maps to index
/// v * d + t. Joint operators (Kronecker products with the graph factor
/// first) act on this layout.
Eigen::VectorXd vectorize(const Eigen::MatrixXd& x);
Eigen::MatrixXd unvectorize(const Eigen::VectorXd& v, int n, int d);

Eigen::MatrixXd kronecker(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// Serialization ---------------------------------------------------------------

/// CSV with one column per eigenvector; the first row holds eigenvalues.
std::string basis_to_csv(const SpectralBasis& b);
SpectralBasis basis_from_csv(std::istream& in);

} // namespace ggsp

#endif // GGSP_SPECTRAL_HPP
