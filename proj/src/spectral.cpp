#include "ggsp/spectral.hpp"
#include "ggsp/csv.hpp"
#include "ggsp/errors.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <iostream>
#include <sstream>

namespace ggsp {

Eigen::MatrixXd SpectralBasis::reconstruct() const {
    return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose();
}

void apply_sign_convention(Eigen::MatrixXd& vectors) {
    for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
        Eigen::Index imax = 0;
        double best = std::abs(vectors(0, c));
        for (Eigen::Index r = 1; r < vectors.rows(); ++r) {
            double v = std::abs(vectors(r, c));
            if (v > best) { // strict: lowest index wins ties
                best = v;
                imax = r;
            }
        }
        if (vectors(imax, c) < 0.0) vectors.col(c) = -vectors.col(c);
    }
}

static bool has_small_gap(const Eigen::VectorXd& values, double gap_tol) {
    if (values.size() < 2) return false;
    double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i + 1 < values.size(); ++i)
        if (values(i + 1) - values(i) < gap_tol * scale) return true;
    return false;
}

SpectralBasis eigendecompose(const Eigen::MatrixXd& a, double gap_tol) {
    if (a.rows() != a.cols()) throw NotSymmetric("matrix is not square");
    double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw NotSymmetric("matrix asymmetry exceeds 1e-10 relative");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (a + a.transpose()));
    if (solver.info() != Eigen::Success) throw Error("eigendecomposition failed to converge");
    SpectralBasis b;
    b.eigenvalues = solver.eigenvalues();
    b.eigenvectors = solver.eigenvectors();
    apply_sign_convention(b.eigenvectors);
    b.degenerate = has_small_gap(b.eigenvalues, gap_tol);
    if (b.degenerate)
        std::cerr << "ggsp: warning: (near-)degenerate spectrum, eigenbasis not identifiable\n";
    return b;
}

SpectralBasis fourier_basis_cycle(int t) {
    if (t < 3) throw InvalidSize("cycle harmonic basis needs T >= 3");
    SpectralBasis b;
    b.eigenvalues.resize(t);
    b.eigenvectors.resize(t, t);
    const double two_pi = 6.283185307179586476925287;
    int col = 0;
    b.eigenvalues(col) = 0.0;
    b.eigenvectors.col(col).setConstant(1.0 / std::sqrt(static_cast<double>(t)));
    ++col;
    for (int k = 1; 2 * k < t; ++k) {
        double lambda = 2.0 - 2.0 * std::cos(two_pi * k / t);
        double amp = std::sqrt(2.0 / t);
        for (int i = 0; i < t; ++i)
            b.eigenvectors(i, col) = amp * std::cos(two_pi * k * i / t);
        b.eigenvalues(col++) = lambda;
        for (int i = 0; i < t; ++i)
            b.eigenvectors(i, col) = amp * std::sin(two_pi * k * i / t);
        b.eigenvalues(col++) = lambda;
    }
    if (t % 2 == 0) {
        double amp = 1.0 / std::sqrt(static_cast<double>(t));
        for (int i = 0; i < t; ++i) b.eigenvectors(i, col) = (i % 2 == 0) ? amp : -amp;
        b.eigenvalues(col++) = 4.0;
    }
    apply_sign_convention(b.eigenvectors);
    b.degenerate = true; // cos/sin pairs share eigenvalues for every T >= 3
    return b;
}

SpectralBasis identity_basis(int d) {
    if (d < 1) throw InvalidSize("basis needs dimension >= 1");
    SpectralBasis b;
    b.eigenvalues = Eigen::VectorXd::Ones(d);
    b.eigenvectors = Eigen::MatrixXd::Identity(d, d);
    b.degenerate = d > 1;
    return b;
}

static void check_signal_dims(const Eigen::MatrixXd& x, const JointBasis& b, const char* what) {
    if (x.rows() != b.n() || x.cols() != b.d())
        throw DimensionMismatch(std::string(what) + ": got " + std::to_string(x.rows()) + "x" +
                                std::to_string(x.cols()) + ", basis is " + std::to_string(b.n()) +
                                "x" + std::to_string(b.d()));
}

Eigen::MatrixXd jft(const GeneralizedSignal& x, const JointBasis& b) {
    check_signal_dims(x, b, "jft");
    return b.graph_basis.eigenvectors.transpose() * x * b.hilbert_basis.eigenvectors;
}

GeneralizedSignal ijft(const Eigen::MatrixXd& coeffs, const JointBasis& b) {
    check_signal_dims(coeffs, b, "ijft");
    return b.graph_basis.eigenvectors * coeffs * b.hilbert_basis.eigenvectors.transpose();
}

GeneralizedSignal apply_convolution(const Eigen::MatrixXd& gains, const GeneralizedSignal& x,
                                    const JointBasis& b) {
    check_signal_dims(gains, b, "apply_convolution gains");
    check_signal_dims(x, b, "apply_convolution signal");
    return ijft(gains.cwiseProduct(jft(x, b)), b);
}

GeneralizedSignal apply_shift(const GeneralizedSignal& x, const JointBasis& b) {
    check_signal_dims(x, b, "apply_shift");
    Eigen::MatrixXd gains = b.graph_basis.eigenvalues * b.hilbert_basis.eigenvalues.transpose();
    return apply_convolution(gains, x, b);
}

Eigen::VectorXd vectorize(const Eigen::MatrixXd& x) {
    Eigen::VectorXd v(x.size());
    Eigen::Index idx = 0;
    for (Eigen::Index r = 0; r < x.rows(); ++r)
        for (Eigen::Index c = 0; c < x.cols(); ++c) v(idx++) = x(r, c);
    return v;
}

Eigen::MatrixXd unvectorize(const Eigen::VectorXd& v, int n, int d) {
    if (v.size() != static_cast<Eigen::Index>(n) * d)
        throw DimensionMismatch("unvectorize: size " + std::to_string(v.size()) +
                                " != " + std::to_string(n) + "*" + std::to_string(d));
    Eigen::MatrixXd x(n, d);
    Eigen::Index idx = 0;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < d; ++c) x(r, c) = v(idx++);
    return x;
}

Eigen::MatrixXd kronecker(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

std::string basis_to_csv(const SpectralBasis& b) {
    std::ostringstream out;
    Eigen::MatrixXd m(b.eigenvectors.rows() + 1, b.eigenvectors.cols());
    m.row(0) = b.eigenvalues.transpose();
    m.bottomRows(b.eigenvectors.rows()) = b.eigenvectors;
    write_matrix_csv(out, m);
    return out.str();
}

SpectralBasis basis_from_csv(std::istream& in) {
    Eigen::MatrixXd m = read_matrix_csv(in);
    if (m.rows() != m.cols() + 1)
        throw ParseError("basis CSV must have one more row than columns");
    SpectralBasis b;
    b.eigenvalues = m.row(0).transpose();
    b.eigenvectors = m.bottomRows(m.rows() - 1);
    return b;
}

} // namespace ggsp
