#include "ggsp/wiener.hpp"
#include "ggsp/errors.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>

namespace ggsp {

ObservationMask ObservationMask::all(Eigen::Index rows, Eigen::Index cols, bool value) {
    ObservationMask m;
    m.observed = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(rows, cols, value);
    return m;
}

ObservationMask ObservationMask::from_vertices(int n, int d, const std::vector<int>& vertices) {
    ObservationMask m = all(n, d, false);
    for (int v : vertices) {
        if (v < 0 || v >= n) throw IndexOutOfRange("vertex " + std::to_string(v));
        m.observed.row(v).setConstant(true);
    }
    return m;
}

double ObservationMask::hidden_fraction() const {
    if (observed.size() == 0) return 0.0;
    return 1.0 - static_cast<double>(count_observed()) / static_cast<double>(observed.size());
}

std::vector<Eigen::Index> ObservationMask::observed_indices() const {
    std::vector<Eigen::Index> idx;
    idx.reserve(static_cast<size_t>(count_observed()));
    for (Eigen::Index r = 0; r < observed.rows(); ++r)
        for (Eigen::Index c = 0; c < observed.cols(); ++c)
            if (observed(r, c)) idx.push_back(r * observed.cols() + c);
    return idx;
}

DenoiseFilter denoise_filter(const Jpsd& p_x, const Jpsd& p_e, const JointBasis& b) {
    if (p_x.values.rows() != p_e.values.rows() || p_x.values.cols() != p_e.values.cols())
        throw DimensionMismatch("signal and noise JPSD shapes differ");
    if (p_x.values.rows() != b.n() || p_x.values.cols() != b.d())
        throw DimensionMismatch("JPSD shape does not match basis");
    DenoiseFilter f;
    f.basis = b;
    f.gains.resize(p_x.values.rows(), p_x.values.cols());
    for (Eigen::Index r = 0; r < f.gains.rows(); ++r) {
        for (Eigen::Index c = 0; c < f.gains.cols(); ++c) {
            double denom = p_x.values(r, c) + p_e.values(r, c);
            f.gains(r, c) = denom > 0.0 ? p_x.values(r, c) / denom : 0.0; // 0/0 -> 0
        }
    }
    return f;
}

GeneralizedSignal denoise(const GeneralizedSignal& y, const DenoiseFilter& f) {
    return apply_convolution(f.gains, y, f.basis);
}

Eigen::MatrixXd pinv_psd(const Eigen::MatrixXd& m, double pinv_tol) {
    if (m.rows() != m.cols()) throw DimensionMismatch("pinv_psd needs a square matrix");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
    if (es.info() != Eigen::Success) throw Error("pinv_psd: eigendecomposition failed");
    const Eigen::VectorXd& ev = es.eigenvalues();
    double cutoff = pinv_tol * std::max(ev.cwiseAbs().maxCoeff(), 0.0);
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev(i) > cutoff && ev(i) > 0.0) inv(i) = 1.0 / ev(i);
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

static void check_cov_pair(const CovarianceOperator& c_x, const CovarianceOperator& c_e,
                           Eigen::Index nd) {
    if (c_x.rows() != nd || c_x.cols() != nd || c_e.rows() != nd || c_e.cols() != nd)
        throw DimensionMismatch("covariance operators must match the mask size");
}

CompletionFilter completion_filter(const CovarianceOperator& c_x, const CovarianceOperator& c_e,
                                   const ObservationMask& mask, double pinv_tol) {
    const Eigen::Index nd = mask.rows() * mask.cols();
    check_cov_pair(c_x, c_e, nd);
    // Pi M Pi is zero outside the observed coordinates, so its pseudoinverse
    // is the embedded pseudoinverse of the observed submatrix.
    auto obs = mask.observed_indices();
    const Eigen::Index no = static_cast<Eigen::Index>(obs.size());
    CompletionFilter f;
    f.mask = mask;
    f.op = Eigen::MatrixXd::Zero(nd, nd);
    if (no == 0) return f;
    Eigen::MatrixXd m_oo(no, no);
    for (Eigen::Index a = 0; a < no; ++a)
        for (Eigen::Index b = 0; b < no; ++b)
            m_oo(a, b) = c_x(obs[a], obs[b]) + c_e(obs[a], obs[b]);
    Eigen::MatrixXd inv = pinv_psd(m_oo, pinv_tol);
    Eigen::MatrixXd cx_cols(nd, no); // C_X Pi restricted to observed columns
    for (Eigen::Index b = 0; b < no; ++b) cx_cols.col(b) = c_x.col(obs[b]);
    Eigen::MatrixXd gpart = cx_cols * inv; // nd x no
    for (Eigen::Index b = 0; b < no; ++b) f.op.col(obs[b]) = gpart.col(b);
    return f;
}

CompletionFilter completion_filter_projector(const CovarianceOperator& c_x,
                                             const CovarianceOperator& c_e,
                                             const Eigen::MatrixXd& projector, double pinv_tol) {
    const Eigen::Index nd = projector.rows();
    if (projector.cols() != nd) throw DimensionMismatch("projector must be square");
    check_cov_pair(c_x, c_e, nd);
    Eigen::MatrixXd c_y = projector * (c_x + c_e) * projector;
    CompletionFilter f;
    f.mask = ObservationMask::all(nd, 1, true); // descriptor unused on this path
    f.op = c_x * projector * pinv_psd(c_y, pinv_tol);
    return f;
}

CompletionFilter completion_approx(const CovarianceOperator& c_x, const CovarianceOperator& c_e,
                                   const ObservationMask& mask, const JointBasis& b, int m,
                                   double pinv_tol) {
    if (m < 1 || m > b.d())
        throw InvalidTruncation("truncation must be in [1, d], got " + std::to_string(m));
    const Eigen::Index nd = mask.rows() * mask.cols();
    check_cov_pair(c_x, c_e, nd);
    if (mask.rows() != b.n() || mask.cols() != b.d())
        throw DimensionMismatch("mask shape does not match basis");
    // Pi_{V^(m)} = I_n (x) (Psi_m Psi_m^T), the projector onto the first m
    // Hilbert frequencies over every vertex
    Eigen::MatrixXd psi_m = b.hilbert_basis.eigenvectors.leftCols(m);
    Eigen::MatrixXd proj =
        kronecker(Eigen::MatrixXd::Identity(b.n(), b.n()), psi_m * psi_m.transpose());
    Eigen::MatrixXd pi_a = Eigen::MatrixXd::Zero(nd, nd);
    for (Eigen::Index i : mask.observed_indices()) pi_a(i, i) = 1.0;
    Eigen::MatrixXd inner = proj * pi_a * (c_x + c_e) * pi_a * proj;
    CompletionFilter f;
    f.mask = mask;
    f.op = (pinv_psd(inner, pinv_tol) * proj * pi_a * c_x).transpose();
    return f;
}

GeneralizedSignal complete(const GeneralizedSignal& y, const CompletionFilter& f) {
    if (y.rows() != f.mask.rows() || y.cols() != f.mask.cols())
        throw DimensionMismatch("signal shape does not match the filter mask");
    return unvectorize(f.op * vectorize(y), static_cast<int>(y.rows()),
                       static_cast<int>(y.cols()));
}

Eigen::VectorXd completion_estimate(const Eigen::VectorXd& y, const CovarianceOperator& c_x,
                                    const CovarianceOperator& c_e, const ObservationMask& mask,
                                    double pinv_tol) {
    const Eigen::Index nd = mask.rows() * mask.cols();
    check_cov_pair(c_x, c_e, nd);
    if (y.size() != nd) throw DimensionMismatch("observation length does not match mask");
    auto obs = mask.observed_indices();
    const Eigen::Index no = static_cast<Eigen::Index>(obs.size());
    if (no == 0) return Eigen::VectorXd::Zero(nd);
    Eigen::MatrixXd m_oo(no, no);
    Eigen::VectorXd y_o(no);
    for (Eigen::Index a = 0; a < no; ++a) {
        y_o(a) = y(obs[a]);
        for (Eigen::Index b = 0; b < no; ++b)
            m_oo(a, b) = c_x(obs[a], obs[b]) + c_e(obs[a], obs[b]);
    }
    Eigen::VectorXd z;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(m_oo);
    bool ok = ldlt.info() == Eigen::Success;
    if (ok) {
        z = ldlt.solve(y_o);
        // the fast path is only trusted when it actually solved the system
        double scale = std::max(1.0, y_o.norm());
        ok = z.allFinite() && (m_oo * z - y_o).norm() <= 1e-8 * scale;
    }
    if (!ok) z = pinv_psd(m_oo, pinv_tol) * y_o;
    Eigen::MatrixXd cx_cols(nd, no);
    for (Eigen::Index b = 0; b < no; ++b) cx_cols.col(b) = c_x.col(obs[b]);
    return cx_cols * z;
}

double mse_completion(const Jpsd& p_x, const Jpsd& p_e, const SpectralBasis& graph_basis,
                      const std::vector<int>& observed_vertices) {
    const Eigen::Index n = p_x.values.rows();
    const Eigen::Index d = p_x.values.cols();
    if (p_e.values.rows() != n || p_e.values.cols() != d)
        throw DimensionMismatch("signal and noise JPSD shapes differ");
    if (graph_basis.dim() != n) throw DimensionMismatch("graph basis dimension mismatch");
    std::set<int> uniq;
    for (int v : observed_vertices) {
        if (v < 0 || v >= n) throw IndexOutOfRange("vertex " + std::to_string(v));
        uniq.insert(v);
    }
    const Eigen::Index nu = static_cast<Eigen::Index>(uniq.size());
    Eigen::MatrixXd phi_u(nu, n);
    {
        Eigen::Index r = 0;
        for (int v : uniq) phi_u.row(r++) = graph_basis.eigenvectors.row(v);
    }
    double mse = 0.0;
    for (Eigen::Index tau = 0; tau < d; ++tau) {
        Eigen::VectorXd lambda = p_x.values.col(tau) + p_e.values.col(tau);
        const bool all_zero = (lambda.array() == 0.0).all();
        const bool all_pos = (lambda.array() > 0.0).all();
        if (all_zero) continue;
        if (!all_pos)
            throw PsdStructureViolation("column " + std::to_string(tau) +
                                        " mixes zero and positive PSD values");
        mse += p_x.values.col(tau).sum();
        if (nu == 0) continue;
        Eigen::MatrixXd gram = phi_u * lambda.asDiagonal() * phi_u.transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <=
                                               1e-12 * std::max(es.eigenvalues().maxCoeff(), 0.0))
            throw SingularObservationGram("observation Gram matrix is singular at column " +
                                          std::to_string(tau));
        Eigen::VectorXd gamma = p_x.values.col(tau).array().square();
        Eigen::MatrixXd target = phi_u * gamma.asDiagonal() * phi_u.transpose();
        Eigen::MatrixXd solved = es.eigenvectors() *
                                 es.eigenvalues().cwiseInverse().asDiagonal() *
                                 es.eigenvectors().transpose() * target;
        mse -= solved.trace();
    }
    return mse;
}

LceResult lce_oracle(const Eigen::MatrixXd& c_x, const Eigen::MatrixXd& c_y,
                     const Eigen::MatrixXd& c_xy, const Eigen::VectorXd& m_x,
                     const Eigen::VectorXd& m_y, const Eigen::VectorXd& y, double pinv_tol) {
    const Eigen::Index nx = c_x.rows();
    const Eigen::Index ny = c_y.rows();
    if (c_x.cols() != nx || c_y.cols() != ny || c_xy.rows() != nx || c_xy.cols() != ny ||
        m_x.size() != nx || m_y.size() != ny || y.size() != ny)
        throw DimensionMismatch("lce_oracle operand shapes are inconsistent");
    Eigen::MatrixXd cy_pinv = pinv_psd(c_y, pinv_tol);
    LceResult r;
    r.estimate = m_x + c_xy * cy_pinv * (y - m_y);
    r.residual_cov = c_x - c_xy * cy_pinv * c_xy.transpose();
    return r;
}

} // namespace ggsp
