#include "ggsp/grp.hpp"
#include "ggsp/csv.hpp"
#include "ggsp/errors.hpp"
#include "ggsp/rng.hpp"

#include <cmath>
#include <map>
#include <sstream>

namespace ggsp {

Jpsd::Jpsd(Eigen::MatrixXd v) : values(std::move(v)) {
    if (!values.allFinite()) throw NegativePsd("JPSD has non-finite entries");
    if ((values.array() < 0.0).any()) throw NegativePsd("JPSD has negative entries");
}

static void check_jpsd_dims(const Jpsd& jpsd, const JointBasis& b) {
    if (jpsd.values.rows() != b.n() || jpsd.values.cols() != b.d())
        throw DimensionMismatch("JPSD is " + std::to_string(jpsd.values.rows()) + "x" +
                                std::to_string(jpsd.values.cols()) + ", basis is " +
                                std::to_string(b.n()) + "x" + std::to_string(b.d()));
}

CovarianceOperator covariance_from_jpsd(const Jpsd& jpsd, const JointBasis& b) {
    check_jpsd_dims(jpsd, b);
    // C = U diag(vec p) U^T with U = Phi (x) Psi in the fixed vectorization
    Eigen::MatrixXd u = kronecker(b.graph_basis.eigenvectors, b.hilbert_basis.eigenvectors);
    Eigen::VectorXd p = vectorize(jpsd.values);
    return u * p.asDiagonal() * u.transpose();
}

std::vector<GeneralizedSignal> sample_grp(const GrpModel& model, int m, std::uint64_t seed) {
    check_jpsd_dims(model.jpsd, model.basis);
    const int n = model.basis.n();
    const int d = model.basis.d();
    if (model.mean.rows() != n || model.mean.cols() != d)
        throw DimensionMismatch("model mean has wrong shape");
    Eigen::MatrixXd sd = model.jpsd.values.cwiseSqrt();
    std::vector<GeneralizedSignal> out;
    out.reserve(static_cast<size_t>(std::max(0, m)));
    for (int i = 0; i < m; ++i) {
        Rng rng(split_seed(seed, static_cast<std::uint64_t>(i)));
        Eigen::MatrixXd z(n, d);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < d; ++c) z(r, c) = sd(r, c) * rng.gaussian();
        out.push_back(model.mean + ijft(z, model.basis));
    }
    return out;
}

static double commutator_norm(const Eigen::MatrixXd& c, const Eigen::MatrixXd& s) {
    double denom = std::max(1.0, c.norm() * s.norm());
    return (c * s - s * c).norm() / denom;
}

JwssCheck check_jwss(const CovarianceOperator& c, const JointBasis& b, double tol) {
    const Eigen::Index nd = static_cast<Eigen::Index>(b.n()) * b.d();
    if (c.rows() != nd || c.cols() != nd)
        throw DimensionMismatch("covariance operator must be nd x nd");
    Eigen::MatrixXd s =
        kronecker(b.graph_basis.reconstruct(), b.hilbert_basis.reconstruct());
    JwssCheck res;
    res.commutator_norm = commutator_norm(c, s);
    res.stationary = res.commutator_norm <= tol;
    return res;
}

DomainWssCheck check_vwss(const CovarianceOperator& c, const Eigen::MatrixXd& a_g, double tol) {
    const Eigen::Index n = a_g.rows();
    if (a_g.cols() != n) throw DimensionMismatch("A_g must be square");
    if (c.rows() != c.cols() || c.rows() % n != 0)
        throw DimensionMismatch("covariance size is not a multiple of the vertex count");
    const Eigen::Index d = c.rows() / n;
    DomainWssCheck res;
    Eigen::MatrixXd block(n, n);
    for (Eigen::Index t = 0; t < d; ++t) {
        for (Eigen::Index u = 0; u < n; ++u)
            for (Eigen::Index v = 0; v < n; ++v) block(u, v) = c(u * d + t, v * d + t);
        res.worst_norm = std::max(res.worst_norm, commutator_norm(block, a_g));
    }
    res.stationary = res.worst_norm <= tol;
    return res;
}

DomainWssCheck check_hwss(const CovarianceOperator& c, const Eigen::MatrixXd& a_h, double tol) {
    const Eigen::Index d = a_h.rows();
    if (a_h.cols() != d) throw DimensionMismatch("A_h must be square");
    if (c.rows() != c.cols() || c.rows() % d != 0)
        throw DimensionMismatch("covariance size is not a multiple of the Hilbert dimension");
    const Eigen::Index n = c.rows() / d;
    DomainWssCheck res;
    for (Eigen::Index m = 0; m < n; ++m) {
        Eigen::MatrixXd block = c.block(m * d, m * d, d, d);
        res.worst_norm = std::max(res.worst_norm, commutator_norm(block, a_h));
    }
    res.stationary = res.worst_norm <= tol;
    return res;
}

Moments estimate_moments(const std::vector<GeneralizedSignal>& samples) {
    if (samples.size() < 2) throw TooFewSamples("moment estimation needs at least 2 samples");
    const Eigen::Index n = samples.front().rows();
    const Eigen::Index d = samples.front().cols();
    Moments m;
    m.mean = Eigen::MatrixXd::Zero(n, d);
    for (const auto& x : samples) {
        if (x.rows() != n || x.cols() != d)
            throw DimensionMismatch("samples have inconsistent shapes");
        m.mean += x;
    }
    m.mean /= static_cast<double>(samples.size());
    m.cov = Eigen::MatrixXd::Zero(n * d, n * d);
    for (const auto& x : samples) {
        Eigen::VectorXd v = vectorize(x - m.mean);
        m.cov.noalias() += v * v.transpose();
    }
    m.cov /= static_cast<double>(samples.size()); // 1/m, matching the periodogram normalization
    return m;
}

std::string samples_to_csv(const std::vector<GeneralizedSignal>& samples) {
    std::ostringstream out;
    out << "sample,vertex,coord,value\n";
    for (size_t s = 0; s < samples.size(); ++s)
        for (Eigen::Index v = 0; v < samples[s].rows(); ++v)
            for (Eigen::Index c = 0; c < samples[s].cols(); ++c)
                out << s << ',' << v << ',' << c << ',' << format_double(samples[s](v, c))
                    << '\n';
    return out.str();
}

std::vector<GeneralizedSignal> samples_from_csv(std::istream& in) {
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    std::map<long, std::vector<std::tuple<long, long, double>>> cells;
    long max_v = -1, max_c = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        auto toks = split_csv_line(line);
        if (toks.size() != 4)
            throw ParseError("line " + std::to_string(line_no) + ": expected 4 columns");
        long s = parse_long(toks[0], line_no);
        long v = parse_long(toks[1], line_no);
        long c = parse_long(toks[2], line_no);
        double val = parse_double(toks[3], line_no);
        cells[s].emplace_back(v, c, val);
        max_v = std::max(max_v, v);
        max_c = std::max(max_c, c);
    }
    std::vector<GeneralizedSignal> out;
    for (auto& [s, entries] : cells) {
        Eigen::MatrixXd x = Eigen::MatrixXd::Zero(max_v + 1, max_c + 1);
        for (auto& [v, c, val] : entries) x(v, c) = val;
        out.push_back(std::move(x));
    }
    return out;
}

} // namespace ggsp
