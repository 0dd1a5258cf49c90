#include "ggsp/estimation.hpp"
#include "ggsp/csv.hpp"
#include "ggsp/errors.hpp"

#include <json.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

namespace ggsp {

Jpsd jpsd_periodogram(const std::vector<GeneralizedSignal>& samples, const JointBasis& b) {
    if (samples.empty()) throw EmptySampleSet("periodogram needs at least one sample");
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(b.n(), b.d());
    for (const auto& x : samples) acc += jft(x, b).array().square().matrix();
    return Jpsd(acc / static_cast<double>(samples.size()));
}

SpectralBasis learn_hilbert_basis(const std::vector<GeneralizedSignal>& samples) {
    if (samples.size() < 2) throw TooFewSamples("basis learning needs at least 2 samples");
    const Eigen::Index n = samples.front().rows();
    const Eigen::Index d = samples.front().cols();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (const auto& x : samples) {
        if (x.rows() != n || x.cols() != d)
            throw DimensionMismatch("samples have inconsistent shapes");
        if (!x.allFinite()) throw MissingValues("basis learning requires complete samples");
        mean += x.colwise().sum().transpose();
    }
    const double count = static_cast<double>(samples.size()) * static_cast<double>(n);
    mean /= count;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (const auto& x : samples) {
        Eigen::MatrixXd centered = x.rowwise() - mean.transpose();
        cov.noalias() += centered.transpose() * centered;
    }
    cov /= count;
    return eigendecompose(cov);
}

Jpsd gsp_periodogram_per_feature(const std::vector<GeneralizedSignal>& samples,
                                 const SpectralBasis& graph_basis) {
    if (samples.empty()) throw EmptySampleSet("periodogram needs at least one sample");
    Eigen::MatrixXd acc =
        Eigen::MatrixXd::Zero(graph_basis.dim(), samples.front().cols());
    for (const auto& x : samples) {
        if (x.rows() != graph_basis.dim() || x.cols() != acc.cols())
            throw DimensionMismatch("sample shape does not match the graph basis");
        acc += (graph_basis.eigenvectors.transpose() * x).array().square().matrix();
    }
    return Jpsd(acc / static_cast<double>(samples.size()));
}

int SamplePlan::total_count() const {
    int total = 0;
    for (const auto& v : times) total += static_cast<int>(v.size());
    return total;
}

static void check_plan(const SamplePlan& plan) {
    const double bound = 3.14159265358979323846 + 1e-12;
    int total = 0;
    for (const auto& ts : plan.times) {
        total += static_cast<int>(ts.size());
        for (double t : ts)
            if (!(std::abs(t) <= bound))
                throw InvalidSpec("sample time " + std::to_string(t) + " outside [-pi, pi]");
    }
    if (total == 0) throw EmptyPlan("sample plan has no points");
}

Eigen::MatrixXd design_matrix(const SamplePlan& plan, const SpectralBasis& graph_basis,
                              const ContinuousTrigSpec& spec) {
    check_plan(plan);
    const int n = graph_basis.dim();
    if (static_cast<int>(plan.times.size()) != n)
        throw DimensionMismatch("plan has " + std::to_string(plan.times.size()) +
                                " vertices, basis has " + std::to_string(n));
    const int m0 = spec.m0;
    if (m0 < 1) throw InvalidSpec("m0 must be >= 1");
    const int rows = plan.total_count();
    Eigen::MatrixXd b(rows, 2 * n * m0);
    int row = 0;
    for (int v = 0; v < n; ++v) {
        for (double t : plan.times[static_cast<size_t>(v)]) {
            for (int k = 0; k < n; ++k) {
                double phi = graph_basis.eigenvectors(v, k);
                for (int tau = 1; tau <= m0; ++tau) {
                    b(row, k * m0 + tau - 1) = phi * std::sin(tau * t);
                    b(row, n * m0 + k * m0 + tau - 1) = phi * std::cos(tau * t);
                }
            }
            ++row;
        }
    }
    return b;
}

Eigen::MatrixXd design_matrix_ts(const std::vector<double>& times, int m0) {
    if (times.empty()) throw EmptyPlan("sample plan has no points");
    if (m0 < 1) throw InvalidSpec("m0 must be >= 1");
    Eigen::MatrixXd b(static_cast<Eigen::Index>(times.size()), 2 * m0 + 1);
    for (Eigen::Index r = 0; r < b.rows(); ++r) {
        double t = times[static_cast<size_t>(r)];
        for (int tau = 1; tau <= m0; ++tau) b(r, tau - 1) = std::sin(tau * t);
        for (int tau = 0; tau <= m0; ++tau) b(r, m0 + tau) = std::cos(tau * t);
    }
    return b;
}

Eigen::MatrixXd recover_continuous(const Eigen::VectorXd& coeffs,
                                   const SpectralBasis& graph_basis,
                                   const ContinuousTrigSpec& spec,
                                   const std::vector<double>& query_times) {
    const int n = graph_basis.dim();
    const int m0 = spec.m0;
    if (coeffs.size() != 2 * static_cast<Eigen::Index>(n) * m0)
        throw DimensionMismatch("coefficient length does not match the dictionary");
    const Eigen::Index q = static_cast<Eigen::Index>(query_times.size());
    // coefficient grids over (k, tau)
    Eigen::MatrixXd c_sin(n, m0), c_cos(n, m0);
    for (int k = 0; k < n; ++k)
        for (int tau = 1; tau <= m0; ++tau) {
            c_sin(k, tau - 1) = coeffs(k * m0 + tau - 1);
            c_cos(k, tau - 1) = coeffs(n * m0 + k * m0 + tau - 1);
        }
    Eigen::MatrixXd s(m0, q), c(m0, q);
    for (Eigen::Index j = 0; j < q; ++j)
        for (int tau = 1; tau <= m0; ++tau) {
            s(tau - 1, j) = std::sin(tau * query_times[static_cast<size_t>(j)]);
            c(tau - 1, j) = std::cos(tau * query_times[static_cast<size_t>(j)]);
        }
    return graph_basis.eigenvectors * (c_sin * s + c_cos * c);
}

Eigen::VectorXd recover_continuous_ts(const Eigen::VectorXd& coeffs, int m0,
                                      const std::vector<double>& query_times) {
    if (coeffs.size() != 2 * static_cast<Eigen::Index>(m0) + 1)
        throw DimensionMismatch("coefficient length does not match the dictionary");
    Eigen::VectorXd out(static_cast<Eigen::Index>(query_times.size()));
    for (Eigen::Index j = 0; j < out.size(); ++j) {
        double t = query_times[static_cast<size_t>(j)];
        double acc = 0.0;
        for (int tau = 1; tau <= m0; ++tau) acc += coeffs(tau - 1) * std::sin(tau * t);
        for (int tau = 0; tau <= m0; ++tau) acc += coeffs(m0 + tau) * std::cos(tau * t);
        out(j) = acc;
    }
    return out;
}

VemResult variational_em_pooled(const Eigen::MatrixXd& b, const Eigen::MatrixXd& y_set,
                                const VemOptions& opts) {
    if (!b.allFinite() || !y_set.allFinite())
        throw NonFiniteInput("design matrix or observations contain non-finite values");
    const Eigen::Index big_n = b.rows();
    const Eigen::Index s = b.cols();
    const Eigen::Index m = y_set.cols();
    if (big_n < 1 || s < 1 || m < 1 || y_set.rows() != big_n)
        throw DimensionMismatch("variational EM received empty or mismatched inputs");

    const double nm = static_cast<double>(big_n);
    const double md = static_cast<double>(m);
    const double y_scale = y_set.squaredNorm() / static_cast<double>(y_set.size());
    const double sigma_floor = 1e-15 * std::max(1.0, y_scale);

    Eigen::MatrixXd gram = b.transpose() * b;
    Eigen::MatrixXd bty = b.transpose() * y_set;

    // ridge initialization keeps the starting point scale-aware and deterministic
    double ridge = 1e-3 * gram.trace() / static_cast<double>(s);
    Eigen::MatrixXd init =
        (gram + ridge * Eigen::MatrixXd::Identity(s, s)).ldlt().solve(bty);
    Eigen::VectorXd p =
        (init.array().square().rowwise().mean() + opts.p_floor).matrix();
    double mean_y = y_set.mean();
    double var_y = (y_set.array() - mean_y).square().mean();
    double sigma2 = std::max(0.1 * var_y, sigma_floor);

    VemResult res;
    res.evidence.reserve(static_cast<size_t>(opts.max_iter));
    const double log2pi = 1.8378770664093453;

    for (int it = 0; it < opts.max_iter; ++it) {
        // E-step: Gaussian posterior N(mu_j, Sigma) for each column
        Eigen::MatrixXd a = gram / sigma2;
        a.diagonal() += p.cwiseInverse();
        Eigen::LLT<Eigen::MatrixXd> llt(a);
        if (llt.info() != Eigen::Success)
            throw Error("variational EM: posterior precision not positive definite");
        Eigen::MatrixXd sigma_post = llt.solve(Eigen::MatrixXd::Identity(s, s));
        Eigen::MatrixXd mu = llt.solve(bty) / sigma2;
        Eigen::MatrixXd resid = y_set - b * mu;

        // log evidence of the current (p, sigma2); determinant via
        // det(sigma2 I + B P B^T) = sigma2^N det(P) det(A)
        double logdet_a = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
        double quad = (y_set.squaredNorm() - (y_set.array() * (b * mu).array()).sum()) / sigma2;
        double ev = -0.5 * (md * (nm * log2pi + nm * std::log(sigma2) +
                                  p.array().log().sum() + logdet_a) +
                            quad);
        res.evidence.push_back(ev);

        // M-step, clamped from below (the clamp is the constrained maximizer,
        // so the evidence stays monotone)
        Eigen::VectorXd p_new =
            (mu.array().square().rowwise().mean() + sigma_post.diagonal().array())
                .cwiseMax(opts.p_floor)
                .matrix();
        double fit = resid.squaredNorm() / md;
        double smear = (gram.array() * sigma_post.array()).sum();
        double sigma2_new = std::max((fit + smear) / nm, sigma_floor);

        double rel = std::max(
            (p_new - p).cwiseAbs().maxCoeff() / (p.cwiseAbs().maxCoeff() + opts.p_floor),
            std::abs(sigma2_new - sigma2) / sigma2);
        p = p_new;
        sigma2 = sigma2_new;
        res.iterations = it + 1;
        if (rel < opts.tol) {
            res.converged = true;
            res.posterior_mean = std::move(mu);
            res.posterior_cov = std::move(sigma_post);
            break;
        }
        if (it + 1 == opts.max_iter) {
            res.posterior_mean = std::move(mu);
            res.posterior_cov = std::move(sigma_post);
        }
    }
    res.p = p;
    res.sigma2 = sigma2;
    return res;
}

VemResult variational_em(const Eigen::MatrixXd& b, const Eigen::VectorXd& y,
                         const VemOptions& opts) {
    return variational_em_pooled(b, y, opts);
}

std::string planned_samples_to_csv(const PlannedSamples& ps) {
    std::ostringstream out;
    out << "vertex,t,value\n";
    Eigen::Index idx = 0;
    for (size_t v = 0; v < ps.plan.times.size(); ++v)
        for (double t : ps.plan.times[v])
            out << v << ',' << format_double(t) << ',' << format_double(ps.values(idx++)) << '\n';
    return out.str();
}

PlannedSamples planned_samples_from_csv(std::istream& in) {
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    std::vector<std::tuple<long, double, double>> rows;
    long max_v = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        auto toks = split_csv_line(line);
        if (toks.size() != 3)
            throw ParseError("line " + std::to_string(line_no) + ": expected vertex,t,value");
        long v = parse_long(toks[0], line_no);
        rows.emplace_back(v, parse_double(toks[1], line_no), parse_double(toks[2], line_no));
        max_v = std::max(max_v, v);
    }
    PlannedSamples ps;
    ps.plan.times.resize(static_cast<size_t>(max_v + 1));
    std::vector<std::vector<double>> vals(static_cast<size_t>(max_v + 1));
    for (auto& [v, t, x] : rows) {
        ps.plan.times[static_cast<size_t>(v)].push_back(t);
        vals[static_cast<size_t>(v)].push_back(x);
    }
    ps.values.resize(static_cast<Eigen::Index>(rows.size()));
    Eigen::Index idx = 0;
    for (const auto& vv : vals)
        for (double x : vv) ps.values(idx++) = x;
    return ps;
}

std::string vem_result_to_json(const VemResult& r) {
    nlohmann::ordered_json j;
    j["p"] = std::vector<double>(r.p.data(), r.p.data() + r.p.size());
    j["sigma2"] = r.sigma2;
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    return j.dump(2);
}

} // namespace ggsp
