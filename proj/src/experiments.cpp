#include "ggsp/experiments.hpp"
#include "ggsp/csv.hpp"
#include "ggsp/errors.hpp"
#include "ggsp/rng.hpp"

#include <json.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace ggsp {

using nlohmann::json;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Missing-data models
// ---------------------------------------------------------------------------

double expected_clipped_run(double q, int cols) {
    // E[min(L, c)] = (1 - (1-q)^c) / q for L ~ Geo(q); average over the
    // uniform start position
    double acc = 0.0;
    for (int c = 1; c <= cols; ++c) acc += (1.0 - std::pow(1.0 - q, c)) / q;
    return acc / cols;
}

ObservationMask make_missing_mask(const MissingSpec& spec, Eigen::Index rows, Eigen::Index cols,
                                  std::uint64_t seed) {
    ObservationMask mask = ObservationMask::all(rows, cols, true);
    Rng rng(seed);
    if (spec.kind == MissingSpec::Kind::Uniform) {
        if (spec.rho < 0.0 || spec.rho >= 1.0) throw InvalidSpec("uniform model needs 0 <= rho < 1");
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c)
                if (rng.bernoulli(spec.rho)) mask.observed(r, c) = false;
        return mask;
    }
    if (!(spec.q > 0.0) || spec.q > 1.0) throw InvalidSpec("consecutive model needs 0 < q <= 1");
    if (spec.lanes < 0 || spec.lanes > rows)
        throw InvalidSpec("lane count out of range: " + std::to_string(spec.lanes));
    // partial Fisher-Yates draw of `lanes` distinct rows
    std::vector<Eigen::Index> order(static_cast<size_t>(rows));
    std::iota(order.begin(), order.end(), 0);
    for (int i = 0; i < spec.lanes; ++i) {
        auto j = static_cast<Eigen::Index>(i + rng.uniform_index(static_cast<std::uint64_t>(rows - i)));
        std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
    }
    for (int i = 0; i < spec.lanes; ++i) {
        Eigen::Index row = order[static_cast<size_t>(i)];
        auto len = static_cast<Eigen::Index>(rng.geometric(spec.q));
        auto start = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(cols)));
        for (Eigen::Index c = start; c < std::min(cols, start + len); ++c)
            mask.observed(row, c) = false;
    }
    return mask;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

static double snr_from_power(double signal, double error) {
    if (error <= 0.0) return 300.0; // sentinel for perfect recovery
    return std::min(300.0, 10.0 * std::log10(signal / error));
}

MetricEntry metrics(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth,
                    const Eigen::MatrixXd* noisy_input) {
    if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
        throw DimensionMismatch("estimate and truth shapes differ");
    double sig = truth.squaredNorm();
    if (sig == 0.0) throw ZeroSignal("truth signal is identically zero");
    double err = (estimate - truth).squaredNorm();
    MetricEntry m;
    m.snr_db = snr_from_power(sig, err);
    m.normalized_error = std::sqrt(err / sig);
    m.relative_error = m.normalized_error;
    if (noisy_input) {
        if (noisy_input->rows() != truth.rows() || noisy_input->cols() != truth.cols())
            throw DimensionMismatch("noisy input shape differs");
        m.input_snr_db = snr_from_power(sig, (*noisy_input - truth).squaredNorm());
    }
    return m;
}

// ---------------------------------------------------------------------------
// Synthetic generators
// ---------------------------------------------------------------------------

static Eigen::MatrixXd random_orthogonal(int d, Rng& rng) {
    Eigen::MatrixXd g(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) g(r, c) = rng.gaussian();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
    Eigen::MatrixXd r = qr.matrixQR().topRows(d).triangularView<Eigen::Upper>();
    for (int c = 0; c < d; ++c)
        if (r(c, c) < 0.0) q.col(c) = -q.col(c);
    return q;
}

GrpModel make_euclidean_vertex_model(const Graph& g, const EuclideanVertexSpec& spec,
                                     std::uint64_t seed) {
    if (spec.d < 1) throw InvalidSpec("euclidean_vertex needs d >= 1");
    std::vector<double> mu = spec.feature_eigenvalues;
    if (mu.empty()) {
        mu.resize(static_cast<size_t>(spec.d));
        double v = 0.5;
        for (auto& x : mu) {
            x = v;
            v *= 3.0;
        }
    }
    if (static_cast<int>(mu.size()) != spec.d)
        throw InvalidSpec("feature_eigenvalues length must equal d");
    if (!std::is_sorted(mu.begin(), mu.end()))
        throw InvalidSpec("feature_eigenvalues must be ascending");

    Rng rng(seed);
    Eigen::MatrixXd basis;
    if (spec.basis_mode == EuclideanVertexSpec::BasisMode::NearCycle && spec.d >= 3) {
        // cycle harmonics perturbed by a small random rotation: non-diagonal,
        // closer to the harmonic frame than to the identity
        double eps = spec.rotation_deg * 3.14159265358979323846 / 180.0;
        Eigen::MatrixXd noise(spec.d, spec.d);
        for (int r = 0; r < spec.d; ++r)
            for (int c = 0; c < spec.d; ++c) noise(r, c) = rng.gaussian();
        Eigen::MatrixXd target =
            fourier_basis_cycle(spec.d).eigenvectors + eps * noise / std::sqrt(2.0 * spec.d);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(target);
        basis = qr.householderQ() * Eigen::MatrixXd::Identity(spec.d, spec.d);
        Eigen::MatrixXd r = qr.matrixQR().topRows(spec.d).triangularView<Eigen::Upper>();
        for (int c = 0; c < spec.d; ++c)
            if (r(c, c) < 0.0) basis.col(c) = -basis.col(c);
    } else {
        basis = random_orthogonal(spec.d, rng);
    }
    Eigen::VectorXd ev = Eigen::Map<Eigen::VectorXd>(mu.data(), spec.d);
    Eigen::MatrixXd c_h = basis * ev.asDiagonal() * basis.transpose();

    GrpModel model;
    model.basis.graph_basis = eigendecompose(graph_matrices(g).laplacian);
    model.basis.hilbert_basis = eigendecompose(c_h);
    Eigen::MatrixXd p(g.n, spec.d);
    for (int k = 0; k < g.n; ++k)
        for (int t = 0; t < spec.d; ++t)
            p(k, t) = spec.scale *
                      std::exp(-spec.graph_decay * model.basis.graph_basis.eigenvalues(k)) *
                      model.basis.hilbert_basis.eigenvalues(t);
    model.jpsd = Jpsd(p);
    model.mean = Eigen::MatrixXd::Zero(g.n, spec.d);
    return model;
}

ContinuousModel make_continuous_model(const SpectralBasis& graph_basis,
                                      const ContinuousSpec& spec, std::uint64_t seed) {
    if (spec.num_beta < 1) throw InvalidSpec("continuous model needs num_beta >= 1");
    if (!(spec.beta_min <= spec.beta_max)) throw InvalidSpec("beta range is empty");
    ContinuousModel model;
    model.graph_basis = graph_basis;
    Rng rng(seed);
    model.beta.resize(spec.num_beta);
    for (int l = 0; l < spec.num_beta; ++l)
        model.beta(l) = rng.uniform(spec.beta_min, spec.beta_max);
    const int n = graph_basis.dim();
    model.coeff_sd.resize(n, spec.num_beta);
    for (int k = 0; k < n; ++k)
        for (int l = 0; l < spec.num_beta; ++l)
            model.coeff_sd(k, l) =
                std::sqrt(spec.scale * std::exp(-spec.graph_decay * graph_basis.eigenvalues(k)) /
                          ((l + 1.0) * (l + 1.0)));
    return model;
}

Eigen::MatrixXd sample_continuous_coeffs(const ContinuousModel& model, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd d(model.coeff_sd.rows(), model.coeff_sd.cols());
    for (Eigen::Index r = 0; r < d.rows(); ++r)
        for (Eigen::Index c = 0; c < d.cols(); ++c) d(r, c) = model.coeff_sd(r, c) * rng.gaussian();
    return d;
}

Eigen::MatrixXd eval_continuous(const ContinuousModel& model, const Eigen::MatrixXd& coeffs,
                                const std::vector<double>& times) {
    if (coeffs.rows() != model.coeff_sd.rows() || coeffs.cols() != model.coeff_sd.cols())
        throw DimensionMismatch("coefficient grid shape mismatch");
    Eigen::MatrixXd sines(model.beta.size(), static_cast<Eigen::Index>(times.size()));
    for (Eigen::Index l = 0; l < model.beta.size(); ++l)
        for (size_t j = 0; j < times.size(); ++j)
            sines(l, static_cast<Eigen::Index>(j)) = std::sin(model.beta(l) * times[j]);
    return model.graph_basis.eigenvectors * (coeffs * sines);
}

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

Dataset ingest_csv(const std::string& path, CsvSchema schema) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open: " + path);
    Dataset ds;
    if (schema == CsvSchema::Matrix) {
        std::vector<std::vector<double>> block;
        Eigen::Index cols = -1;
        std::string line;
        int line_no = 0;
        auto flush = [&]() {
            if (block.empty()) return;
            Eigen::MatrixXd m(static_cast<Eigen::Index>(block.size()),
                              static_cast<Eigen::Index>(block.front().size()));
            for (Eigen::Index r = 0; r < m.rows(); ++r)
                for (Eigen::Index c = 0; c < m.cols(); ++c)
                    m(r, c) = block[static_cast<size_t>(r)][static_cast<size_t>(c)];
            if (!ds.samples.empty() &&
                (m.rows() != ds.samples.front().rows() || m.cols() != ds.samples.front().cols()))
                throw InconsistentDimensions("sample blocks differ in shape");
            ds.observed.push_back(ObservationMask::all(m.rows(), m.cols(), true));
            ds.samples.push_back(std::move(m));
            block.clear();
        };
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty() || line == "\r") {
                flush();
                continue;
            }
            auto toks = split_csv_line(line);
            std::vector<double> row;
            row.reserve(toks.size());
            for (const auto& t : toks) row.push_back(parse_double(t, line_no));
            if (cols < 0) cols = static_cast<Eigen::Index>(row.size());
            if (static_cast<Eigen::Index>(row.size()) != cols)
                throw InconsistentDimensions("line " + std::to_string(line_no) + ": ragged row");
            block.push_back(std::move(row));
        }
        flush();
        return ds;
    }
    // long schema
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    struct Cell { long s, v, c; double x; };
    std::vector<Cell> cells;
    long max_s = -1, max_v = -1, max_c = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        if (!header_seen) {
            auto toks = split_csv_line(line);
            if (toks.size() != 4 || toks[0] != "sample")
                throw ParseError("line 1: expected header sample,vertex,coord,value");
            header_seen = true;
            continue;
        }
        auto toks = split_csv_line(line);
        if (toks.size() != 4)
            throw ParseError("line " + std::to_string(line_no) + ": expected 4 columns");
        Cell cell{parse_long(toks[0], line_no), parse_long(toks[1], line_no),
                  parse_long(toks[2], line_no), parse_double(toks[3], line_no)};
        if (cell.s < 0 || cell.v < 0 || cell.c < 0)
            throw ParseError("line " + std::to_string(line_no) + ": negative index");
        max_s = std::max(max_s, cell.s);
        max_v = std::max(max_v, cell.v);
        max_c = std::max(max_c, cell.c);
        cells.push_back(cell);
    }
    if (max_s < 0) return ds;
    const auto nan = std::numeric_limits<double>::quiet_NaN();
    for (long s = 0; s <= max_s; ++s) {
        ds.samples.push_back(Eigen::MatrixXd::Constant(max_v + 1, max_c + 1, nan));
        ds.observed.push_back(ObservationMask::all(max_v + 1, max_c + 1, false));
    }
    for (const Cell& cell : cells) {
        auto& mask = ds.observed[static_cast<size_t>(cell.s)];
        if (mask.observed(cell.v, cell.c))
            throw InconsistentDimensions("duplicate cell (" + std::to_string(cell.s) + "," +
                                         std::to_string(cell.v) + "," + std::to_string(cell.c) +
                                         ")");
        mask.observed(cell.v, cell.c) = true;
        ds.samples[static_cast<size_t>(cell.s)](cell.v, cell.c) = cell.x;
    }
    return ds;
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

std::string framework_name(Framework f) {
    switch (f) {
        case Framework::GRP: return "GRP";
        case Framework::TV: return "TV";
        case Framework::TV_ZERO: return "TV_ZERO";
        case Framework::TV_INTERP: return "TV_INTERP";
        case Framework::GSP: return "GSP";
        case Framework::TS: return "TS";
    }
    return "?";
}

static Framework framework_from_name(const std::string& s) {
    if (s == "GRP") return Framework::GRP;
    if (s == "TV") return Framework::TV;
    if (s == "TV_ZERO") return Framework::TV_ZERO;
    if (s == "TV_INTERP") return Framework::TV_INTERP;
    if (s == "GSP") return Framework::GSP;
    if (s == "TS") return Framework::TS;
    throw ConfigError("unknown framework: " + s);
}

namespace {

void require_keys(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

GraphConfig parse_graph_config(const json& j) {
    GraphConfig gc;
    require_keys(j, {"kind", "n", "p", "connected", "t", "path", "coords_csv", "k"}, "graph");
    std::string kind = j.value("kind", "erdos_renyi");
    if (kind == "erdos_renyi") gc.kind = GraphConfig::Kind::ErdosRenyi;
    else if (kind == "cycle") gc.kind = GraphConfig::Kind::Cycle;
    else if (kind == "path") gc.kind = GraphConfig::Kind::Path;
    else if (kind == "edge_list") gc.kind = GraphConfig::Kind::EdgeList;
    else if (kind == "knn") gc.kind = GraphConfig::Kind::Knn;
    else throw ConfigError("unknown graph kind: " + kind);
    gc.n = j.value("n", gc.n);
    gc.p = j.value("p", gc.p);
    gc.connected = j.value("connected", gc.connected);
    gc.t = j.value("t", gc.t);
    gc.path = j.value("path", gc.path);
    gc.coords = j.value("coords_csv", gc.coords);
    gc.k = j.value("k", gc.k);
    return gc;
}

DataConfig parse_data_config(const json& j) {
    DataConfig dc;
    require_keys(j,
                 {"kind", "d", "train", "test", "feature_eigenvalues", "basis_mode",
                  "rotation_deg", "graph_decay", "scale", "path", "schema", "num_beta",
                  "beta_min", "beta_max"},
                 "data");
    std::string kind = j.value("kind", "euclidean_vertex");
    if (kind == "euclidean_vertex") {
        dc.kind = DataConfig::Kind::EuclideanVertex;
        dc.euclid.d = j.value("d", dc.euclid.d);
        if (j.contains("feature_eigenvalues"))
            dc.euclid.feature_eigenvalues = j.at("feature_eigenvalues").get<std::vector<double>>();
        std::string mode = j.value("basis_mode", "near_cycle");
        if (mode == "near_cycle") dc.euclid.basis_mode = EuclideanVertexSpec::BasisMode::NearCycle;
        else if (mode == "random") dc.euclid.basis_mode = EuclideanVertexSpec::BasisMode::Random;
        else throw ConfigError("unknown basis_mode: " + mode);
        dc.euclid.rotation_deg = j.value("rotation_deg", dc.euclid.rotation_deg);
        dc.euclid.graph_decay = j.value("graph_decay", dc.euclid.graph_decay);
        dc.euclid.scale = j.value("scale", dc.euclid.scale);
        dc.train = j.value("train", dc.train);
        dc.test = j.value("test", dc.test);
    } else if (kind == "csv") {
        dc.kind = DataConfig::Kind::Csv;
        if (!j.contains("path")) throw ConfigError("csv data needs a path");
        dc.path = j.at("path").get<std::string>();
        std::string schema = j.value("schema", "long");
        if (schema == "long") dc.schema = CsvSchema::Long;
        else if (schema == "matrix") dc.schema = CsvSchema::Matrix;
        else throw ConfigError("unknown schema: " + schema);
    } else if (kind == "continuous") {
        dc.kind = DataConfig::Kind::Continuous;
        dc.continuous.num_beta = j.value("num_beta", dc.continuous.num_beta);
        dc.continuous.beta_min = j.value("beta_min", dc.continuous.beta_min);
        dc.continuous.beta_max = j.value("beta_max", dc.continuous.beta_max);
        dc.continuous.graph_decay = j.value("graph_decay", dc.continuous.graph_decay);
        dc.continuous.scale = j.value("scale", dc.continuous.scale);
    } else {
        throw ConfigError("unknown data kind: " + kind);
    }
    return dc;
}

} // namespace

ExperimentConfig parse_config_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    require_keys(j,
                 {"experiment", "frameworks", "graph", "data", "seed", "repetitions", "threads",
                  "input_snr_db", "days", "hours_per_day", "missing", "metrics_hidden_only",
                  "sampling", "snr_db", "m0", "train_signals", "test_signals", "em"},
                 "config");
    ExperimentConfig cfg;
    std::string kind = j.value("experiment", "");
    if (kind == "denoise") cfg.kind = ExperimentKind::Denoise;
    else if (kind == "complete") cfg.kind = ExperimentKind::Complete;
    else if (kind == "continuous") cfg.kind = ExperimentKind::Continuous;
    else throw ConfigError("experiment must be denoise, complete or continuous");

    if (j.contains("frameworks"))
        for (const auto& f : j.at("frameworks")) cfg.frameworks.push_back(framework_from_name(f));
    if (cfg.frameworks.empty()) {
        switch (cfg.kind) {
            case ExperimentKind::Denoise:
                cfg.frameworks = {Framework::GRP, Framework::TV, Framework::GSP};
                break;
            case ExperimentKind::Complete:
                cfg.frameworks = {Framework::GRP, Framework::TV_ZERO, Framework::TV_INTERP,
                                  Framework::GSP};
                break;
            case ExperimentKind::Continuous:
                cfg.frameworks = {Framework::GRP, Framework::TV, Framework::TS};
                break;
        }
    }
    if (j.contains("graph")) cfg.graph = parse_graph_config(j.at("graph"));
    if (j.contains("data")) cfg.data = parse_data_config(j.at("data"));
    if (j.contains("seed")) {
        cfg.seed = j.at("seed").get<std::uint64_t>();
        cfg.seed_set = true;
    }
    cfg.repetitions = j.value("repetitions", cfg.repetitions);
    if (cfg.repetitions < 1) throw ConfigError("repetitions must be >= 1");
    cfg.threads = j.value("threads", cfg.threads);
    if (j.contains("input_snr_db"))
        cfg.input_snr_db = j.at("input_snr_db").get<std::vector<double>>();
    cfg.days = j.value("days", cfg.days);
    cfg.hours_per_day = j.value("hours_per_day", cfg.hours_per_day);
    if (j.contains("missing")) {
        const json& m = j.at("missing");
        require_keys(m, {"kind", "q", "hidden_fractions", "rho", "train_lanes_per_day",
                         "lanes_per_day"},
                     "missing");
        std::string mk = m.value("kind", "uniform");
        if (mk == "consecutive") {
            cfg.missing.kind = MissingSpec::Kind::Consecutive;
            cfg.missing.q = m.value("q", cfg.missing.q);
            if (m.contains("hidden_fractions"))
                cfg.hidden_fractions = m.at("hidden_fractions").get<std::vector<double>>();
            if (m.contains("lanes_per_day")) {
                cfg.hidden_fractions.clear();
                for (int lanes : m.at("lanes_per_day").get<std::vector<int>>())
                    cfg.hidden_fractions.push_back(-static_cast<double>(lanes)); // raw lane counts
            }
            cfg.missing.lanes = m.value("train_lanes_per_day", 2);
        } else if (mk == "uniform") {
            cfg.missing.kind = MissingSpec::Kind::Uniform;
            if (m.contains("rho")) {
                if (m.at("rho").is_array()) cfg.rho_sweep = m.at("rho").get<std::vector<double>>();
                else cfg.rho_sweep = {m.at("rho").get<double>()};
            }
        } else {
            throw ConfigError("unknown missing kind: " + mk);
        }
    }
    cfg.metrics_hidden_only = j.value("metrics_hidden_only", cfg.metrics_hidden_only);
    if (j.contains("sampling")) {
        const json& s = j.at("sampling");
        require_keys(s, {"scheme", "samples_per_vertex"}, "sampling");
        std::string scheme = s.value("scheme", "equispaced");
        if (scheme == "equispaced") cfg.sampling.scheme = SamplingConfig::Scheme::Equispaced;
        else if (scheme == "uniform") cfg.sampling.scheme = SamplingConfig::Scheme::Uniform;
        else throw ConfigError("unknown sampling scheme: " + scheme);
        cfg.sampling.samples_per_vertex = s.value("samples_per_vertex", 60);
    }
    cfg.snr_db = j.value("snr_db", cfg.snr_db);
    cfg.m0 = j.value("m0", cfg.m0);
    cfg.train_signals = j.value("train_signals", cfg.train_signals);
    cfg.test_signals = j.value("test_signals", cfg.test_signals);
    if (j.contains("em")) {
        const json& e = j.at("em");
        require_keys(e, {"max_iter", "tol", "p_floor"}, "em");
        cfg.em.max_iter = e.value("max_iter", cfg.em.max_iter);
        cfg.em.tol = e.value("tol", cfg.em.tol);
        cfg.em.p_floor = e.value("p_floor", cfg.em.p_floor);
    }

    // validation that needs cross-field knowledge
    if (cfg.kind == ExperimentKind::Continuous &&
        cfg.sampling.scheme == SamplingConfig::Scheme::Uniform)
        for (Framework f : cfg.frameworks)
            if (f == Framework::TV)
                throw ConfigError("TV needs a time grid; it cannot run with uniform sampling");
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_json(ss.str());
}

// ---------------------------------------------------------------------------
// Shared pipeline pieces
// ---------------------------------------------------------------------------

Graph build_graph_from_config(const GraphConfig& gc, std::uint64_t seed) {
    switch (gc.kind) {
        case GraphConfig::Kind::ErdosRenyi:
            return erdos_renyi_graph(gc.n, gc.p, seed, gc.connected);
        case GraphConfig::Kind::Cycle:
            return cycle_graph(gc.t);
        case GraphConfig::Kind::Path:
            return path_graph(gc.n);
        case GraphConfig::Kind::EdgeList: {
            std::ifstream in(gc.path);
            if (!in) throw ParseError("cannot open graph file: " + gc.path);
            return from_edge_list(in);
        }
        case GraphConfig::Kind::Knn: {
            std::ifstream in(gc.coords);
            if (!in) throw ParseError("cannot open coordinates: " + gc.coords);
            return knn_graph(read_coords_csv(in), gc.k);
        }
    }
    throw ConfigError("unhandled graph kind");
}

GeneralizedSignal add_awgn(const GeneralizedSignal& x, double noise_var, Rng& rng) {
    double sd = std::sqrt(noise_var);
    GeneralizedSignal y = x;
    for (Eigen::Index r = 0; r < y.rows(); ++r)
        for (Eigen::Index c = 0; c < y.cols(); ++c) y(r, c) += sd * rng.gaussian();
    return y;
}

std::pair<std::vector<int>, std::vector<int>> split_indices(int count, std::uint64_t seed) {
    std::vector<int> idx(static_cast<size_t>(count));
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    for (int i = count - 1; i > 0; --i) {
        auto j = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(i + 1)));
        std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
    }
    int half = count / 2;
    return {std::vector<int>(idx.begin(), idx.begin() + half),
            std::vector<int>(idx.begin() + half, idx.end())};
}

SpectralBasis product_graph_basis(const SpectralBasis& g, const SpectralBasis& h) {
    const int n = g.dim(), t = h.dim();
    std::vector<std::tuple<double, int, int>> order;
    order.reserve(static_cast<size_t>(n) * t);
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < t; ++v)
            order.emplace_back(g.eigenvalues(u) + h.eigenvalues(v), u, v);
    std::sort(order.begin(), order.end());
    SpectralBasis out;
    out.eigenvalues.resize(n * t);
    out.eigenvectors.resize(n * t, n * t);
    for (size_t c = 0; c < order.size(); ++c) {
        auto [val, u, v] = order[c];
        out.eigenvalues(static_cast<Eigen::Index>(c)) = val;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < t; ++b)
                out.eigenvectors(a * t + b, static_cast<Eigen::Index>(c)) =
                    g.eigenvectors(a, u) * h.eigenvectors(b, v);
    }
    apply_sign_convention(out.eigenvectors);
    double scale = std::max(1.0, out.eigenvalues.cwiseAbs().maxCoeff());
    out.degenerate = false;
    for (Eigen::Index i = 0; i + 1 < out.eigenvalues.size(); ++i)
        if (out.eigenvalues(i + 1) - out.eigenvalues(i) < 1e-8 * scale) out.degenerate = true;
    return out;
}

std::vector<GeneralizedSignal> wiener_denoise_pipeline(
    const SpectralBasis& graph_basis, const SpectralBasis& hilbert_basis,
    const std::vector<GeneralizedSignal>& train_noisy,
    const std::vector<GeneralizedSignal>& test_noisy, double noise_var) {
    JointBasis basis{graph_basis, hilbert_basis};
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(basis.n(), basis.d());
    for (const auto& x : train_noisy) mean += x;
    mean /= static_cast<double>(train_noisy.size());
    std::vector<GeneralizedSignal> centered;
    centered.reserve(train_noisy.size());
    for (const auto& x : train_noisy) centered.push_back(x - mean);
    Jpsd p_y = jpsd_periodogram(centered, basis);
    // the observed spectrum includes the (known, white) noise floor
    Eigen::MatrixXd p_x = (p_y.values.array() - noise_var).cwiseMax(0.0).matrix();
    Eigen::MatrixXd p_e = Eigen::MatrixXd::Constant(basis.n(), basis.d(), noise_var);
    DenoiseFilter f = denoise_filter(Jpsd(p_x), Jpsd(p_e), basis);
    std::vector<GeneralizedSignal> out;
    out.reserve(test_noisy.size());
    for (const auto& y : test_noisy) out.push_back(mean + denoise(y - mean, f));
    return out;
}

// ---------------------------------------------------------------------------
// Experiment execution
// ---------------------------------------------------------------------------

namespace {

struct CurveRow {
    int sweep_idx;
    std::string sweep;
    std::string framework;
    int rep;
    std::string metric;
    double value;
};

void parallel_run(int count, int threads, const std::function<void(int)>& fn) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

std::string curves_to_csv(std::vector<CurveRow> rows) {
    std::ostringstream out;
    out << "sweep,framework,rep,metric,value\n";
    for (const auto& r : rows)
        out << r.sweep << ',' << r.framework << ',' << r.rep << ',' << r.metric << ','
            << format_double(r.value) << '\n';
    return out.str();
}

ordered_json aggregate_rows(const std::vector<CurveRow>& rows) {
    // mean per (sweep, framework, metric), in first-appearance order
    std::vector<std::tuple<std::string, std::string, std::string>> keys;
    std::map<std::tuple<std::string, std::string, std::string>, std::pair<double, int>> acc;
    for (const auto& r : rows) {
        auto key = std::make_tuple(r.sweep, r.framework, r.metric);
        auto it = acc.find(key);
        if (it == acc.end()) {
            keys.push_back(key);
            acc[key] = {r.value, 1};
        } else {
            it->second.first += r.value;
            it->second.second += 1;
        }
    }
    ordered_json out = ordered_json::array();
    for (const auto& key : keys) {
        auto [sum, cnt] = acc[key];
        ordered_json entry;
        entry["sweep"] = std::get<0>(key);
        entry["framework"] = std::get<1>(key);
        entry["metric"] = std::get<2>(key);
        entry["mean"] = sum / cnt;
        out.push_back(entry);
    }
    return out;
}

double dataset_power(const std::vector<GeneralizedSignal>& samples) {
    if (samples.empty()) throw EmptySampleSet("no samples");
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(samples.front().rows(), samples.front().cols());
    for (const auto& x : samples) mean += x;
    mean /= static_cast<double>(samples.size());
    double acc = 0.0;
    for (const auto& x : samples) acc += (x - mean).squaredNorm();
    return acc / (static_cast<double>(samples.size()) * mean.size());
}

std::vector<GeneralizedSignal> complete_samples_only(const Dataset& ds) {
    std::vector<GeneralizedSignal> out;
    for (size_t i = 0; i < ds.samples.size(); ++i)
        if (ds.observed[i].count_observed() == ds.observed[i].observed.size())
            out.push_back(ds.samples[i]);
    return out;
}

// ---- denoise ---------------------------------------------------------------

struct DenoiseContext {
    SpectralBasis graph_basis;
    std::vector<GeneralizedSignal> train;
    std::vector<GeneralizedSignal> test;
    double power = 1.0;
};

SpectralBasis hilbert_basis_for(Framework f, const std::vector<GeneralizedSignal>& train, int d) {
    switch (f) {
        case Framework::GRP: return learn_hilbert_basis(train);
        case Framework::TV: return fourier_basis_cycle(d);
        case Framework::GSP: return identity_basis(d);
        default: throw ConfigError("framework " + framework_name(f) + " not valid for denoising");
    }
}

std::vector<CurveRow> run_denoise(const ExperimentConfig& cfg) {
    DenoiseContext ctx;
    Graph graph = build_graph_from_config(cfg.graph, split_seed(cfg.seed, 1));
    ctx.graph_basis = eigendecompose(graph_matrices(graph).laplacian);

    std::vector<GeneralizedSignal> samples;
    if (cfg.data.kind == DataConfig::Kind::EuclideanVertex) {
        GrpModel model = make_euclidean_vertex_model(graph, cfg.data.euclid, split_seed(cfg.seed, 2));
        samples = sample_grp(model, cfg.data.train + cfg.data.test, split_seed(cfg.seed, 3));
    } else if (cfg.data.kind == DataConfig::Kind::Csv) {
        samples = complete_samples_only(ingest_csv(cfg.data.path, cfg.data.schema));
        if (static_cast<int>(samples.size()) < 4)
            throw InconsistentDimensions("need at least 4 complete samples for denoising");
        if (samples.front().rows() != graph.n)
            throw InconsistentDimensions("CSV vertex count does not match the graph");
    } else {
        throw ConfigError("denoise needs euclidean_vertex or csv data");
    }
    auto [train_idx, test_idx] = split_indices(static_cast<int>(samples.size()),
                                               split_seed(cfg.seed, 4));
    for (int i : train_idx) ctx.train.push_back(samples[static_cast<size_t>(i)]);
    for (int i : test_idx) ctx.test.push_back(samples[static_cast<size_t>(i)]);
    ctx.power = dataset_power(samples);
    const int d = static_cast<int>(samples.front().cols());
    for (Framework f : cfg.frameworks)
        if (f == Framework::TV && d < 3)
            throw ConfigError("TV needs d >= 3 coordinates for the cycle harmonic basis");

    const int sweeps = static_cast<int>(cfg.input_snr_db.size());
    const int reps = cfg.repetitions;
    std::vector<std::vector<CurveRow>> results(static_cast<size_t>(sweeps * reps));
    parallel_run(sweeps * reps, cfg.threads, [&](int task) {
        const int si = task / reps;
        const int rep = task % reps;
        const double snr = cfg.input_snr_db[static_cast<size_t>(si)];
        const double noise_var = ctx.power / std::pow(10.0, snr / 10.0);
        Rng rng(split_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(task)));
        std::vector<GeneralizedSignal> train_noisy, test_noisy;
        train_noisy.reserve(ctx.train.size());
        test_noisy.reserve(ctx.test.size());
        for (const auto& x : ctx.train) train_noisy.push_back(add_awgn(x, noise_var, rng));
        for (const auto& x : ctx.test) test_noisy.push_back(add_awgn(x, noise_var, rng));

        std::vector<CurveRow> rows;
        for (Framework f : cfg.frameworks) {
            SpectralBasis hb = hilbert_basis_for(f, train_noisy, d);
            auto estimates = wiener_denoise_pipeline(ctx.graph_basis, hb, train_noisy, test_noisy,
                                                     noise_var);
            double sig = 0.0, err = 0.0, inp = 0.0;
            for (size_t i = 0; i < estimates.size(); ++i) {
                sig += ctx.test[i].squaredNorm();
                err += (estimates[i] - ctx.test[i]).squaredNorm();
                inp += (test_noisy[i] - ctx.test[i]).squaredNorm();
            }
            std::string sweep = format_double(snr);
            std::string fname = framework_name(f);
            rows.push_back({si, sweep, fname, rep, "output_snr_db", snr_from_power(sig, err)});
            rows.push_back({si, sweep, fname, rep, "input_snr_db", snr_from_power(sig, inp)});
            rows.push_back({si, sweep, fname, rep, "normalized_error", std::sqrt(err / sig)});
            rows.push_back({si, sweep, fname, rep, "relative_error", std::sqrt(err / sig)});
        }
        results[static_cast<size_t>(task)] = std::move(rows);
    });
    std::vector<CurveRow> rows;
    for (auto& part : results)
        for (auto& r : part) rows.push_back(std::move(r));
    std::stable_sort(rows.begin(), rows.end(), [&](const CurveRow& a, const CurveRow& b) {
        return std::tuple{a.sweep_idx, a.rep} < std::tuple{b.sweep_idx, b.rep};
    });
    return rows;
}

// ---- completion -------------------------------------------------------------

// error accumulator over hidden / all cells
struct CellErrors {
    double hidden_err = 0.0, hidden_sig = 0.0;
    double all_err = 0.0, all_sig = 0.0;

    void add(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth,
             const ObservationMask& mask) {
        for (Eigen::Index r = 0; r < truth.rows(); ++r) {
            for (Eigen::Index c = 0; c < truth.cols(); ++c) {
                double e = estimate(r, c) - truth(r, c);
                all_err += e * e;
                all_sig += truth(r, c) * truth(r, c);
                if (!mask.observed(r, c)) {
                    hidden_err += e * e;
                    hidden_sig += truth(r, c) * truth(r, c);
                }
            }
        }
    }
};

// one day of (vertex x feature x hour) data with its lane/time mask
struct Day {
    std::vector<GeneralizedSignal> hours; // each n x d
    ObservationMask lane_mask;            // (n*d) rows x hours cols

    bool hour_complete(int h) const {
        for (Eigen::Index lane = 0; lane < lane_mask.rows(); ++lane)
            if (!lane_mask.observed(lane, h)) return false;
        return true;
    }
    ObservationMask hour_mask(int h, int n, int d) const {
        ObservationMask m = ObservationMask::all(n, d, true);
        for (Eigen::Index lane = 0; lane < lane_mask.rows(); ++lane)
            if (!lane_mask.observed(lane, h)) m.observed(lane / d, lane % d) = false;
        return m;
    }
};

// per-lane linear interpolation along time; ends extended with the nearest
// observed value, fully hidden lanes left at zero
Eigen::MatrixXd interpolate_lanes(const Eigen::MatrixXd& grid,
                                  const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>& obs) {
    Eigen::MatrixXd out = grid;
    for (Eigen::Index r = 0; r < grid.rows(); ++r) {
        std::vector<Eigen::Index> known;
        for (Eigen::Index c = 0; c < grid.cols(); ++c)
            if (obs(r, c)) known.push_back(c);
        if (known.empty()) {
            out.row(r).setZero();
            continue;
        }
        for (Eigen::Index c = 0; c < grid.cols(); ++c) {
            if (obs(r, c)) continue;
            auto it = std::lower_bound(known.begin(), known.end(), c);
            if (it == known.begin()) out(r, c) = grid(r, known.front());
            else if (it == known.end()) out(r, c) = grid(r, known.back());
            else {
                Eigen::Index hi = *it, lo = *(it - 1);
                double w = static_cast<double>(c - lo) / static_cast<double>(hi - lo);
                out(r, c) = (1.0 - w) * grid(r, lo) + w * grid(r, hi);
            }
        }
    }
    return out;
}

struct CompleteContext {
    int n = 0, d = 0, hours = 0;
    SpectralBasis graph_basis;
    SpectralBasis cycle_basis; // hours-cycle harmonics (TV)
    std::vector<GeneralizedSignal> all_hours; // day-major
    int days = 0;
};

// GRP on hour snapshots: learn the feature basis and JPSD from complete
// training hours, then fill hidden cells of each test hour by Wiener
// completion
void complete_grp(const CompleteContext& ctx, const std::vector<const Day*>& train,
                  const std::vector<const Day*>& test, CellErrors& errors) {
    std::vector<GeneralizedSignal> clean;
    for (const Day* day : train)
        for (int h = 0; h < ctx.hours; ++h)
            if (day->hour_complete(h)) clean.push_back(day->hours[static_cast<size_t>(h)]);
    if (clean.size() < 2)
        throw TooFewSamples("GRP training needs at least 2 complete hour samples; lower "
                            "train_lanes_per_day");
    JointBasis basis{ctx.graph_basis, learn_hilbert_basis(clean)};
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(ctx.n, ctx.d);
    for (const auto& x : clean) mean += x;
    mean /= static_cast<double>(clean.size());
    std::vector<GeneralizedSignal> centered;
    centered.reserve(clean.size());
    for (const auto& x : clean) centered.push_back(x - mean);
    CovarianceOperator c_x = covariance_from_jpsd(jpsd_periodogram(centered, basis), basis);
    CovarianceOperator c_e = Eigen::MatrixXd::Zero(c_x.rows(), c_x.cols());

    for (const Day* day : test) {
        for (int h = 0; h < ctx.hours; ++h) {
            const auto& truth = day->hours[static_cast<size_t>(h)];
            ObservationMask m = day->hour_mask(h, ctx.n, ctx.d);
            if (m.count_observed() == m.observed.size()) continue; // nothing hidden
            Eigen::VectorXd est =
                completion_estimate(vectorize(truth - mean), c_x, c_e, m);
            Eigen::MatrixXd composite = mean + unvectorize(est, ctx.n, ctx.d);
            for (Eigen::Index r = 0; r < truth.rows(); ++r)
                for (Eigen::Index c = 0; c < truth.cols(); ++c)
                    if (m.observed(r, c)) composite(r, c) = truth(r, c);
            errors.add(composite, truth, m);
        }
    }
}

// time-vertex completion per feature over whole-day grids; missing training
// cells are zero-padded or interpolated before JPSD estimation
void complete_tv(const CompleteContext& ctx, const std::vector<const Day*>& train,
                 const std::vector<const Day*>& test, bool interpolate, CellErrors& errors) {
    JointBasis basis{ctx.graph_basis, ctx.cycle_basis};
    Eigen::MatrixXd u = kronecker(ctx.graph_basis.eigenvectors, ctx.cycle_basis.eigenvectors);
    for (int f = 0; f < ctx.d; ++f) {
        // assemble per-day vertex x hour grids for this feature
        auto day_grid = [&](const Day& day) {
            Eigen::MatrixXd grid(ctx.n, ctx.hours);
            for (int h = 0; h < ctx.hours; ++h) grid.col(h) = day.hours[static_cast<size_t>(h)].col(f);
            return grid;
        };
        auto day_obs = [&](const Day& day) {
            Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> obs(ctx.n, ctx.hours);
            for (int v = 0; v < ctx.n; ++v)
                for (int h = 0; h < ctx.hours; ++h)
                    obs(v, h) = day.lane_mask.observed(v * ctx.d + f, h);
            return obs;
        };
        std::vector<GeneralizedSignal> filled;
        filled.reserve(train.size());
        for (const Day* day : train) {
            Eigen::MatrixXd grid = day_grid(*day);
            auto obs = day_obs(*day);
            if (interpolate) grid = interpolate_lanes(grid, obs);
            else grid = (obs).select(grid, 0.0); // zero-pad hidden cells
            filled.push_back(grid);
        }
        Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(ctx.n, ctx.hours);
        for (const auto& x : filled) mean += x;
        mean /= static_cast<double>(filled.size());
        std::vector<GeneralizedSignal> centered;
        centered.reserve(filled.size());
        for (const auto& x : filled) centered.push_back(x - mean);
        Eigen::VectorXd p = vectorize(jpsd_periodogram(centered, basis).values);
        CovarianceOperator c_x = u * p.asDiagonal() * u.transpose();
        CovarianceOperator c_e = Eigen::MatrixXd::Zero(c_x.rows(), c_x.cols());

        for (const Day* day : test) {
            Eigen::MatrixXd truth = day_grid(*day);
            ObservationMask m;
            m.observed = day_obs(*day);
            if (m.count_observed() == m.observed.size()) continue;
            Eigen::VectorXd est = completion_estimate(vectorize(truth - mean), c_x, c_e, m);
            Eigen::MatrixXd composite = mean + unvectorize(est, ctx.n, ctx.hours);
            for (Eigen::Index r = 0; r < truth.rows(); ++r)
                for (Eigen::Index c = 0; c < truth.cols(); ++c)
                    if (m.observed(r, c)) composite(r, c) = truth(r, c);
            errors.add(composite, truth, m);
        }
    }
}

// traditional GSP: per (hour, feature) graph signals, graph smoothness only
void complete_gsp(const CompleteContext& ctx, const std::vector<const Day*>& train,
                  const std::vector<const Day*>& test, CellErrors& errors) {
    const Eigen::MatrixXd& phi = ctx.graph_basis.eigenvectors;
    for (int f = 0; f < ctx.d; ++f) {
        std::vector<Eigen::VectorXd> clean;
        for (const Day* day : train) {
            for (int h = 0; h < ctx.hours; ++h) {
                bool complete = true;
                for (int v = 0; v < ctx.n; ++v)
                    if (!day->lane_mask.observed(v * ctx.d + f, h)) complete = false;
                if (complete) clean.push_back(day->hours[static_cast<size_t>(h)].col(f));
            }
        }
        if (clean.size() < 2)
            throw TooFewSamples("GSP training needs complete per-feature vectors");
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(ctx.n);
        for (const auto& x : clean) mean += x;
        mean /= static_cast<double>(clean.size());
        Eigen::VectorXd p = Eigen::VectorXd::Zero(ctx.n);
        for (const auto& x : clean) p += (phi.transpose() * (x - mean)).array().square().matrix();
        p /= static_cast<double>(clean.size());
        Eigen::MatrixXd c_x = phi * p.asDiagonal() * phi.transpose();
        Eigen::MatrixXd c_e = Eigen::MatrixXd::Zero(ctx.n, ctx.n);

        for (const Day* day : test) {
            for (int h = 0; h < ctx.hours; ++h) {
                ObservationMask m = ObservationMask::all(ctx.n, 1, true);
                for (int v = 0; v < ctx.n; ++v)
                    if (!day->lane_mask.observed(v * ctx.d + f, h)) m.observed(v, 0) = false;
                if (m.count_observed() == m.observed.size()) continue;
                Eigen::VectorXd truth = day->hours[static_cast<size_t>(h)].col(f);
                Eigen::VectorXd est = completion_estimate(truth - mean, c_x, c_e, m);
                Eigen::VectorXd composite = mean + est;
                for (int v = 0; v < ctx.n; ++v)
                    if (m.observed(v, 0)) composite(v) = truth(v);
                errors.add(composite, truth, m);
            }
        }
    }
}

// uniform missing model on the Cartesian product of the spatial and hour
// graphs; GRP keeps the learned feature basis, TV/GSP process features
// separately (equivalent on the product graph)
void complete_product_graph(const CompleteContext& ctx, const SpectralBasis& product_basis,
                            Framework fw, const std::vector<const Day*>& train,
                            const std::vector<const Day*>& test, CellErrors& errors) {
    const int nt = ctx.n * ctx.hours;
    auto day_signal = [&](const Day& day) {
        Eigen::MatrixXd x(nt, ctx.d); // rows ordered (sensor, hour)
        for (int v = 0; v < ctx.n; ++v)
            for (int h = 0; h < ctx.hours; ++h)
                x.row(v * ctx.hours + h) = day.hours[static_cast<size_t>(h)].row(v);
        return x;
    };
    auto day_mask = [&](const Day& day) {
        ObservationMask m = ObservationMask::all(nt, ctx.d, true);
        for (int v = 0; v < ctx.n; ++v)
            for (int f = 0; f < ctx.d; ++f)
                for (int h = 0; h < ctx.hours; ++h)
                    m.observed(v * ctx.hours + h, f) = day.lane_mask.observed(v * ctx.d + f, h);
        return m;
    };
    std::vector<GeneralizedSignal> train_signals;
    train_signals.reserve(train.size());
    for (const Day* day : train) train_signals.push_back(day_signal(*day));
    if (train_signals.size() < 2) throw TooFewSamples("product-graph completion needs 2+ training days");

    if (fw == Framework::GRP) {
        JointBasis basis{product_basis, learn_hilbert_basis(train_signals)};
        Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(nt, ctx.d);
        for (const auto& x : train_signals) mean += x;
        mean /= static_cast<double>(train_signals.size());
        std::vector<GeneralizedSignal> centered;
        for (const auto& x : train_signals) centered.push_back(x - mean);
        CovarianceOperator c_x = covariance_from_jpsd(jpsd_periodogram(centered, basis), basis);
        CovarianceOperator c_e = Eigen::MatrixXd::Zero(c_x.rows(), c_x.cols());
        for (const Day* day : test) {
            Eigen::MatrixXd truth = day_signal(*day);
            ObservationMask m = day_mask(*day);
            if (m.count_observed() == m.observed.size()) continue;
            Eigen::VectorXd est = completion_estimate(vectorize(truth - mean), c_x, c_e, m);
            Eigen::MatrixXd composite = mean + unvectorize(est, nt, ctx.d);
            for (Eigen::Index r = 0; r < truth.rows(); ++r)
                for (Eigen::Index c = 0; c < truth.cols(); ++c)
                    if (m.observed(r, c)) composite(r, c) = truth(r, c);
            errors.add(composite, truth, m);
        }
        return;
    }
    // per-feature processing on the product graph
    const Eigen::MatrixXd& phi = product_basis.eigenvectors;
    for (int f = 0; f < ctx.d; ++f) {
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(nt);
        for (const auto& x : train_signals) mean += x.col(f);
        mean /= static_cast<double>(train_signals.size());
        Eigen::VectorXd p = Eigen::VectorXd::Zero(nt);
        for (const auto& x : train_signals)
            p += (phi.transpose() * (x.col(f) - mean)).array().square().matrix();
        p /= static_cast<double>(train_signals.size());
        Eigen::MatrixXd c_x = phi * p.asDiagonal() * phi.transpose();
        Eigen::MatrixXd c_e = Eigen::MatrixXd::Zero(nt, nt);
        for (const Day* day : test) {
            Eigen::MatrixXd full_truth = day_signal(*day);
            ObservationMask full_mask = day_mask(*day);
            ObservationMask m = ObservationMask::all(nt, 1, true);
            for (int r = 0; r < nt; ++r) m.observed(r, 0) = full_mask.observed(r, f);
            if (m.count_observed() == m.observed.size()) continue;
            Eigen::VectorXd truth = full_truth.col(f);
            Eigen::VectorXd est = completion_estimate(truth - mean, c_x, c_e, m);
            Eigen::VectorXd composite = mean + est;
            for (int r = 0; r < nt; ++r)
                if (m.observed(r, 0)) composite(r) = truth(r);
            errors.add(composite, truth, m);
        }
    }
}

std::vector<CurveRow> run_complete(const ExperimentConfig& cfg) {
    CompleteContext ctx;
    Graph graph = build_graph_from_config(cfg.graph, split_seed(cfg.seed, 1));
    ctx.graph_basis = eigendecompose(graph_matrices(graph).laplacian);
    ctx.n = graph.n;
    ctx.hours = cfg.hours_per_day;
    ctx.days = cfg.days;
    if (ctx.hours < 3) throw ConfigError("hours_per_day must be >= 3");
    ctx.cycle_basis = fourier_basis_cycle(ctx.hours);

    if (cfg.data.kind == DataConfig::Kind::EuclideanVertex) {
        GrpModel model = make_euclidean_vertex_model(graph, cfg.data.euclid, split_seed(cfg.seed, 2));
        ctx.all_hours = sample_grp(model, ctx.days * ctx.hours, split_seed(cfg.seed, 3));
        ctx.d = cfg.data.euclid.d;
    } else if (cfg.data.kind == DataConfig::Kind::Csv) {
        ctx.all_hours = complete_samples_only(ingest_csv(cfg.data.path, cfg.data.schema));
        if (static_cast<int>(ctx.all_hours.size()) != ctx.days * ctx.hours)
            throw InconsistentDimensions("CSV sample count must equal days*hours_per_day");
        ctx.d = static_cast<int>(ctx.all_hours.front().cols());
    } else {
        throw ConfigError("complete needs euclidean_vertex or csv data");
    }

    const bool consecutive = cfg.missing.kind == MissingSpec::Kind::Consecutive;
    std::vector<double> sweep_values = consecutive ? cfg.hidden_fractions : cfg.rho_sweep;
    if (sweep_values.empty())
        throw ConfigError("complete experiment needs hidden_fractions or rho values");

    SpectralBasis product_basis;
    if (!consecutive) product_basis = product_graph_basis(ctx.graph_basis, ctx.cycle_basis);
    for (Framework f : cfg.frameworks) {
        if (consecutive && f != Framework::GRP && f != Framework::TV_ZERO &&
            f != Framework::TV_INTERP && f != Framework::GSP)
            throw ConfigError(framework_name(f) + " not valid for consecutive completion");
        if (!consecutive && f != Framework::GRP && f != Framework::TV && f != Framework::GSP)
            throw ConfigError(framework_name(f) + " not valid for uniform completion");
    }

    const double e_run = expected_clipped_run(cfg.missing.q, ctx.hours);
    const int lane_rows = ctx.n * ctx.d;
    const int sweeps = static_cast<int>(sweep_values.size());
    const int reps = cfg.repetitions;
    std::vector<std::vector<CurveRow>> results(static_cast<size_t>(sweeps * reps));

    parallel_run(sweeps * reps, cfg.threads, [&](int task) {
        const int si = task / reps;
        const int rep = task % reps;
        const double sweep_value = sweep_values[static_cast<size_t>(si)];
        std::uint64_t task_seed = split_seed(cfg.seed, 50000 + static_cast<std::uint64_t>(task));

        auto [train_days, test_days] = split_indices(ctx.days, split_seed(task_seed, 0));
        std::vector<Day> days(static_cast<size_t>(ctx.days));
        int test_lanes = 0;
        MissingSpec test_spec = cfg.missing;
        if (consecutive) {
            // negative sweep values carry raw lane counts from the config
            if (sweep_value < 0.0) test_lanes = static_cast<int>(-sweep_value);
            else
                test_lanes = std::clamp(
                    static_cast<int>(std::lround(sweep_value * lane_rows * ctx.hours / e_run)), 0,
                    lane_rows);
        } else {
            test_spec.rho = sweep_value;
        }
        MissingSpec train_spec = cfg.missing; // train_lanes_per_day already in .lanes
        for (int di = 0; di < ctx.days; ++di) {
            Day& day = days[static_cast<size_t>(di)];
            day.hours.assign(ctx.all_hours.begin() + static_cast<long>(di) * ctx.hours,
                             ctx.all_hours.begin() + static_cast<long>(di + 1) * ctx.hours);
            bool is_test = std::find(test_days.begin(), test_days.end(), di) != test_days.end();
            std::uint64_t mask_seed = split_seed(task_seed, 100 + static_cast<std::uint64_t>(di));
            if (consecutive) {
                MissingSpec spec = is_test ? test_spec : train_spec;
                spec.lanes = is_test ? test_lanes : train_spec.lanes;
                day.lane_mask = make_missing_mask(spec, lane_rows, ctx.hours, mask_seed);
            } else {
                day.lane_mask = is_test
                                    ? make_missing_mask(test_spec, lane_rows, ctx.hours, mask_seed)
                                    : ObservationMask::all(lane_rows, ctx.hours, true);
            }
        }
        std::vector<const Day*> train, test;
        for (int di : train_days) train.push_back(&days[static_cast<size_t>(di)]);
        for (int di : test_days) test.push_back(&days[static_cast<size_t>(di)]);

        double hidden_cells = 0.0, total_cells = 0.0;
        for (const Day* day : test) {
            hidden_cells += static_cast<double>(day->lane_mask.observed.size()) -
                            static_cast<double>(day->lane_mask.count_observed());
            total_cells += static_cast<double>(day->lane_mask.observed.size());
        }

        std::vector<CurveRow> rows;
        std::string sweep = consecutive && sweep_value >= 0.0
                                ? format_double(sweep_value)
                                : (consecutive ? std::to_string(test_lanes) + "_lanes"
                                               : format_double(sweep_value));
        for (Framework f : cfg.frameworks) {
            CellErrors errors;
            if (consecutive) {
                switch (f) {
                    case Framework::GRP: complete_grp(ctx, train, test, errors); break;
                    case Framework::TV_ZERO: complete_tv(ctx, train, test, false, errors); break;
                    case Framework::TV_INTERP: complete_tv(ctx, train, test, true, errors); break;
                    default: complete_gsp(ctx, train, test, errors); break;
                }
            } else {
                complete_product_graph(ctx, product_basis, f, train, test, errors);
            }
            double err = cfg.metrics_hidden_only ? errors.hidden_err : errors.all_err;
            double sig = cfg.metrics_hidden_only ? errors.hidden_sig : errors.all_sig;
            if (sig == 0.0) throw ZeroSignal("no hidden signal energy to score");
            std::string fname = framework_name(f);
            rows.push_back({si, sweep, fname, rep, "normalized_error", std::sqrt(err / sig)});
            rows.push_back({si, sweep, fname, rep, "relative_error", std::sqrt(err / sig)});
            rows.push_back({si, sweep, fname, rep, "snr_db", snr_from_power(sig, err)});
            rows.push_back({si, sweep, fname, rep, "all_cells_normalized_error",
                            std::sqrt(errors.all_err / errors.all_sig)});
            rows.push_back({si, sweep, fname, rep, "hidden_fraction", hidden_cells / total_cells});
        }
        results[static_cast<size_t>(task)] = std::move(rows);
    });
    std::vector<CurveRow> rows;
    for (auto& part : results)
        for (auto& r : part) rows.push_back(std::move(r));
    std::stable_sort(rows.begin(), rows.end(), [&](const CurveRow& a, const CurveRow& b) {
        return std::tuple{a.sweep_idx, a.rep} < std::tuple{b.sweep_idx, b.rep};
    });
    return rows;
}

// ---- continuous recovery -------------------------------------------------------

struct Plan {
    SamplePlan plan;
    std::vector<std::vector<int>> grid_indices; // equispaced only
};

Plan draw_plan(const SamplingConfig& sc, int n, Rng& rng) {
    const double pi = 3.14159265358979323846;
    Plan p;
    p.plan.times.resize(static_cast<size_t>(n));
    const int m = sc.samples_per_vertex;
    if (sc.scheme == SamplingConfig::Scheme::Equispaced) {
        p.grid_indices.resize(static_cast<size_t>(n));
        const int grid = 2 * m;
        for (int v = 0; v < n; ++v) {
            std::vector<int> idx(static_cast<size_t>(grid));
            std::iota(idx.begin(), idx.end(), 0);
            for (int i = 0; i < m; ++i) {
                int j = i + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(grid - i)));
                std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
            }
            idx.resize(static_cast<size_t>(m));
            std::sort(idx.begin(), idx.end());
            p.grid_indices[static_cast<size_t>(v)] = idx;
            for (int i : idx)
                p.plan.times[static_cast<size_t>(v)].push_back(-pi + 2.0 * i * pi / (2.0 * m - 1.0));
        }
    } else {
        for (int v = 0; v < n; ++v) {
            auto& ts = p.plan.times[static_cast<size_t>(v)];
            ts.resize(static_cast<size_t>(m));
            for (int i = 0; i < m; ++i) ts[static_cast<size_t>(i)] = rng.uniform(-pi, pi);
            std::sort(ts.begin(), ts.end());
        }
    }
    return p;
}

// stacks signal values at plan points, vertex-major (design_matrix row order)
Eigen::VectorXd observe_at_plan(const ContinuousModel& model, const Eigen::MatrixXd& coeffs,
                                const SamplePlan& plan) {
    Eigen::VectorXd out(plan.total_count());
    Eigen::Index row = 0;
    for (size_t v = 0; v < plan.times.size(); ++v) {
        Eigen::MatrixXd vals = eval_continuous(model, coeffs, plan.times[v]);
        for (size_t j = 0; j < plan.times[v].size(); ++j)
            out(row++) = vals(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(j));
    }
    return out;
}

// posterior means for a batch of observation columns under fixed (p, sigma2)
Eigen::MatrixXd posterior_means(const Eigen::MatrixXd& b, const Eigen::MatrixXd& y,
                                const Eigen::VectorXd& p, double sigma2) {
    Eigen::MatrixXd a = (b.transpose() * b) / sigma2;
    a.diagonal() += p.cwiseInverse();
    return a.llt().solve(b.transpose() * y) / sigma2;
}

// cycle-harmonic time-vertex design matrix on the equispaced grid
Eigen::MatrixXd tv_design(const Plan& plan, const SpectralBasis& graph_basis,
                          const Eigen::MatrixXd& psi_grid, int m0) {
    const int n = graph_basis.dim();
    Eigen::MatrixXd b(plan.plan.total_count(), static_cast<Eigen::Index>(n) * m0);
    Eigen::Index row = 0;
    for (int v = 0; v < n; ++v) {
        for (int gi : plan.grid_indices[static_cast<size_t>(v)]) {
            for (int k = 0; k < n; ++k)
                for (int tau = 0; tau < m0; ++tau)
                    b(row, static_cast<Eigen::Index>(k) * m0 + tau) =
                        graph_basis.eigenvectors(v, k) * psi_grid(gi, tau);
            ++row;
        }
    }
    return b;
}

std::vector<double> linspace(double a, double b, int count) {
    std::vector<double> out(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i)
        out[static_cast<size_t>(i)] = a + (b - a) * i / (count - 1.0);
    return out;
}

std::vector<CurveRow> run_continuous(const ExperimentConfig& cfg) {
    if (cfg.data.kind != DataConfig::Kind::Continuous)
        throw ConfigError("continuous experiment needs continuous data");
    Graph graph = build_graph_from_config(cfg.graph, split_seed(cfg.seed, 1));
    SpectralBasis graph_basis = eigendecompose(graph_matrices(graph).laplacian);
    const int n = graph.n;
    const int m0 = cfg.m0;
    const int m_samp = cfg.sampling.samples_per_vertex;
    const bool equispaced = cfg.sampling.scheme == SamplingConfig::Scheme::Equispaced;
    const std::vector<double> fine = linspace(-3.14159265358979323846, 3.14159265358979323846, 512);

    // grid harmonics for TV (first m0 columns of the 2m-cycle basis)
    Eigen::MatrixXd psi_grid;
    if (equispaced) {
        SpectralBasis cyc = fourier_basis_cycle(2 * m_samp);
        psi_grid = cyc.eigenvectors.leftCols(std::min(m0, 2 * m_samp));
    }

    const int reps = cfg.repetitions;
    std::vector<std::vector<CurveRow>> results(static_cast<size_t>(reps));
    parallel_run(reps, cfg.threads, [&](int rep) {
        std::uint64_t draw_seed = split_seed(cfg.seed, 9000 + static_cast<std::uint64_t>(rep));
        ContinuousModel model =
            make_continuous_model(graph_basis, cfg.data.continuous, split_seed(draw_seed, 1));
        Rng rng(split_seed(draw_seed, 2));

        Plan train_plan = draw_plan(cfg.sampling, n, rng);
        Plan test_plan = draw_plan(cfg.sampling, n, rng);

        std::vector<Eigen::MatrixXd> train_coeffs, test_coeffs;
        for (int i = 0; i < cfg.train_signals; ++i)
            train_coeffs.push_back(
                sample_continuous_coeffs(model, split_seed(draw_seed, 100 + static_cast<std::uint64_t>(i))));
        for (int i = 0; i < cfg.test_signals; ++i)
            test_coeffs.push_back(sample_continuous_coeffs(
                model, split_seed(draw_seed, 100000 + static_cast<std::uint64_t>(i))));

        Eigen::MatrixXd train_obs(train_plan.plan.total_count(), cfg.train_signals);
        for (int i = 0; i < cfg.train_signals; ++i)
            train_obs.col(i) = observe_at_plan(model, train_coeffs[static_cast<size_t>(i)],
                                               train_plan.plan);
        const double power = train_obs.array().square().mean();
        const double noise_var = power / std::pow(10.0, cfg.snr_db / 10.0);
        const double noise_sd = std::sqrt(noise_var);
        for (Eigen::Index r = 0; r < train_obs.rows(); ++r)
            for (Eigen::Index c = 0; c < train_obs.cols(); ++c)
                train_obs(r, c) += noise_sd * rng.gaussian();
        Eigen::MatrixXd test_obs(test_plan.plan.total_count(), cfg.test_signals);
        for (int i = 0; i < cfg.test_signals; ++i)
            test_obs.col(i) =
                observe_at_plan(model, test_coeffs[static_cast<size_t>(i)], test_plan.plan);
        for (Eigen::Index r = 0; r < test_obs.rows(); ++r)
            for (Eigen::Index c = 0; c < test_obs.cols(); ++c)
                test_obs(r, c) += noise_sd * rng.gaussian();

        // truth on the fine grid
        std::vector<Eigen::MatrixXd> truth;
        truth.reserve(static_cast<size_t>(cfg.test_signals));
        for (int i = 0; i < cfg.test_signals; ++i)
            truth.push_back(eval_continuous(model, test_coeffs[static_cast<size_t>(i)], fine));

        auto mean_rel_error = [&](const std::vector<Eigen::MatrixXd>& estimates) {
            double acc = 0.0;
            for (int i = 0; i < cfg.test_signals; ++i)
                acc += (estimates[static_cast<size_t>(i)] - truth[static_cast<size_t>(i)]).norm() /
                       truth[static_cast<size_t>(i)].norm();
            return acc / cfg.test_signals;
        };

        std::vector<CurveRow> rows;
        std::string sweep = format_double(cfg.snr_db);
        for (Framework fw : cfg.frameworks) {
            std::vector<Eigen::MatrixXd> estimates(static_cast<size_t>(cfg.test_signals));
            if (fw == Framework::GRP) {
                ContinuousTrigSpec spec{m0};
                Eigen::MatrixXd b_train = design_matrix(train_plan.plan, graph_basis, spec);
                VemResult em = variational_em_pooled(b_train, train_obs, cfg.em);
                Eigen::MatrixXd b_test = design_matrix(test_plan.plan, graph_basis, spec);
                Eigen::MatrixXd mu = posterior_means(b_test, test_obs, em.p, em.sigma2);
                for (int i = 0; i < cfg.test_signals; ++i)
                    estimates[static_cast<size_t>(i)] =
                        recover_continuous(mu.col(i), graph_basis, spec, fine);
            } else if (fw == Framework::TS) {
                for (auto& e : estimates)
                    e = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(fine.size()));
                Eigen::Index train_row = 0, test_row = 0;
                for (int v = 0; v < n; ++v) {
                    const auto& ts_train = train_plan.plan.times[static_cast<size_t>(v)];
                    const auto& ts_test = test_plan.plan.times[static_cast<size_t>(v)];
                    Eigen::MatrixXd b_train = design_matrix_ts(ts_train, m0);
                    Eigen::MatrixXd y_v = train_obs.middleRows(
                        train_row, static_cast<Eigen::Index>(ts_train.size()));
                    VemResult em = variational_em_pooled(b_train, y_v, cfg.em);
                    Eigen::MatrixXd b_test = design_matrix_ts(ts_test, m0);
                    Eigen::MatrixXd y_t =
                        test_obs.middleRows(test_row, static_cast<Eigen::Index>(ts_test.size()));
                    Eigen::MatrixXd mu = posterior_means(b_test, y_t, em.p, em.sigma2);
                    for (int i = 0; i < cfg.test_signals; ++i)
                        estimates[static_cast<size_t>(i)].row(v) =
                            recover_continuous_ts(mu.col(i), m0, fine).transpose();
                    train_row += static_cast<Eigen::Index>(ts_train.size());
                    test_row += static_cast<Eigen::Index>(ts_test.size());
                }
            } else if (fw == Framework::TV) {
                Eigen::MatrixXd b_train = tv_design(train_plan, graph_basis, psi_grid,
                                                    static_cast<int>(psi_grid.cols()));
                VemResult em = variational_em_pooled(b_train, train_obs, cfg.em);
                Eigen::MatrixXd b_test = tv_design(test_plan, graph_basis, psi_grid,
                                                   static_cast<int>(psi_grid.cols()));
                Eigen::MatrixXd mu = posterior_means(b_test, test_obs, em.p, em.sigma2);
                // coefficients -> full grid values -> linear interpolation
                const int grid = 2 * m_samp;
                std::vector<double> grid_times(static_cast<size_t>(grid));
                const double pi = 3.14159265358979323846;
                for (int i = 0; i < grid; ++i)
                    grid_times[static_cast<size_t>(i)] = -pi + 2.0 * i * pi / (2.0 * m_samp - 1.0);
                for (int i = 0; i < cfg.test_signals; ++i) {
                    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                   Eigen::RowMajor>>
                        c(mu.col(i).data(), n, psi_grid.cols());
                    Eigen::MatrixXd grid_vals =
                        graph_basis.eigenvectors * (c * psi_grid.transpose());
                    Eigen::MatrixXd est(n, static_cast<Eigen::Index>(fine.size()));
                    for (size_t j = 0; j < fine.size(); ++j) {
                        double t = fine[j];
                        auto hi_it =
                            std::lower_bound(grid_times.begin(), grid_times.end(), t);
                        Eigen::Index hi = std::min<Eigen::Index>(
                            static_cast<Eigen::Index>(hi_it - grid_times.begin()), grid - 1);
                        Eigen::Index lo = std::max<Eigen::Index>(hi - 1, 0);
                        double w = hi == lo ? 0.0
                                            : (t - grid_times[static_cast<size_t>(lo)]) /
                                                  (grid_times[static_cast<size_t>(hi)] -
                                                   grid_times[static_cast<size_t>(lo)]);
                        est.col(static_cast<Eigen::Index>(j)) =
                            (1.0 - w) * grid_vals.col(lo) + w * grid_vals.col(hi);
                    }
                    estimates[static_cast<size_t>(i)] = std::move(est);
                }
            } else {
                throw ConfigError(framework_name(fw) + " not valid for continuous recovery");
            }
            rows.push_back({0, sweep, framework_name(fw), rep, "relative_error",
                            mean_rel_error(estimates)});
        }
        results[static_cast<size_t>(rep)] = std::move(rows);
    });
    std::vector<CurveRow> rows;
    for (auto& part : results)
        for (auto& r : part) rows.push_back(std::move(r));
    std::stable_sort(rows.begin(), rows.end(), [&](const CurveRow& a, const CurveRow& b) {
        return std::tuple{a.sweep_idx, a.rep} < std::tuple{b.sweep_idx, b.rep};
    });
    return rows;
}

} // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
    if (!cfg.seed_set) throw ConfigError("an explicit seed is required");
    auto start = std::chrono::steady_clock::now();
    std::vector<CurveRow> rows;
    switch (cfg.kind) {
        case ExperimentKind::Denoise: rows = run_denoise(cfg); break;
        case ExperimentKind::Complete: rows = run_complete(cfg); break;
        case ExperimentKind::Continuous: rows = run_continuous(cfg); break;
    }
    double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    RunResult out;
    out.curves_csv = curves_to_csv(rows);
    ordered_json report;
    report["experiment"] = cfg.kind == ExperimentKind::Denoise
                               ? "denoise"
                               : (cfg.kind == ExperimentKind::Complete ? "complete" : "continuous");
    report["seed"] = cfg.seed;
    report["repetitions"] = cfg.repetitions;
    {
        ordered_json fws = ordered_json::array();
        for (Framework f : cfg.frameworks) fws.push_back(framework_name(f));
        report["frameworks"] = fws;
    }
    report["aggregates"] = aggregate_rows(rows);
    if (cfg.kind == ExperimentKind::Complete) {
        double hsum = 0.0, hmin = 1.0, hmax = 0.0;
        int hcount = 0;
        for (const auto& r : rows) {
            if (r.metric != "hidden_fraction") continue;
            hsum += r.value;
            hmin = std::min(hmin, r.value);
            hmax = std::max(hmax, r.value);
            ++hcount;
        }
        if (hcount > 0) {
            ordered_json stats;
            stats["mean"] = hsum / hcount;
            stats["min"] = hmin;
            stats["max"] = hmax;
            report["hidden_fraction_stats"] = stats;
        }
    }
    report["runtime_seconds"] = runtime;
    out.report_json = report.dump(2) + "\n";
    return out;
}

void run_experiment_to_dir(const ExperimentConfig& cfg, const std::string& out_dir) {
    RunResult res = run_experiment(cfg);
    std::filesystem::create_directories(out_dir);
    write_text_file(out_dir + "/report.json", res.report_json);
    write_text_file(out_dir + "/curves.csv", res.curves_csv);
}

} // namespace ggsp
