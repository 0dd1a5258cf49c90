#ifndef GGSP_EXPERIMENTS_HPP
#define GGSP_EXPERIMENTS_HPP

#include "ggsp/estimation.hpp"
#include "ggsp/graph.hpp"
#include "ggsp/rng.hpp"
#include "ggsp/wiener.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ggsp {

// Missing-data models ---------------------------------------------------------

struct MissingSpec {
    enum class Kind { Consecutive, Uniform };
    Kind kind = Kind::Uniform;
    double q = 1.0 / 12.0; // geometric run-length parameter (consecutive)
    int lanes = 0;         // rows hidden per draw (consecutive)
    double rho = 0.0;      // per-cell hiding probability (uniform)
};

/// Draws an observation mask of the given shape. Consecutive model: `lanes`
/// distinct rows each lose a run of geometric(q) cells starting at a uniform
/// position (clipped at the right boundary). Uniform model: each cell is
/// hidden independently with probability rho.
ObservationMask make_missing_mask(const MissingSpec& spec, Eigen::Index rows, Eigen::Index cols,
                                  std::uint64_t seed);

/// Expected number of cells hidden by one clipped geometric(q) run on a row
/// of the given length.
double expected_clipped_run(double q, int cols);

// Metrics ----------------------------------------------------------------------

struct MetricEntry {
    double snr_db = 0.0;
    double normalized_error = 0.0;
    double relative_error = 0.0;
    std::optional<double> input_snr_db;
};

/// Error metrics of an estimate against the truth; perfect recovery reports
/// the 300 dB sentinel. Throws ZeroSignal when the truth is identically zero.
MetricEntry metrics(const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth,
                    const Eigen::MatrixXd* noisy_input = nullptr);

// Synthetic data ------------------------------------------------------------------

struct EuclideanVertexSpec {
    int d = 3;
    std::vector<double> feature_eigenvalues; // ascending; default {0.5, 1.5, 4.5}
    enum class BasisMode { NearCycle, Random };
    BasisMode basis_mode = BasisMode::NearCycle;
    double rotation_deg = 20.0; // basis perturbation for NearCycle
    double graph_decay = 1.0;   // p(k,tau) = scale * exp(-graph_decay lambda_k) mu_tau
    double scale = 1.0;
};

/// JWSS model on the given graph with a non-diagonal feature covariance whose
/// eigenbasis is drawn per the spec (deterministic in the seed).
GrpModel make_euclidean_vertex_model(const Graph& g, const EuclideanVertexSpec& spec,
                                     std::uint64_t seed);

struct ContinuousSpec {
    int num_beta = 3;
    double beta_min = 1.0;
    double beta_max = 15.0;
    double graph_decay = 1.0; // sigma^2_{k,l} = scale * exp(-graph_decay lambda_k) / l^2
    double scale = 1.0;
};

/// X(t) = sum_{k,l} d_{kl} phi_k sin(beta_l t) on [-pi, pi]; the beta vector
/// is drawn once per model, the coefficients d_{kl} per signal.
struct ContinuousModel {
    SpectralBasis graph_basis;
    Eigen::VectorXd beta;
    Eigen::MatrixXd coeff_sd; // n x num_beta standard deviations of d_{kl}
};

ContinuousModel make_continuous_model(const SpectralBasis& graph_basis,
                                      const ContinuousSpec& spec, std::uint64_t seed);
Eigen::MatrixXd sample_continuous_coeffs(const ContinuousModel& model, std::uint64_t seed);
/// Evaluates the signal with the given coefficient draw; returns vertices x
/// times.
Eigen::MatrixXd eval_continuous(const ContinuousModel& model, const Eigen::MatrixXd& coeffs,
                                const std::vector<double>& times);

// Ingestion -----------------------------------------------------------------------

enum class CsvSchema { Long, Matrix };

struct Dataset {
    std::vector<GeneralizedSignal> samples; // missing entries are NaN
    std::vector<ObservationMask> observed;
};

/// Long schema: columns `sample,vertex,coord,value`; omitted cells are
/// missing. Matrix schema: blocks of rows separated by blank lines, one
/// sample per block.
Dataset ingest_csv(const std::string& path, CsvSchema schema);

// Experiment configuration -----------------------------------------------------------

enum class ExperimentKind { Denoise, Complete, Continuous };
enum class Framework { GRP, TV, TV_ZERO, TV_INTERP, GSP, TS };

std::string framework_name(Framework f);

struct GraphConfig {
    enum class Kind { ErdosRenyi, Cycle, Path, EdgeList, Knn };
    Kind kind = Kind::ErdosRenyi;
    int n = 30;
    double p = 0.5;
    bool connected = true;
    int t = 24;
    std::string path;    // edge list file
    std::string coords;  // knn coordinate CSV
    int k = 5;
};

struct DataConfig {
    enum class Kind { EuclideanVertex, Csv, Continuous };
    Kind kind = Kind::EuclideanVertex;
    EuclideanVertexSpec euclid;
    int train = 200;
    int test = 200;
    std::string path;
    CsvSchema schema = CsvSchema::Long;
    ContinuousSpec continuous;
};

struct SamplingConfig {
    enum class Scheme { Equispaced, Uniform };
    Scheme scheme = Scheme::Equispaced;
    int samples_per_vertex = 60;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Denoise;
    std::vector<Framework> frameworks;
    GraphConfig graph;
    DataConfig data;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int repetitions = 1;
    int threads = 0; // 0 = hardware concurrency

    // denoise
    std::vector<double> input_snr_db{-5.0, 0.0, 5.0, 10.0};

    // complete
    int days = 10;
    int hours_per_day = 24;
    MissingSpec missing;
    std::vector<double> hidden_fractions; // consecutive sweep (lane counts derived)
    std::vector<double> rho_sweep;        // uniform sweep
    bool metrics_hidden_only = true;

    // continuous
    SamplingConfig sampling;
    double snr_db = 8.6;
    int m0 = 20;
    int train_signals = 60;
    int test_signals = 60;
    VemOptions em;
};

/// Parses a config JSON document; throws ConfigError on unknown or invalid
/// fields.
ExperimentConfig parse_config_json(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

// Execution ------------------------------------------------------------------------

struct RunResult {
    std::string report_json;
    std::string curves_csv; // header sweep,framework,rep,metric,value
};

RunResult run_experiment(const ExperimentConfig& cfg);
/// Runs and writes report.json and curves.csv into out_dir (created if
/// needed).
void run_experiment_to_dir(const ExperimentConfig& cfg, const std::string& out_dir);

// Pipeline pieces exposed for reuse and direct testing -------------------------------

Graph build_graph_from_config(const GraphConfig& gc, std::uint64_t seed);

/// Adds white Gaussian noise of the given per-entry variance.
GeneralizedSignal add_awgn(const GeneralizedSignal& x, double noise_var, Rng& rng);

/// Seeded 50/50 index split (first half train, second half test).
std::pair<std::vector<int>, std::vector<int>> split_indices(int count, std::uint64_t seed);

/// Wiener denoising of every test signal: centers with the training mean,
/// estimates the JPSD by periodogram in (graph_basis, hilbert_basis),
/// subtracts the known white-noise floor, filters, and restores the mean.
std::vector<GeneralizedSignal> wiener_denoise_pipeline(
    const SpectralBasis& graph_basis, const SpectralBasis& hilbert_basis,
    const std::vector<GeneralizedSignal>& train_noisy,
    const std::vector<GeneralizedSignal>& test_noisy, double noise_var);

/// Joint basis for a Cartesian product graph assembled from the factor bases
/// (eigenvalues add); deterministic even though the product spectrum is
/// degenerate.
SpectralBasis product_graph_basis(const SpectralBasis& g, const SpectralBasis& h);

} // namespace ggsp

#endif // GGSP_EXPERIMENTS_HPP
