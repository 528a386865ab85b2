#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "params.hpp"

namespace reprsize::mc {

struct FiniteInstance {
    int p = 400;
    int n_u = 300;
    int n_l = 300;
    int m = 400;
    double lambda = 5.0;
    double eta = 1.0;
    double w_star_norm = 3.0;
    double noise_sd = 1.0;
    std::uint64_t seed = 0;
};

void validate(const FiniteInstance& inst);

struct InstanceData {
    Eigen::MatrixXd X_u;  // n_u x p
    Eigen::MatrixXd X_l;  // n_l x p
    Eigen::VectorXd w_star;
    Eigen::VectorXd v;
    Eigen::VectorXd y;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t trial_seed(std::uint64_t base, std::uint64_t index);

InstanceData generate_instance(const FiniteInstance& inst);

// All p directions ordered for truncation: sample eigenvectors by decreasing eigenvalue, then a
// Haar-random orthonormal basis of the nullspace. Leading m columns give the rank-m basis, so
// bases for different m are nested.
struct PcaBasis {
    Eigen::MatrixXd basis;         // p x p, orthonormal columns
    Eigen::VectorXd eigenvalues;   // of X'X/n, descending, length p (zeros past the rank)
    int rank;
};

PcaBasis pca_basis(const Eigen::MatrixXd& X, std::uint64_t completion_seed);
Eigen::MatrixXd pretrain_pca(const Eigen::MatrixXd& X_u, int m, std::uint64_t completion_seed);

// Min-norm least squares of y on X*U (thin SVD, cutoff 1e-10 * sigma_max), mapped back to R^p.
Eigen::VectorXd pretrained_regression(const Eigen::MatrixXd& X_l, const Eigen::VectorXd& y,
                                      const Eigen::MatrixXd& U);

// Unit test-spike directions realising the requested alignments with w* and v = e_1.
std::vector<Eigen::VectorXd> test_spike_vectors(int p, double eta, const TestSpikeSpec& test);

struct TrialResult {
    double e_est_emp = 0.0;
    double e_gen_emp = 0.0;
    double e_train_emp = 0.0;
    double spike_overlap_sq = 0.0;
};

struct Aggregate {
    TrialResult mean;
    TrialResult sd;  // sample standard deviation over trials
    int n_trials = 0;
};

// Errors of a fitted estimate.
TrialResult measure(const InstanceData& d, const Eigen::VectorXd& w_hat, const std::vector<Eigen::VectorXd>& spikes,
                    const TestSpikeSpec& test, double noise_var);

Aggregate aggregate(const std::vector<TrialResult>& trials);

enum class Method { pretrained, pcr, ols };

// Representation size for a retained fraction; alpha = 0 keeps a single component.
int components_for(double alpha, int p);

// One trial per index; the m of `inst` is ignored and every alpha in `alphas` is fitted on the
// same draw. Result[k] aggregates alphas[k].
std::vector<Aggregate> run_alpha_curve(const FiniteInstance& inst, const std::vector<double>& alphas,
                                       int n_trials, const TestSpikeSpec& test, Method method = Method::pretrained,
                                       int threads = 1);

Aggregate run_trials(const FiniteInstance& inst, int n_trials, const TestSpikeSpec& test, int threads = 1);

struct Baselines {
    Aggregate pretrained, pcr, ols;
};

Baselines baselines(const FiniteInstance& inst, int n_trials, const TestSpikeSpec& test, int threads = 1);

}  // namespace reprsize::mc
