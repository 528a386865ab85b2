#include "montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <span>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <fmt/format.h>

#include "errors.hpp"
#include "parallel.hpp"

namespace reprsize::mc {
namespace {

constexpr double kRankTol = 1e-10;

Eigen::MatrixXd gaussian(int rows, int cols, std::mt19937_64& rng) {
    std::normal_distribution<double> n01;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = n01(rng);
    return m;
}

// Orthonormalise columns without changing their order or (up to sign convention) direction.
Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& a) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols());
    const Eigen::MatrixXd& r = qr.matrixQR();
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return q;
}

double pairwise_sum(std::span<const double> x) {
    if (x.size() <= 8) {
        double s = 0.0;
        for (double v : x) s += v;
        return s;
    }
    const std::size_t h = x.size() / 2;
    return pairwise_sum(x.first(h)) + pairwise_sum(x.subspan(h));
}

Eigen::VectorXd min_norm_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& y) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(a.cols());
    if (s.size() == 0 || s(0) == 0.0) return out;
    const double cutoff = kRankTol * s(0);
    const Eigen::VectorXd uty = svd.matrixU().transpose() * y;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > cutoff) out += svd.matrixV().col(i) * (uty(i) / s(i));
    return out;
}

// Min-norm least squares for every leading column block of one design matrix. Blocks no wider
// than the sample count share one QR factorisation; wider blocks solve the dual Gram system.
// Numerically rank-deficient blocks fall back to the SVD.
class NestedMinNorm {
public:
    NestedMinNorm(const Eigen::MatrixXd& z, const Eigen::VectorXd& y) : z_(z), y_(y) {
        qr_.compute(z.leftCols(std::min(z.rows(), z.cols())));
        qty_ = qr_.householderQ().transpose() * y;
    }

    Eigen::VectorXd solve(Eigen::Index m) const {
        const auto a = z_.leftCols(m);
        if (m <= z_.rows()) {
            const auto diag = qr_.matrixQR().diagonal().head(m).cwiseAbs();
            if (diag.minCoeff() > kRankTol * diag.maxCoeff())
                return qr_.matrixQR().topLeftCorner(m, m).triangularView<Eigen::Upper>().solve(qty_.head(m));
        } else {
            Eigen::MatrixXd g = Eigen::MatrixXd::Zero(z_.rows(), z_.rows());
            g.selfadjointView<Eigen::Lower>().rankUpdate(a);
            const Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(g);
            if (llt.info() == Eigen::Success && llt.rcond() > kGramRcond) return a.transpose() * llt.solve(y_);
        }
        return min_norm_solve(a, y_);
    }

private:
    static constexpr double kGramRcond = 1e-12;
    const Eigen::MatrixXd& z_;
    const Eigen::VectorXd& y_;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr_;
    Eigen::VectorXd qty_;
};

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t base, std::uint64_t index) {
    return splitmix64(splitmix64(base) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

void validate(const FiniteInstance& inst) {
    if (inst.p < 2 || inst.n_u < 1 || inst.n_l < 1) throw DomainError("instance: need p >= 2, n_u >= 1, n_l >= 1");
    if (inst.m < 1 || inst.m > inst.p) throw DomainError(fmt::format("instance: m = {} outside [1, p]", inst.m));
    if (!(inst.lambda > 1.0)) throw DomainError("instance: lambda must exceed 1");
    if (!(inst.eta >= 0.0 && inst.eta <= 1.0)) throw DomainError("instance: eta outside [0,1]");
    if (!(inst.w_star_norm >= 0.0) || !(inst.noise_sd >= 0.0)) throw DomainError("instance: negative scale");
}

InstanceData generate_instance(const FiniteInstance& inst) {
    validate(inst);
    std::mt19937_64 rng(inst.seed);
    const double boost = std::sqrt(inst.lambda);
    InstanceData d;
    // Sigma^{1/2} = I + (sqrt(lambda) - 1) v v' with v = e_1: scale the first column.
    d.X_u = gaussian(inst.n_u, inst.p, rng);
    d.X_u.col(0) *= boost;
    d.X_l = gaussian(inst.n_l, inst.p, rng);
    d.X_l.col(0) *= boost;
    d.v = Eigen::VectorXd::Unit(inst.p, 0);
    d.w_star = Eigen::VectorXd::Zero(inst.p);
    d.w_star(0) = inst.w_star_norm * std::sqrt(inst.eta);
    d.w_star(1) = inst.w_star_norm * std::sqrt(1.0 - inst.eta);
    const Eigen::MatrixXd xi = gaussian(inst.n_l, 1, rng);
    d.y = d.X_l * d.w_star + inst.noise_sd * xi.col(0);
    return d;
}

PcaBasis pca_basis(const Eigen::MatrixXd& X, std::uint64_t completion_seed) {
    const Eigen::Index n = X.rows(), p = X.cols();
    PcaBasis out;
    out.eigenvalues = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd top;
    if (n >= p) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es((X.transpose() * X) / static_cast<double>(n));
        if (es.info() != Eigen::Success) throw NumericError("pca: eigensolver failed");
        const Eigen::VectorXd ev = es.eigenvalues().reverse();
        const double tol = kRankTol * std::max(ev(0), 0.0);
        int r = 0;
        while (r < p && ev(r) > tol) ++r;
        out.eigenvalues.head(r) = ev.head(r);
        top = es.eigenvectors().rowwise().reverse().leftCols(r);
    } else {
        // Fewer samples than features: diagonalise the n x n Gram matrix and lift.
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es((X * X.transpose()) / static_cast<double>(n));
        if (es.info() != Eigen::Success) throw NumericError("pca: eigensolver failed");
        const Eigen::VectorXd ev = es.eigenvalues().reverse();
        const Eigen::MatrixXd vecs = es.eigenvectors().rowwise().reverse();
        const double tol = kRankTol * std::max(ev(0), 0.0);
        int r = 0;
        while (r < n && ev(r) > tol) ++r;
        out.eigenvalues.head(r) = ev.head(r);
        Eigen::MatrixXd lifted = X.transpose() * vecs.leftCols(r);
        for (int j = 0; j < r; ++j) lifted.col(j) /= std::sqrt(static_cast<double>(n) * ev(j));
        top = orthonormalize(lifted);
    }
    out.rank = static_cast<int>(top.cols());
    out.basis.resize(p, p);
    out.basis.leftCols(out.rank) = top;
    const Eigen::Index k = p - out.rank;
    if (k > 0) {
        std::mt19937_64 rng(completion_seed);
        Eigen::MatrixXd g = gaussian(static_cast<int>(p), static_cast<int>(k), rng);
        g -= top * (top.transpose() * g);
        Eigen::MatrixXd q = orthonormalize(g);
        q -= top * (top.transpose() * q);  // one more pass against roundoff leakage
        out.basis.rightCols(k) = orthonormalize(q);
    }
    return out;
}

Eigen::MatrixXd pretrain_pca(const Eigen::MatrixXd& X_u, int m, std::uint64_t completion_seed) {
    if (m < 1 || m > X_u.cols()) throw DomainError("pretrain_pca: m outside [1, p]");
    return pca_basis(X_u, completion_seed).basis.leftCols(m);
}

Eigen::VectorXd pretrained_regression(const Eigen::MatrixXd& X_l, const Eigen::VectorXd& y,
                                      const Eigen::MatrixXd& U) {
    if (X_l.cols() != U.rows() || X_l.rows() != y.size()) throw DomainError("pretrained_regression: shape mismatch");
    const Eigen::MatrixXd z = X_l * U;
    return U * NestedMinNorm(z, y).solve(z.cols());
}

std::vector<Eigen::VectorXd> test_spike_vectors(int p, double eta, const TestSpikeSpec& test) {
    validate(test, eta);
    const int t = static_cast<int>(test.spikes.size());
    if (t > 0 && p < 3 + t) throw DomainError("test spikes need p >= 3 + number of spikes");
    std::vector<Eigen::VectorXd> out;
    const double rho = std::sqrt(eta);
    for (int i = 0; i < t; ++i) {
        const auto& s = test.spikes[i];
        Eigen::VectorXd u = Eigen::VectorXd::Zero(p);
        u(0) = s.rho_v_new;
        if (eta < 1.0) {
            u(1) = (s.rho_w_new - rho * s.rho_v_new) / std::sqrt(1.0 - eta);
        } else if (std::abs(s.rho_w_new - s.rho_v_new) > 1e-9) {
            throw DomainError("with eta = 1 the test spike must align equally with w* and v");
        }
        const double rest = 1.0 - u(0) * u(0) - u(1) * u(1);
        if (rest < -1e-12) throw DomainError("test spike alignments not realisable");
        u(2 + i) = std::sqrt(std::max(0.0, rest));
        out.push_back(u);
    }
    return out;
}

TrialResult measure(const InstanceData& d, const Eigen::VectorXd& w_hat, const std::vector<Eigen::VectorXd>& spikes,
                    const TestSpikeSpec& test, double noise_var) {
    TrialResult r;
    const Eigen::VectorXd diff = d.w_star - w_hat;
    r.e_est_emp = diff.squaredNorm();
    double bias = 0.0;
    for (std::size_t i = 0; i < spikes.size(); ++i) {
        const double a = diff.dot(spikes[i]);
        bias += (test.spikes[i].nu - 1.0) * a * a;
    }
    r.e_gen_emp = r.e_est_emp + bias + noise_var;
    r.e_train_emp = (d.y - d.X_l * w_hat).squaredNorm() / static_cast<double>(d.y.size());
    return r;
}

Aggregate aggregate(const std::vector<TrialResult>& trials) {
    Aggregate a;
    a.n_trials = static_cast<int>(trials.size());
    if (trials.empty()) return a;
    const double n = static_cast<double>(trials.size());
    std::vector<double> buf(trials.size());
    auto stats = [&](double TrialResult::*field, double& mean, double& sd) {
        for (std::size_t i = 0; i < trials.size(); ++i) buf[i] = trials[i].*field;
        mean = pairwise_sum(buf) / n;
        for (std::size_t i = 0; i < trials.size(); ++i) buf[i] = (trials[i].*field - mean) * (trials[i].*field - mean);
        sd = trials.size() > 1 ? std::sqrt(pairwise_sum(buf) / (n - 1.0)) : 0.0;
    };
    stats(&TrialResult::e_est_emp, a.mean.e_est_emp, a.sd.e_est_emp);
    stats(&TrialResult::e_gen_emp, a.mean.e_gen_emp, a.sd.e_gen_emp);
    stats(&TrialResult::e_train_emp, a.mean.e_train_emp, a.sd.e_train_emp);
    stats(&TrialResult::spike_overlap_sq, a.mean.spike_overlap_sq, a.sd.spike_overlap_sq);
    return a;
}

int components_for(double alpha, int p) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("alpha outside [0,1]");
    return std::clamp(static_cast<int>(std::lround(alpha * p)), 1, p);
}

std::vector<Aggregate> run_alpha_curve(const FiniteInstance& inst, const std::vector<double>& alphas, int n_trials,
                                       const TestSpikeSpec& test, Method method, int threads) {
    if (n_trials < 1) throw DomainError("need at least one trial");
    FiniteInstance base = inst;
    base.m = base.p;
    validate(base);
    const auto spikes = test_spike_vectors(inst.p, inst.eta, test);
    const double noise_var = inst.noise_sd * inst.noise_sd;
    std::vector<int> ms;
    for (double a : alphas) ms.push_back(components_for(a, inst.p));

    // results[k * n_trials + t]
    std::vector<TrialResult> results(alphas.size() * n_trials);
    parallel_for(static_cast<std::size_t>(n_trials), threads, [&](std::size_t t) {
        FiniteInstance trial = base;
        trial.seed = trial_seed(inst.seed, t);
        const InstanceData d = generate_instance(trial);
        Eigen::MatrixXd basis;
        double overlap = std::nan("");
        if (method == Method::ols) {
            basis = Eigen::MatrixXd::Identity(inst.p, inst.p);
        } else {
            const Eigen::MatrixXd& src = method == Method::pretrained ? d.X_u : d.X_l;
            PcaBasis pb = pca_basis(src, splitmix64(trial.seed ^ (method == Method::pretrained ? 0x5555u : 0xaaaau)));
            basis = std::move(pb.basis);
            const double o = d.v.dot(basis.col(0));
            overlap = o * o;
        }
        const Eigen::MatrixXd projected = d.X_l * basis;
        const NestedMinNorm solver(projected, d.y);
        for (std::size_t k = 0; k < ms.size(); ++k) {
            const int m = method == Method::ols ? inst.p : ms[k];
            const Eigen::VectorXd coef = solver.solve(m);
            const Eigen::VectorXd w_hat = basis.leftCols(m) * coef;
            TrialResult r = measure(d, w_hat, spikes, test, noise_var);
            r.spike_overlap_sq = overlap;
            results[k * n_trials + t] = r;
        }
    });

    std::vector<Aggregate> out;
    for (std::size_t k = 0; k < ms.size(); ++k) {
        std::vector<TrialResult> slice(results.begin() + k * n_trials, results.begin() + (k + 1) * n_trials);
        out.push_back(aggregate(slice));
    }
    return out;
}

Aggregate run_trials(const FiniteInstance& inst, int n_trials, const TestSpikeSpec& test, int threads) {
    validate(inst);
    const double alpha = static_cast<double>(inst.m) / inst.p;
    return run_alpha_curve(inst, {alpha}, n_trials, test, Method::pretrained, threads).front();
}

Baselines baselines(const FiniteInstance& inst, int n_trials, const TestSpikeSpec& test, int threads) {
    validate(inst);
    const std::vector<double> a{static_cast<double>(inst.m) / inst.p};
    return {run_alpha_curve(inst, a, n_trials, test, Method::pretrained, threads).front(),
            run_alpha_curve(inst, a, n_trials, test, Method::pcr, threads).front(),
            run_alpha_curve(inst, a, n_trials, test, Method::ols, threads).front()};
}

}  // namespace reprsize::mc
