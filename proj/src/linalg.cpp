#include "ncrs/linalg.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>
#include <lapacke.h>
#include <unistd.h>

#include "ncrs/rng.hpp"

namespace ncrs {

namespace {

std::atomic<bool> lapack_faulty{false};

Eigen::VectorXd probe_vector(Eigen::Index n) {
    Rng rng(0x70726f6265);
    std::normal_distribution<double> normal;
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v[i] = normal(rng);
    return v;
}

// Relative residuals of orthonormality and reconstruction along one random direction.
bool plausible(const Eigen::MatrixXd& lower, const Eigen::MatrixXd& vectors, const Eigen::VectorXd& values) {
    if (!vectors.allFinite() || !values.allFinite())
        return false;
    const Eigen::VectorXd v = probe_vector(lower.rows());
    const Eigen::VectorXd coords = vectors.transpose() * v;
    const double orth = (vectors * coords - v).norm() / v.norm();
    const Eigen::VectorXd cv = lower.selfadjointView<Eigen::Lower>() * v;
    const Eigen::VectorXd recon = vectors * values.cwiseProduct(coords);
    const double scale = std::max(values.cwiseAbs().maxCoeff(), 1e-300) * v.norm();
    return orth < 1e-8 && (cv - recon).norm() / scale < 1e-8;
}

bool lapack_eigen(const Eigen::MatrixXd& lower, Eigen::MatrixXd& vectors, Eigen::VectorXd& values) {
    const auto n = static_cast<lapack_int>(lower.rows());
    vectors = lower;
    values.resize(n);
    const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, vectors.data(), n, values.data());
    return info == 0 && plausible(lower, vectors, values);
}

} // namespace

void symmetric_eigen(const Eigen::MatrixXd& lower, Eigen::MatrixXd& vectors, Eigen::VectorXd& values) {
    if (!lapack_faulty.load() && lapack_eigen(lower, vectors, values))
        return;
    if (!lapack_faulty.exchange(true))
        std::cerr << "warning: LAPACK eigensolver gave inconsistent results; using the slower built-in solver "
                     "(setting OPENBLAS_CORETYPE=Haswell usually fixes the BLAS backend)\n";
    const Eigen::MatrixXd full = lower.selfadjointView<Eigen::Lower>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(full);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eigendecomposition did not converge");
    vectors = solver.eigenvectors();
    values = solver.eigenvalues();
}

bool lapack_eigensolver_ok() {
    const Eigen::Index n = 96;
    Eigen::MatrixXd a(n, n);
    Rng rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            a(i, j) = u(rng);
    Eigen::MatrixXd spd = a * a.transpose() / static_cast<double>(n);
    spd.diagonal().array() += 1.0;
    Eigen::MatrixXd vectors;
    Eigen::VectorXd values;
    return lapack_eigen(spd, vectors, values);
}

void ensure_working_lapack(char** argv) {
    if (std::getenv("OPENBLAS_CORETYPE") != nullptr || lapack_eigensolver_ok())
        return;
    ::setenv("OPENBLAS_CORETYPE", "Haswell", 1);
    ::execv("/proc/self/exe", argv);
    // exec failed: carry on with the verified fallback in symmetric_eigen
}

} // namespace ncrs
