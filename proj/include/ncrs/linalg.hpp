#pragma once

#include <Eigen/Core>

namespace ncrs {

/// Eigendecomposition of a symmetric matrix given by its lower triangle.
/// Uses LAPACK dsyevd; each result is checked with a random probe and, if the
/// BLAS backend is faulty, recomputed with Eigen's solver (slower, always correct).
void symmetric_eigen(const Eigen::MatrixXd& lower, Eigen::MatrixXd& vectors, Eigen::VectorXd& values);

/// True if dsyevd returns orthonormal eigenvectors on a 96x96 test matrix.
bool lapack_eigensolver_ok();

/// For executables: some OpenBLAS builds pick a kernel that miscomputes on
/// certain CPUs. If the probe fails and OPENBLAS_CORETYPE is unset, re-executes
/// the program with a conservative core type. Returns normally otherwise.
void ensure_working_lapack(char** argv);

} // namespace ncrs
