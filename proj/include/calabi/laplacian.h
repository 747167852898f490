#pragma once

#include "calabi/hyperbolic.h"
#include "calabi/mesh.h"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <ostream>
#include <vector>

namespace calabi {

// The discrete dual-Laplacian L = ∂K/∂u = A + L_B.
//
// Stored as the diagonal part A (one entry per vertex) and one coefficient
// B_ij per edge; L_ii = A_i + Σ_j B_ij and L_ij = L_ji = -B_ij.
class DualLaplacian {
public:
  DualLaplacian(std::vector<Edge> edges, Vector A, Vector B);

  int size() const { return static_cast<int>(A_.size()); }
  const Vector& A() const { return A_; }
  const Vector& B() const { return B_; }
  const std::vector<Edge>& edges() const { return edges_; }

  // L_ii
  Vector diagonal() const;
  // L f
  Vector multiply(const Vector& f) const;
  // f^T L_B f = Σ_edges B_ij (f_i - f_j)²
  double graph_quadratic_form(const Vector& f) const;

  Eigen::SparseMatrix<double> matrix() const;
  Eigen::SparseMatrix<double> graph_part() const;
  Eigen::MatrixXd dense() const;

  // (row, col, value) lines, one per stored nonzero of the full matrix.
  void write_coordinates(std::ostream& out) const;

private:
  std::vector<Edge> edges_;
  Vector A_;
  Vector B_;
};

DualLaplacian assemble(const TriangulatedSurface& surface, const WeightedPacking& packing);

// Δf = -L f, i.e. (Δf)_i = Σ_{j~i} B_ij (f_j - f_i) - A_i f_i.
Vector apply_laplacian(const DualLaplacian& lap, const Vector& f);

struct EigenOptions {
  double tolerance = 1e-10; // on ‖Lx - λx‖ for unit x
  int max_iterations = 20000;
};

struct EigenPair {
  double value;
  Vector vector;
  int iterations;
};

// Smallest eigenpair of a symmetric positive definite matrix by inverse
// iteration on its Cholesky factor. Throws NotPositiveDefinite if the
// factorization fails, ConvergenceFailure if the residual stays above tolerance.
EigenPair smallest_eigenpair(const Eigen::SparseMatrix<double>& matrix, const EigenOptions& options = {});
double min_eigenvalue(const DualLaplacian& lap, const EigenOptions& options = {});

bool cholesky_succeeds(const Eigen::SparseMatrix<double>& matrix);

} // namespace calabi
