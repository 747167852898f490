#include "calabi/laplacian.h"

#include "calabi/errors.h"

#include <Eigen/SparseCholesky>

#include <iomanip>

namespace calabi {

DualLaplacian::DualLaplacian(std::vector<Edge> edges, Vector A, Vector B)
    : edges_(std::move(edges)), A_(std::move(A)), B_(std::move(B)) {
  if (static_cast<Eigen::Index>(edges_.size()) != B_.size()) throw DimensionMismatch("one B coefficient per edge expected");
}

Vector DualLaplacian::diagonal() const {
  Vector d = A_;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    d[edges_[e].a] += B_[e];
    d[edges_[e].b] += B_[e];
  }
  return d;
}

Vector DualLaplacian::multiply(const Vector& f) const {
  if (f.size() != size()) throw DimensionMismatch("vector length " + std::to_string(f.size()) + " != " + std::to_string(size()));
  Vector out = A_.cwiseProduct(f);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto [a, b] = edges_[e];
    const double flux = B_[e] * (f[a] - f[b]);
    out[a] += flux;
    out[b] -= flux;
  }
  return out;
}

double DualLaplacian::graph_quadratic_form(const Vector& f) const {
  if (f.size() != size()) throw DimensionMismatch("vector length mismatch");
  double q = 0;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const double diff = f[edges_[e].a] - f[edges_[e].b];
    q += B_[e] * diff * diff;
  }
  return q;
}

namespace {

Eigen::SparseMatrix<double> build(int n, const std::vector<Edge>& edges, const Vector& diag, const Vector& B) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(n + 2 * edges.size());
  for (int i = 0; i < n; ++i) t.emplace_back(i, i, diag[i]);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    t.emplace_back(edges[e].a, edges[e].b, -B[e]);
    t.emplace_back(edges[e].b, edges[e].a, -B[e]);
  }
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

} // namespace

Eigen::SparseMatrix<double> DualLaplacian::matrix() const { return build(size(), edges_, diagonal(), B_); }

Eigen::SparseMatrix<double> DualLaplacian::graph_part() const {
  return build(size(), edges_, diagonal() - A_, B_);
}

Eigen::MatrixXd DualLaplacian::dense() const { return Eigen::MatrixXd(matrix()); }

void DualLaplacian::write_coordinates(std::ostream& out) const {
  const auto m = matrix();
  out << std::setprecision(17);
  for (int k = 0; k < m.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it) out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

DualLaplacian assemble(const TriangulatedSurface& surface, const WeightedPacking& packing) {
  const int n = surface.vertex_count();
  if (packing.size() != n) throw DimensionMismatch("packing does not match surface");

  Vector A = Vector::Zero(n);
  Vector B = Vector::Zero(surface.edge_count());
  for (int f = 0; f < surface.face_count(); ++f) {
    const auto fd = face_derivatives(surface, packing, f);
    const Face& face = surface.face(f);
    const auto& fe = surface.face_edges(f);
    for (int c = 0; c < 3; ++c) {
      A[face[c]] += fd.area_u[c];
      // Edge opposite corner c joins corners a and b. ∂θ_a/∂u_b and ∂θ_b/∂u_a
      // agree analytically; averaging them keeps B symmetric in rounding too.
      const int a = (c + 1) % 3, b = (c + 2) % 3;
      B[fe[c]] += 0.5 * (fd.d[a][b] + fd.d[b][a]);
    }
  }
  return DualLaplacian(std::vector<Edge>(surface.edges().begin(), surface.edges().end()), std::move(A), std::move(B));
}

Vector apply_laplacian(const DualLaplacian& lap, const Vector& f) { return -lap.multiply(f); }

bool cholesky_succeeds(const Eigen::SparseMatrix<double>& matrix) {
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(matrix);
  return llt.info() == Eigen::Success;
}

EigenPair smallest_eigenpair(const Eigen::SparseMatrix<double>& matrix, const EigenOptions& options) {
  const Eigen::Index n = matrix.rows();
  if (n == 0 || matrix.cols() != n) throw DimensionMismatch("square nonempty matrix expected");

  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(matrix);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("Cholesky factorization failed");

  // Deterministic start with components in every direction.
  Vector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = 1.0 + 0.1 * static_cast<double>(i % 7) + 0.01 * static_cast<double>(i);
  x.normalize();

  double lambda = x.dot(matrix * x);
  double residual = 0;
  for (int it = 1; it <= options.max_iterations; ++it) {
    Vector y = llt.solve(x);
    x = y.normalized();
    const Vector mx = matrix * x;
    lambda = x.dot(mx);
    residual = (mx - lambda * x).norm();
    if (residual <= options.tolerance * std::max(1.0, std::abs(lambda))) return {lambda, x, it};
  }
  throw ConvergenceFailure("inverse iteration stalled with residual " + std::to_string(residual), options.max_iterations);
}

double min_eigenvalue(const DualLaplacian& lap, const EigenOptions& options) { return smallest_eigenpair(lap.matrix(), options).value; }

} // namespace calabi
