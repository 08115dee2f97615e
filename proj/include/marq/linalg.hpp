#ifndef MARQ_LINALG_HPP
#define MARQ_LINALG_HPP

#include <Eigen/Core>
#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstdint>
#include <variant>
#include <vector>

namespace marq {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Symmetric matrix in profile (skyline) storage: for each row i the
/// contiguous range [start(i), i] of the lower triangle is kept, which is
/// exactly the region a no-pivoting Cholesky factorization fills in.
class SkylineMatrix {
 public:
  SkylineMatrix() = default;

  /// Builds from per-row first-column indices. Values start zeroed.
  explicit SkylineMatrix(std::vector<int> row_start);

  /// Extracts the lower profile of a (structurally symmetric) sparse matrix.
  static SkylineMatrix from_sparse(const SparseMatrix& a);

  int dim() const { return static_cast<int>(row_start_.size()); }
  int start(int i) const { return row_start_[i]; }

  double& at(int i, int j);        // start(i) <= j <= i
  double at(int i, int j) const;   // 0 outside the stored profile

  Vector apply(const Vector& x) const;      // symmetric matvec
  double quad(const Vector& s) const;       // s^T A s
  double inf_norm() const;                  // max row sum of |entries|
  /// Smallest shift that makes every Gershgorin disc positive.
  double gershgorin_shift() const;
  Vector diagonal() const;
  void add_to_diagonal(const Vector& d);
  void shift_diagonal(double sigma);

  /// this += coef * other; the profile is widened as needed.
  void add_scaled(const SkylineMatrix& other, double coef);

  SparseMatrix to_sparse() const;           // full symmetric pattern
  DenseMatrix to_dense() const;

  std::size_t stored_entries() const { return val_.size(); }

 private:
  friend class SkylineCholesky;
  std::vector<int> row_start_;
  std::vector<std::size_t> row_ptr_;  // offset of row i; size dim()+1
  std::vector<double> val_;
};

/// Cholesky factor of a skyline matrix (L L^T, no pivoting, no reordering).
/// Counts every multiply, add, divide and sqrt actually executed.
class SkylineCholesky {
 public:
  /// Factorizes a + sigma*I. On a nonpositive pivot the factorization stops
  /// and ok() is false; flops() still reports the work done up to that point.
  SkylineCholesky(const SkylineMatrix& a, double sigma);

  bool ok() const { return ok_; }
  double min_pivot() const { return min_pivot_; }
  double flops() const { return flops_; }
  Vector solve(const Vector& b) const;  // L L^T x = b

 private:
  SkylineMatrix l_;
  bool ok_ = false;
  double min_pivot_ = 0.0;
  double flops_ = 0.0;
};

/// Value-semantic symmetric matrix, dense or skyline-sparse.
class SymMat {
 public:
  SymMat() = default;
  explicit SymMat(DenseMatrix dense);
  explicit SymMat(SkylineMatrix sky);

  bool empty() const { return std::holds_alternative<std::monostate>(m_); }
  bool is_dense() const { return std::holds_alternative<DenseMatrix>(m_); }
  int dim() const;

  Vector apply(const Vector& x) const;
  double quad(const Vector& s) const;
  double inf_norm() const;
  double gershgorin_shift() const;
  void add_to_diagonal(const Vector& d);
  /// this += coef * other (both operands must share the storage kind).
  void add_scaled(const SymMat& other, double coef);

  const DenseMatrix& dense() const { return std::get<DenseMatrix>(m_); }
  const SkylineMatrix& skyline() const { return std::get<SkylineMatrix>(m_); }
  DenseMatrix to_dense() const;

 private:
  std::variant<std::monostate, DenseMatrix, SkylineMatrix> m_;
};

/// One attempted Cholesky factorization of B + sigma*I.
/// For dense storage the work is billed with the textbook operation count
/// n^3/3 + 2 n^2; for skyline storage the exact executed count is used.
class ShiftedFactor {
 public:
  ShiftedFactor(const SymMat& b, double sigma);

  bool ok() const { return ok_; }
  double flops() const { return flops_; }
  double flops_dense_model() const { return flops_dense_model_; }
  Vector solve(const Vector& rhs) const;

 private:
  std::variant<std::monostate, Eigen::LLT<DenseMatrix>, SkylineCholesky> f_;
  bool ok_ = false;
  double flops_ = 0.0;
  double flops_dense_model_ = 0.0;
};

double dense_factorization_flops(int n);

/// R * B * P with B symmetric; the result is symmetrized and stored in the
/// same kind as B.
SymMat galerkin_product(const SparseMatrix& r, const SymMat& b,
                        const SparseMatrix& p);

/// 2-norm estimate by power iteration on A^T A (deterministic start).
double two_norm_estimate(const SparseMatrix& a, int iters = 60);

SparseMatrix sparse_identity(int n);

/// Process-wide factorization flop tally; lets tests cross-check the
/// per-report accounting against what the routines actually executed.
double shadow_factorization_flops();

namespace detail {
void shadow_flops_add(double f);
}

}  // namespace marq

#endif  // MARQ_LINALG_HPP
