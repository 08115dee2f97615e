#include "marq/linalg.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

namespace marq {

namespace {
std::atomic<double> g_shadow_flops{0.0};
}

namespace detail {
void shadow_flops_add(double f) {
  double cur = g_shadow_flops.load(std::memory_order_relaxed);
  while (!g_shadow_flops.compare_exchange_weak(cur, cur + f,
                                               std::memory_order_relaxed)) {
  }
}
}  // namespace detail

double shadow_factorization_flops() {
  return g_shadow_flops.load(std::memory_order_relaxed);
}

// ---------------------------------------------------------------------------
// SkylineMatrix

SkylineMatrix::SkylineMatrix(std::vector<int> row_start)
    : row_start_(std::move(row_start)) {
  const int n = dim();
  row_ptr_.assign(n + 1, 0);
  for (int i = 0; i < n; ++i) {
    if (row_start_[i] < 0 || row_start_[i] > i)
      throw std::invalid_argument("SkylineMatrix: bad row start");
    row_ptr_[i + 1] = row_ptr_[i] + (i - row_start_[i] + 1);
  }
  val_.assign(row_ptr_[n], 0.0);
}

SkylineMatrix SkylineMatrix::from_sparse(const SparseMatrix& a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("SkylineMatrix: matrix not square");
  const int n = static_cast<int>(a.rows());
  std::vector<int> start(n);
  for (int i = 0; i < n; ++i) start[i] = i;
  for (int k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      const int i = static_cast<int>(it.row());
      const int j = static_cast<int>(it.col());
      if (it.value() == 0.0) continue;
      if (j <= i) start[i] = std::min(start[i], j);
      else start[j] = std::min(start[j], i);
    }
  }
  SkylineMatrix s(std::move(start));
  for (int k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      const int i = static_cast<int>(it.row());
      const int j = static_cast<int>(it.col());
      if (j <= i && it.value() != 0.0) s.at(i, j) = it.value();
    }
  }
  return s;
}

double& SkylineMatrix::at(int i, int j) {
  return val_[row_ptr_[i] + (j - row_start_[i])];
}

double SkylineMatrix::at(int i, int j) const {
  if (j > i) std::swap(i, j);
  if (j < row_start_[i]) return 0.0;
  return val_[row_ptr_[i] + (j - row_start_[i])];
}

Vector SkylineMatrix::apply(const Vector& x) const {
  const int n = dim();
  if (x.size() != n) throw std::invalid_argument("SkylineMatrix: dim mismatch");
  Vector y = Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    const double* row = &val_[row_ptr_[i]];
    const int s = row_start_[i];
    double acc = 0.0;
    for (int j = s; j < i; ++j) {
      const double v = row[j - s];
      acc += v * x[j];
      y[j] += v * x[i];
    }
    y[i] += acc + row[i - s] * x[i];
  }
  return y;
}

double SkylineMatrix::quad(const Vector& s) const { return s.dot(apply(s)); }

double SkylineMatrix::inf_norm() const {
  const int n = dim();
  std::vector<double> rowsum(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double* row = &val_[row_ptr_[i]];
    const int s = row_start_[i];
    for (int j = s; j < i; ++j) {
      const double v = std::abs(row[j - s]);
      rowsum[i] += v;
      rowsum[j] += v;
    }
    rowsum[i] += std::abs(row[i - s]);
  }
  return n == 0 ? 0.0 : *std::max_element(rowsum.begin(), rowsum.end());
}

double SkylineMatrix::gershgorin_shift() const {
  const int n = dim();
  std::vector<double> off(n, 0.0);
  Vector d = diagonal();
  for (int i = 0; i < n; ++i) {
    const double* row = &val_[row_ptr_[i]];
    const int s = row_start_[i];
    for (int j = s; j < i; ++j) {
      const double v = std::abs(row[j - s]);
      off[i] += v;
      off[j] += v;
    }
  }
  double shift = 0.0;
  for (int i = 0; i < n; ++i) shift = std::max(shift, off[i] - d[i]);
  return shift;
}

Vector SkylineMatrix::diagonal() const {
  const int n = dim();
  Vector d(n);
  for (int i = 0; i < n; ++i) d[i] = val_[row_ptr_[i + 1] - 1];
  return d;
}

void SkylineMatrix::add_to_diagonal(const Vector& d) {
  const int n = dim();
  if (d.size() != n) throw std::invalid_argument("SkylineMatrix: dim mismatch");
  for (int i = 0; i < n; ++i) val_[row_ptr_[i + 1] - 1] += d[i];
}

void SkylineMatrix::shift_diagonal(double sigma) {
  const int n = dim();
  for (int i = 0; i < n; ++i) val_[row_ptr_[i + 1] - 1] += sigma;
}

void SkylineMatrix::add_scaled(const SkylineMatrix& other, double coef) {
  const int n = dim();
  if (other.dim() != n)
    throw std::invalid_argument("SkylineMatrix: dim mismatch");
  bool widen = false;
  for (int i = 0; i < n; ++i)
    if (other.row_start_[i] < row_start_[i]) widen = true;
  if (widen) {
    std::vector<int> start(n);
    for (int i = 0; i < n; ++i)
      start[i] = std::min(row_start_[i], other.row_start_[i]);
    SkylineMatrix merged(std::move(start));
    for (int i = 0; i < n; ++i)
      for (int j = row_start_[i]; j <= i; ++j) merged.at(i, j) = at(i, j);
    *this = std::move(merged);
  }
  for (int i = 0; i < n; ++i)
    for (int j = other.row_start_[i]; j <= i; ++j)
      at(i, j) += coef * other.at(i, j);
}

SparseMatrix SkylineMatrix::to_sparse() const {
  const int n = dim();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(2 * val_.size());
  for (int i = 0; i < n; ++i) {
    for (int j = row_start_[i]; j <= i; ++j) {
      const double v = at(i, j);
      if (v == 0.0) continue;
      t.emplace_back(i, j, v);
      if (j != i) t.emplace_back(j, i, v);
    }
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

DenseMatrix SkylineMatrix::to_dense() const {
  const int n = dim();
  DenseMatrix a = DenseMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = row_start_[i]; j <= i; ++j) a(i, j) = a(j, i) = at(i, j);
  return a;
}

// ---------------------------------------------------------------------------
// SkylineCholesky

SkylineCholesky::SkylineCholesky(const SkylineMatrix& a, double sigma)
    : l_(a) {
  l_.shift_diagonal(sigma);
  const int n = l_.dim();
  min_pivot_ = std::numeric_limits<double>::infinity();
  double flops = 0.0;
  for (int i = 0; i < n; ++i) {
    const int si = l_.row_start_[i];
    double* rowi = &l_.val_[l_.row_ptr_[i]];
    for (int j = si; j < i; ++j) {
      const int sj = l_.row_start_[j];
      const double* rowj = &l_.val_[l_.row_ptr_[j]];
      const int lo = std::max(si, sj);
      double sum = rowi[j - si];
      for (int k = lo; k < j; ++k) sum -= rowi[k - si] * rowj[k - sj];
      rowi[j - si] = sum / rowj[j - sj];
      flops += 2.0 * (j - lo) + 1.0;
    }
    double sum = rowi[i - si];
    for (int k = si; k < i; ++k) sum -= rowi[k - si] * rowi[k - si];
    flops += 2.0 * (i - si) + 1.0;
    min_pivot_ = std::min(min_pivot_, sum);
    if (!(sum > 0.0)) {
      flops_ = flops;
      detail::shadow_flops_add(flops_);
      return;  // not positive definite at this shift
    }
    rowi[i - si] = std::sqrt(sum);
  }
  flops_ = flops;
  ok_ = true;
  detail::shadow_flops_add(flops_);
}

Vector SkylineCholesky::solve(const Vector& b) const {
  if (!ok_) throw std::logic_error("SkylineCholesky: factorization failed");
  const int n = l_.dim();
  if (b.size() != n) throw std::invalid_argument("SkylineCholesky: dim");
  Vector x = b;
  for (int i = 0; i < n; ++i) {
    const int s = l_.row_start_[i];
    const double* row = &l_.val_[l_.row_ptr_[i]];
    double acc = x[i];
    for (int k = s; k < i; ++k) acc -= row[k - s] * x[k];
    x[i] = acc / row[i - s];
  }
  for (int j = n - 1; j >= 0; --j) {
    const int s = l_.row_start_[j];
    const double* row = &l_.val_[l_.row_ptr_[j]];
    x[j] /= row[j - s];
    const double xj = x[j];
    for (int k = s; k < j; ++k) x[k] -= row[k - s] * xj;
  }
  return x;
}

// ---------------------------------------------------------------------------
// SymMat

SymMat::SymMat(DenseMatrix dense) : m_(std::move(dense)) {
  const auto& d = std::get<DenseMatrix>(m_);
  if (d.rows() != d.cols()) throw std::invalid_argument("SymMat: not square");
}

SymMat::SymMat(SkylineMatrix sky) : m_(std::move(sky)) {}

int SymMat::dim() const {
  if (is_dense()) return static_cast<int>(dense().rows());
  if (!empty()) return skyline().dim();
  return 0;
}

Vector SymMat::apply(const Vector& x) const {
  if (is_dense()) {
    if (x.size() != dense().rows())
      throw std::invalid_argument("SymMat: dim mismatch");
    return dense().selfadjointView<Eigen::Lower>() * x;
  }
  return skyline().apply(x);
}

double SymMat::quad(const Vector& s) const { return s.dot(apply(s)); }

double SymMat::inf_norm() const {
  if (is_dense()) return dense().cwiseAbs().rowwise().sum().maxCoeff();
  return skyline().inf_norm();
}

double SymMat::gershgorin_shift() const {
  if (is_dense()) {
    const auto& d = dense();
    double shift = 0.0;
    for (int i = 0; i < d.rows(); ++i) {
      double off = d.row(i).cwiseAbs().sum() - std::abs(d(i, i));
      shift = std::max(shift, off - d(i, i));
    }
    return shift;
  }
  return skyline().gershgorin_shift();
}

void SymMat::add_to_diagonal(const Vector& d) {
  if (is_dense()) {
    auto& m = std::get<DenseMatrix>(m_);
    if (d.size() != m.rows()) throw std::invalid_argument("SymMat: dim");
    m.diagonal() += d;
    return;
  }
  std::get<SkylineMatrix>(m_).add_to_diagonal(d);
}

void SymMat::add_scaled(const SymMat& other, double coef) {
  if (is_dense() != other.is_dense() || empty() || other.empty())
    throw std::invalid_argument("SymMat: storage kinds differ");
  if (is_dense())
    std::get<DenseMatrix>(m_) += coef * other.dense();
  else
    std::get<SkylineMatrix>(m_).add_scaled(other.skyline(), coef);
}

DenseMatrix SymMat::to_dense() const {
  if (is_dense()) return dense();
  return skyline().to_dense();
}

// ---------------------------------------------------------------------------
// ShiftedFactor

double dense_factorization_flops(int n) {
  const double nn = static_cast<double>(n);
  return nn * nn * nn / 3.0 + 2.0 * nn * nn;
}

ShiftedFactor::ShiftedFactor(const SymMat& b, double sigma) {
  if (b.empty()) throw std::invalid_argument("ShiftedFactor: empty matrix");
  if (b.is_dense()) {
    DenseMatrix m = b.dense();
    m.diagonal().array() += sigma;
    Eigen::LLT<DenseMatrix> llt(m);
    ok_ = llt.info() == Eigen::Success;
    flops_ = dense_factorization_flops(b.dim());
    flops_dense_model_ = flops_;
    detail::shadow_flops_add(flops_);
    f_ = std::move(llt);
  } else {
    SkylineCholesky chol(b.skyline(), sigma);
    ok_ = chol.ok();
    flops_ = chol.flops();
    flops_dense_model_ = dense_factorization_flops(b.dim());
    f_ = std::move(chol);
  }
}

Vector ShiftedFactor::solve(const Vector& rhs) const {
  if (!ok_) throw std::logic_error("ShiftedFactor: factorization failed");
  if (std::holds_alternative<Eigen::LLT<DenseMatrix>>(f_))
    return std::get<Eigen::LLT<DenseMatrix>>(f_).solve(rhs);
  return std::get<SkylineCholesky>(f_).solve(rhs);
}

// ---------------------------------------------------------------------------

SymMat galerkin_product(const SparseMatrix& r, const SymMat& b,
                        const SparseMatrix& p) {
  if (b.dim() != r.cols() || b.dim() != p.rows())
    throw std::invalid_argument("galerkin_product: dim mismatch");
  if (b.is_dense()) {
    DenseMatrix rd = DenseMatrix(r);
    DenseMatrix pd = DenseMatrix(p);
    DenseMatrix m = rd * b.dense() * pd;
    m = 0.5 * (m + m.transpose()).eval();
    return SymMat(std::move(m));
  }
  SparseMatrix bs = b.skyline().to_sparse();
  SparseMatrix m = (r * bs * p).pruned();
  SparseMatrix sym = 0.5 * (m + SparseMatrix(m.transpose()));
  return SymMat(SkylineMatrix::from_sparse(sym));
}

double two_norm_estimate(const SparseMatrix& a, int iters) {
  if (a.cols() == 0) return 0.0;
  Vector v = Vector::Ones(a.cols());
  v.normalize();
  double norm2 = 0.0;
  for (int it = 0; it < iters; ++it) {
    Vector w = a.transpose() * (a * v).eval();
    norm2 = w.norm();
    if (norm2 == 0.0) return 0.0;
    v = w / norm2;
  }
  return std::sqrt(norm2);
}

SparseMatrix sparse_identity(int n) {
  SparseMatrix id(n, n);
  id.setIdentity();
  return id;
}

}  // namespace marq
