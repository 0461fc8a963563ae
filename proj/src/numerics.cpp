#include "hslab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "hslab/errors.hpp"

namespace hslab {

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorCode::DimensionMismatch, "dot product of unequal lengths");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// ---------------------------------------------------------------------------
// DenseSym

DenseSym DenseSym::from_rows(std::size_t n, std::span<const double> rows) {
  if (rows.size() != n * n) fail(ErrorCode::DimensionMismatch, "from_rows expects n*n entries");
  DenseSym m(n);
  for (std::size_t i = 0; i < n; ++i) {
    m.a_[i * n + i] = rows[i * n + i];
    for (std::size_t j = i + 1; j < n; ++j) {
      double v = 0.5 * (rows[i * n + j] + rows[j * n + i]);
      m.a_[i * n + j] = v;
      m.a_[j * n + i] = v;
    }
  }
  return m;
}

DenseSym DenseSym::identity(std::size_t n) {
  DenseSym m(n);
  for (std::size_t i = 0; i < n; ++i) m.a_[i * n + i] = 1.0;
  return m;
}

DenseSym DenseSym::diagonal(std::span<const double> d) {
  DenseSym m(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m.a_[i * d.size() + i] = d[i];
  return m;
}

void DenseSym::set(std::size_t i, std::size_t j, double v) {
  a_[i * n_ + j] = v;
  a_[j * n_ + i] = v;
}

void DenseSym::add(std::size_t i, std::size_t j, double v) {
  a_[i * n_ + j] += v;
  if (i != j) a_[j * n_ + i] += v;
}

Vector DenseSym::multiply(std::span<const double> x) const {
  if (x.size() != n_) fail(ErrorCode::DimensionMismatch, "DenseSym::multiply");
  Vector y(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n_; ++j) s += a_[i * n_ + j] * x[j];
    y[i] = s;
  }
  return y;
}

double DenseSym::quadratic_form(std::span<const double> x) const {
  return dot(x, multiply(x));
}

double DenseSym::max_abs() const {
  double m = 0.0;
  for (double v : a_) m = std::max(m, std::abs(v));
  return m;
}

DenseSym& DenseSym::operator+=(const DenseSym& o) {
  if (o.n_ != n_) fail(ErrorCode::DimensionMismatch, "DenseSym addition");
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
  return *this;
}

DenseSym& DenseSym::operator-=(const DenseSym& o) {
  if (o.n_ != n_) fail(ErrorCode::DimensionMismatch, "DenseSym subtraction");
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
  return *this;
}

DenseSym& DenseSym::operator*=(double s) {
  for (double& v : a_) v *= s;
  return *this;
}

// ---------------------------------------------------------------------------
// Jacobi

SymEigen jacobi_eigen(const DenseSym& m) {
  const std::size_t n = m.size();
  std::vector<double> a(m.data().begin(), m.data().end());
  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };

  double total = 0.0;
  for (double x : a) total += x * x;
  const double threshold = std::numeric_limits<double>::epsilon() * 1e-2 * std::sqrt(total);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
    if (std::sqrt(off) <= threshold || off == 0.0) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (apq == 0.0) continue;
        const double app = at(p, p);
        const double aqq = at(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          const double akp = at(k, p);
          const double akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = at(p, k);
          const double aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
        at(p, q) = 0.0;
        at(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p];
          const double vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return at(x, x) < at(y, y); });

  SymEigen out;
  out.values.resize(n);
  out.vectors.resize(n * n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = at(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors[i * n + k] = v[i * n + order[k]];
  }
  return out;
}

double spectral_norm(const DenseSym& m) {
  if (m.size() == 0) return 0.0;
  const auto e = jacobi_eigen(m);
  return std::max(std::abs(e.values.front()), std::abs(e.values.back()));
}

double eig_min(const DenseSym& m) {
  if (m.size() == 0) fail(ErrorCode::InvalidArgument, "eig_min of an empty matrix");
  return jacobi_eigen(m).values.front();
}

// ---------------------------------------------------------------------------
// DenseCholesky

DenseCholesky::DenseCholesky(const DenseSym& m) : n_(m.size()), l_(n_ * n_, 0.0) {
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l_[i * n_ + k] * l_[j * n_ + k];
      if (i == j) {
        if (!(s > 0.0)) fail(ErrorCode::NotPositiveDefinite, "dense Cholesky pivot <= 0");
        l_[i * n_ + i] = std::sqrt(s);
      } else {
        l_[i * n_ + j] = s / l_[j * n_ + j];
      }
    }
  }
}

DenseSym DenseCholesky::whiten(const DenseSym& m) const {
  if (m.size() != n_) fail(ErrorCode::DimensionMismatch, "whiten: size differs from Gram");
  // X = L^{-1} M, column by column, then W = L^{-1} X^T.
  std::vector<double> x(n_ * n_);
  for (std::size_t col = 0; col < n_; ++col) {
    for (std::size_t i = 0; i < n_; ++i) {
      double s = m(i, col);
      for (std::size_t k = 0; k < i; ++k) s -= l_[i * n_ + k] * x[k * n_ + col];
      x[i * n_ + col] = s / l_[i * n_ + i];
    }
  }
  std::vector<double> w(n_ * n_);
  for (std::size_t col = 0; col < n_; ++col) {
    for (std::size_t i = 0; i < n_; ++i) {
      double s = x[col * n_ + i];
      for (std::size_t k = 0; k < i; ++k) s -= l_[i * n_ + k] * w[k * n_ + col];
      w[i * n_ + col] = s / l_[i * n_ + i];
    }
  }
  return DenseSym::from_rows(n_, w);
}

// ---------------------------------------------------------------------------
// SparseSymmetric

SparseSymmetric::SparseSymmetric(std::size_t n, std::vector<Triplet> triplets) : n_(n) {
  for (const auto& t : triplets) {
    if (t.row >= n || t.col >= n) fail(ErrorCode::IndexOutOfRange, "triplet outside matrix");
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  start_.assign(n + 1, 0);
  for (std::size_t k = 0; k < triplets.size();) {
    std::size_t r = triplets[k].row;
    std::size_t c = triplets[k].col;
    double v = 0.0;
    while (k < triplets.size() && triplets[k].row == r && triplets[k].col == c) v += triplets[k++].value;
    cols_.push_back(c);
    values_.push_back(v);
    ++start_[r + 1];
  }
  for (std::size_t i = 0; i < n; ++i) start_[i + 1] += start_[i];
}

SparseSymmetric SparseSymmetric::from_upper(std::size_t n, const std::vector<Triplet>& triplets) {
  std::vector<Triplet> all;
  all.reserve(2 * triplets.size());
  for (const auto& t : triplets) {
    all.push_back(t);
    if (t.row != t.col) all.push_back({t.col, t.row, t.value});
  }
  return SparseSymmetric(n, std::move(all));
}

double SparseSymmetric::value(std::size_t i, std::size_t j) const {
  auto cols = row_columns(i);
  auto it = std::lower_bound(cols.begin(), cols.end(), j);
  if (it == cols.end() || *it != j) return 0.0;
  return values_[start_[i] + static_cast<std::size_t>(it - cols.begin())];
}

Vector SparseSymmetric::multiply(std::span<const double> x) const {
  if (x.size() != n_) fail(ErrorCode::DimensionMismatch, "SparseSymmetric::multiply");
  Vector y(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t k = start_[i]; k < start_[i + 1]; ++k) s += values_[k] * x[cols_[k]];
    y[i] = s;
  }
  return y;
}

double SparseSymmetric::bilinear(std::span<const double> x, std::span<const double> y) const {
  return dot(x, multiply(y));
}

SparseSymmetric SparseSymmetric::restrict_to(std::span<const std::size_t> keep) const {
  std::vector<std::size_t> map(n_, static_cast<std::size_t>(-1));
  for (std::size_t k = 0; k < keep.size(); ++k) map[keep[k]] = k;
  std::vector<Triplet> t;
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const std::size_t i = keep[k];
    for (std::size_t e = start_[i]; e < start_[i + 1]; ++e) {
      const std::size_t j = map[cols_[e]];
      if (j != static_cast<std::size_t>(-1)) t.push_back({k, j, values_[e]});
    }
  }
  return SparseSymmetric(keep.size(), std::move(t));
}

double SparseSymmetric::max_asymmetry() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t e = start_[i]; e < start_[i + 1]; ++e)
      worst = std::max(worst, std::abs(values_[e] - value(cols_[e], i)));
  return worst;
}

// ---------------------------------------------------------------------------
// Ordering and envelope Cholesky

std::vector<std::size_t> rcm_ordering(const SparseSymmetric& m) {
  const std::size_t n = m.size();
  std::vector<std::size_t> degree(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j : m.row_columns(i))
      if (j != i) ++degree[i];

  std::vector<char> dense(n, 0);
  for (std::size_t i = 0; i < n; ++i) dense[i] = n > 4 && 2 * degree[i] > n;

  std::vector<char> visited(dense.begin(), dense.end());
  std::vector<std::size_t> order;
  order.reserve(n);

  auto neighbours = [&](std::size_t i) {
    std::vector<std::size_t> nb;
    for (std::size_t j : m.row_columns(i))
      if (j != i && !dense[j]) nb.push_back(j);
    std::sort(nb.begin(), nb.end(), [&](std::size_t a, std::size_t b) {
      return degree[a] != degree[b] ? degree[a] < degree[b] : a < b;
    });
    return nb;
  };

  // BFS level structure from `root`; returns the last node reached.
  auto bfs = [&](std::size_t root, std::vector<std::size_t>* out) {
    std::vector<char> seen(visited.begin(), visited.end());
    std::queue<std::size_t> q;
    q.push(root);
    seen[root] = 1;
    std::size_t last = root;
    while (!q.empty()) {
      std::size_t i = q.front();
      q.pop();
      last = i;
      if (out) out->push_back(i);
      for (std::size_t j : neighbours(i)) {
        if (!seen[j]) {
          seen[j] = 1;
          q.push(j);
        }
      }
    }
    return last;
  };

  for (;;) {
    std::size_t root = n;
    for (std::size_t i = 0; i < n; ++i)
      if (!visited[i] && (root == n || degree[i] < degree[root])) root = i;
    if (root == n) break;
    // Two BFS passes approximate a pseudo-peripheral start node.
    root = bfs(bfs(root, nullptr), nullptr);
    std::vector<std::size_t> component;
    bfs(root, &component);
    for (std::size_t i : component) visited[i] = 1;
    order.insert(order.end(), component.begin(), component.end());
  }
  std::reverse(order.begin(), order.end());
  for (std::size_t i = 0; i < n; ++i)
    if (dense[i]) order.push_back(i);
  return order;
}

SpdFactor factor_spd(const SparseSymmetric& m) {
  const std::size_t n = m.size();
  SpdFactor f;
  f.n_ = n;
  f.perm_ = rcm_ordering(m);
  std::vector<std::size_t> inv(n);
  for (std::size_t k = 0; k < n; ++k) inv[f.perm_[k]] = k;

  f.first_.assign(n, 0);
  f.offset_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t first = i;
    for (std::size_t j : m.row_columns(f.perm_[i])) first = std::min(first, inv[j]);
    f.first_[i] = first;
    f.offset_[i + 1] = f.offset_[i] + (i - first + 1);
  }
  f.values_.assign(f.offset_[n], 0.0);

  auto row = [&](std::size_t i) { return f.values_.data() + f.offset_[i]; };

  for (std::size_t i = 0; i < n; ++i) {
    double* li = row(i);
    const std::size_t fi = f.first_[i];
    const std::size_t old_i = f.perm_[i];
    auto cols = m.row_columns(old_i);
    auto vals = m.row_values(old_i);
    for (std::size_t e = 0; e < cols.size(); ++e) {
      const std::size_t j = inv[cols[e]];
      if (j <= i) li[j - fi] = vals[e];
    }
    for (std::size_t j = fi; j < i; ++j) {
      const double* lj = row(j);
      const std::size_t fj = f.first_[j];
      double s = li[j - fi];
      for (std::size_t k = std::max(fi, fj); k < j; ++k) s -= li[k - fi] * lj[k - fj];
      li[j - fi] = s / lj[j - fj];
    }
    const double aii = li[i - fi];
    double d = aii;
    for (std::size_t k = fi; k < i; ++k) d -= li[k - fi] * li[k - fi];
    if (!(d > 64.0 * std::numeric_limits<double>::epsilon() * std::abs(aii)) || !std::isfinite(d)) {
      fail(ErrorCode::NotPositiveDefinite,
           "non-positive pivot " + std::to_string(d) + " at row " + std::to_string(old_i));
    }
    li[i - fi] = std::sqrt(d);
  }
  return f;
}

Vector SpdFactor::solve(std::span<const double> b) const {
  if (b.size() != n_) fail(ErrorCode::DimensionMismatch, "solve: right-hand side length");
  Vector y(n_);
  for (std::size_t i = 0; i < n_; ++i) y[i] = b[perm_[i]];
  for (std::size_t i = 0; i < n_; ++i) {
    const double* li = values_.data() + offset_[i];
    double s = y[i];
    for (std::size_t k = first_[i]; k < i; ++k) s -= li[k - first_[i]] * y[k];
    y[i] = s / li[i - first_[i]];
  }
  for (std::size_t i = n_; i-- > 0;) {
    const double* li = values_.data() + offset_[i];
    y[i] /= li[i - first_[i]];
    const double xi = y[i];
    for (std::size_t k = first_[i]; k < i; ++k) y[k] -= li[k - first_[i]] * xi;
  }
  Vector x(n_);
  for (std::size_t i = 0; i < n_; ++i) x[perm_[i]] = y[i];
  return x;
}

Vector SpdFactor::factor_diagonal() const {
  Vector d(n_);
  for (std::size_t i = 0; i < n_; ++i) d[perm_[i]] = values_[offset_[i] + (i - first_[i])];
  return d;
}

Vector solve(const SpdFactor& f, std::span<const double> b) { return f.solve(b); }

// ---------------------------------------------------------------------------
// BorderedSolver

namespace {

SparseSymmetric grounded(const SparseSymmetric& k, std::size_t ground) {
  double scale = 0.0;
  std::vector<Triplet> t;
  t.reserve(k.nonzeros() + 1);
  for (std::size_t i = 0; i < k.size(); ++i) {
    auto cols = k.row_columns(i);
    auto vals = k.row_values(i);
    for (std::size_t e = 0; e < cols.size(); ++e) {
      t.push_back({i, cols[e], vals[e]});
      if (cols[e] == i) scale = std::max(scale, std::abs(vals[e]));
    }
  }
  t.push_back({ground, ground, scale > 0.0 ? scale : 1.0});
  return SparseSymmetric(k.size(), std::move(t));
}

std::size_t ground_index(std::span<const double> z) {
  std::size_t g = 0;
  for (std::size_t i = 1; i < z.size(); ++i)
    if (std::abs(z[i]) > std::abs(z[g])) g = i;
  return g;
}

}  // namespace

BorderedSolver::BorderedSolver(const SparseSymmetric& k, Vector c, Vector z)
    : c_(std::move(c)), z_(std::move(z)) {
  if (c_.size() != k.size() || z_.size() != k.size())
    fail(ErrorCode::DimensionMismatch, "bordered system vectors must match K");
  zc_ = dot(z_, c_);
  if (zc_ == 0.0) fail(ErrorCode::NotPositiveDefinite, "constraint row annihilates the kernel");
  factor_ = factor_spd(grounded(k, ground_index(z_)));
}

BorderedSolver::Solution BorderedSolver::solve(std::span<const double> b) const {
  const double mu = dot(z_, b) / zc_;
  Vector r(b.begin(), b.end());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= mu * c_[i];
  Vector w = factor_.solve(r);
  const double shift = dot(c_, w) / zc_;
  for (std::size_t i = 0; i < w.size(); ++i) w[i] -= shift * z_[i];
  return {std::move(w), mu};
}

SparseSymmetric BorderedSolver::augmented(const SparseSymmetric& k, std::span<const double> c) {
  const std::size_t n = k.size();
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i) {
    auto cols = k.row_columns(i);
    auto vals = k.row_values(i);
    for (std::size_t e = 0; e < cols.size(); ++e) t.push_back({i, cols[e], vals[e]});
    if (c[i] != 0.0) {
      t.push_back({i, n, c[i]});
      t.push_back({n, i, c[i]});
    }
  }
  return SparseSymmetric(n + 1, std::move(t));
}

// ---------------------------------------------------------------------------
// Quadrature

namespace {

struct SimpsonState {
  const std::function<double(double)>& f;
  int max_depth;
  int min_depth;
};

double simpson_step(const SimpsonState& st, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = st.f(lm);
  const double frm = st.f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth >= st.min_depth && std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth >= st.max_depth)
    fail(ErrorCode::ToleranceNotReached,
         "adaptive Simpson depth cap hit near [" + std::to_string(a) + ", " + std::to_string(b) + "]");
  return simpson_step(st, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
         simpson_step(st, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

}  // namespace

double adaptive_quadrature(const std::function<double(double)>& f, double a, double b, double tol,
                           int max_depth) {
  if (!(a <= b)) fail(ErrorCode::InvalidArgument, "adaptive_quadrature requires a <= b");
  if (!(tol > 0.0)) fail(ErrorCode::InvalidArgument, "adaptive_quadrature requires tol > 0");
  if (a == b) return 0.0;
  const SimpsonState st{f, max_depth, std::min(4, max_depth)};
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(st, a, b, fa, fm, fb, whole, tol, 0);
}

}  // namespace hslab
