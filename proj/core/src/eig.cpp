#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "spdgeom/linalg.hpp"

namespace spdgeom {

namespace {

// Householder reduction of a symmetric matrix to tridiagonal form.
// On return d holds the diagonal, e[i] the subdiagonal T(i+1, i), and q the
// accumulated orthogonal factor with A = Q T Qᵀ.
void tridiagonalize(Matrix a, std::vector<double>& d, std::vector<double>& e, Matrix& q) {
  const int n = a.rows();
  d.assign(n, 0.0);
  e.assign(n > 0 ? n - 1 : 0, 0.0);

  std::vector<std::vector<double>> hh_v(std::max(0, n - 2));
  std::vector<double> hh_beta(std::max(0, n - 2), 0.0);

  for (int k = 0; k + 2 < n; ++k) {
    const int m = n - k - 1;  // length of the column below the diagonal
    std::vector<double> x(m);
    for (int i = 0; i < m; ++i) x[i] = a(k + 1 + i, k);

    double norm = 0.0;
    for (double v : x) norm += v * v;
    norm = std::sqrt(norm);

    double beta = 0.0;
    std::vector<double> v = x;
    double alpha = 0.0;
    if (norm > 0.0) {
      alpha = (x[0] >= 0.0) ? -norm : norm;
      v[0] -= alpha;
      double vnorm2 = 0.0;
      for (double t : v) vnorm2 += t * t;
      if (vnorm2 > 0.0) beta = 2.0 / vnorm2;
    }

    if (beta != 0.0) {
      // p = beta * A22 * v, w = p - (beta/2)(vᵀp) v, A22 -= v wᵀ + w vᵀ
      std::vector<double> p(m, 0.0);
      for (int i = 0; i < m; ++i) {
        const double* arow = a.row_ptr(k + 1 + i) + (k + 1);
        double s = 0.0;
        for (int j = 0; j < m; ++j) s += arow[j] * v[j];
        p[i] = beta * s;
      }
      double vtp = 0.0;
      for (int i = 0; i < m; ++i) vtp += v[i] * p[i];
      const double half = 0.5 * beta * vtp;
      std::vector<double> w(m);
      for (int i = 0; i < m; ++i) w[i] = p[i] - half * v[i];
      for (int i = 0; i < m; ++i) {
        double* arow = a.row_ptr(k + 1 + i) + (k + 1);
        const double vi = v[i], wi = w[i];
        for (int j = 0; j < m; ++j) arow[j] -= vi * w[j] + wi * v[j];
      }
    }

    e[k] = (norm > 0.0) ? alpha : 0.0;
    hh_v[k] = std::move(v);
    hh_beta[k] = beta;
  }

  for (int i = 0; i < n; ++i) d[i] = a(i, i);
  if (n >= 2) e[n - 2] = a(n - 1, n - 2);

  // Back-accumulate Q = H_0 H_1 ... H_{n-3}.
  q = Matrix::identity(n);
  for (int k = n - 3; k >= 0; --k) {
    const double beta = hh_beta[k];
    if (beta == 0.0) continue;
    const auto& v = hh_v[k];
    const int m = n - k - 1;
    // Q[k+1.., k+1..] <- (I - beta v vᵀ) Q[k+1.., k+1..]
    std::vector<double> vtq(m, 0.0);
    for (int i = 0; i < m; ++i) {
      const double vi = v[i];
      const double* qrow = q.row_ptr(k + 1 + i) + (k + 1);
      for (int j = 0; j < m; ++j) vtq[j] += vi * qrow[j];
    }
    for (int i = 0; i < m; ++i) {
      const double bvi = beta * v[i];
      double* qrow = q.row_ptr(k + 1 + i) + (k + 1);
      for (int j = 0; j < m; ++j) qrow[j] -= bvi * vtq[j];
    }
  }
}

// Implicit-shift QL iteration on the tridiagonal (d, e). zt holds, row-wise,
// the transposed eigenvector matrix; rotations therefore mix contiguous rows.
void ql_implicit(std::vector<double>& d, std::vector<double>& e, Matrix& zt) {
  const int n = static_cast<int>(d.size());
  if (n <= 1) return;
  const double eps = std::numeric_limits<double>::epsilon();
  e.push_back(0.0);  // sentinel

  long total_iters = 0;
  const long total_cap = 30L * n;

  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == 30 || ++total_iters > total_cap)
          throw NumericError("sym_eig: QL iteration did not converge", std::fabs(e[l]));
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;

          double* zi = zt.row_ptr(i);
          double* zi1 = zt.row_ptr(i + 1);
          for (int j = 0; j < n; ++j) {
            f = zi1[j];
            zi1[j] = s * zi[j] + c * f;
            zi[j] = c * zi[j] - s * f;
          }
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  e.pop_back();
}

}  // namespace

EigDecomp sym_eig(const SymMatrix& s) {
  const int n = s.dim();
  EigDecomp out;
  if (n == 0) {
    out.u = Matrix(0, 0);
    return out;
  }

  std::vector<double> d, e;
  Matrix q;
  tridiagonalize(s.m(), d, e, q);
  Matrix zt = q.transpose();
  ql_implicit(d, e, zt);

  // Sort eigenpairs descending.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return d[a] > d[b]; });

  out.lambda.resize(n);
  out.u = Matrix(n, n);
  for (int r = 0; r < n; ++r) {
    out.lambda[r] = d[order[r]];
    const double* src = zt.row_ptr(order[r]);
    for (int i = 0; i < n; ++i) out.u(i, r) = src[i];
  }
  return out;
}

EigDecomp sym_eig(const SpdMatrix& p) { return sym_eig(p.sym()); }

}  // namespace spdgeom
