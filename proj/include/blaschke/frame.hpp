#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "errors.hpp"
#include "invariants.hpp"
#include "linalg.hpp"

namespace blaschke {

struct FrameConfig {
  int starts = 8;
  int max_iter = 500;
  double step_tol = 1e-13;         // iterate-displacement stopping rule
  double stationarity_tol = 1e-7;  // first-order condition contract
  std::uint64_t seed = 42;
};

struct MaximizeResult {
  std::vector<double> direction;  // unit vector in full coordinates
  double value = 0;
  int iterations = 0;
  double stationarity = 0;
  bool converged = false;
  bool vanishing = false;  // cubic form identically zero on the subspace
};

struct LevelInfo {
  int subspace_dim = 0;
  double value = 0;
  int iterations = 0;
  double stationarity = 0;
  bool converged = false;
};

// Canonical orthonormal frame adapted to the product splitting, with the
// eigenvalue ladder of the difference tensor read off in that frame.
struct FrameResult {
  int n1 = 0, n2 = 0;
  DMat<double> basis;  // row a = frame vector a (first n1 rows: flat factor)
  std::vector<double> lambdas;           // lambda_{i,i} per level
  std::vector<double> mus;               // mu_i per level
  std::vector<double> maximizer_values;  // best f_1 value per level
  std::vector<LevelInfo> levels;
  bool vanishing_cubic = false;
  double gram_residual = 0;
  double stationarity_residual = 0;
  double isotropy_residual = 0;       // K_{X_i} restricted to second factor
  double second_factor_residual = 0;  // K_{Y_a}Y_b against its canonical form
  double canonical_form_residual = 0; // full cubic form against the ladder model
};

namespace detail {

inline double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double h_dot(const DMat<double>& h, std::span<const double> a,
                    std::span<const double> b) {
  double s = 0;
  for (int i = 0; i < h.rows; ++i)
    for (int j = 0; j < h.cols; ++j) s += h(i, j) * a[i] * b[j];
  return s;
}

inline std::vector<std::vector<double>> h_orthonormalize(
    const DMat<double>& h, std::vector<std::vector<double>> vs) {
  std::vector<std::vector<double>> out;
  for (auto& v : vs) {
    for (const auto& e : out) {
      double c = h_dot(h, v, e);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * e[i];
    }
    double nrm = std::sqrt(h_dot(h, v, v));
    if (nrm < 1e-9) continue;
    for (auto& x : v) x /= nrm;
    out.push_back(std::move(v));
  }
  return out;
}

// C contracted with three vectors.
inline double cubic_eval(const Tensor3<double>& C, std::span<const double> a,
                         std::span<const double> b, std::span<const double> c) {
  const int n = C.n;
  double s = 0;
  for (int i = 0; i < n; ++i) {
    if (a[i] == 0) continue;
    for (int j = 0; j < n; ++j) {
      if (b[j] == 0) continue;
      double ab = a[i] * b[j];
      for (int k = 0; k < n; ++k) s += C(i, j, k) * ab * c[k];
    }
  }
  return s;
}

}  // namespace detail

// Maximize f(u) = C(u,u,u) over the h-unit sphere of span(subspace) by
// shifted symmetric higher-order power iteration. The shift keeps each step
// an ascent step, so random starts converge to (local) maxima; several seeded
// starts are taken and the best kept.
inline MaximizeResult maximize_cubic(const Tensor3<double>& C,
                                     const DMat<double>& h,
                                     std::vector<std::vector<double>> subspace,
                                     const FrameConfig& cfg = {}) {
  require(!subspace.empty(), ErrorKind::bad_argument, "empty subspace");
  const int n = C.n;
  auto B = detail::h_orthonormalize(h, std::move(subspace));
  require(!B.empty(), ErrorKind::bad_argument, "degenerate subspace");
  const int m = static_cast<int>(B.size());

  // reduced symmetric tensor on the orthonormal basis
  std::vector<double> T(static_cast<std::size_t>(m) * m * m);
  auto t = [&](int a, int b, int c) -> double& {
    return T[(static_cast<std::size_t>(a) * m + b) * m + c];
  };
  double tmax = 0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c) {
        t(a, b, c) = detail::cubic_eval(C, B[a], B[b], B[c]);
        tmax = std::max(tmax, std::fabs(t(a, b, c)));
      }

  MaximizeResult best;
  auto to_full = [&](std::span<const double> v) {
    std::vector<double> out(n, 0.0);
    for (int a = 0; a < m; ++a)
      for (int i = 0; i < n; ++i) out[i] += v[a] * B[a][i];
    return out;
  };

  if (tmax < 1e-11) {
    best.vanishing = true;
    best.converged = true;
    best.direction = B[0];
    return best;
  }

  auto apply = [&](std::span<const double> v) {
    // M = C(v, ., .) in reduced coordinates
    DMat<double> M(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        double s = 0;
        for (int c = 0; c < m; ++c) s += t(a, b, c) * v[c];
        M(a, b) = s;
      }
    return M;
  };

  bool have = false;
  for (int s = 0; s < cfg.starts; ++s) {
    std::mt19937_64 rng(cfg.seed ^ (0x9E3779B97F4A7C15ull * (s + 1)));
    std::vector<double> v(m);
    double nrm = 0;
    do {
      nrm = 0;
      for (auto& x : v) {
        x = 2 * detail::uniform01(rng) - 1;
        nrm += x * x;
      }
      nrm = std::sqrt(nrm);
    } while (nrm < 1e-3);
    for (auto& x : v) x /= nrm;

    int it = 0;
    bool conv = false;
    for (; it < cfg.max_iter; ++it) {
      DMat<double> M = apply(v);
      auto ev = symmetric_eigenvalues(M);
      double alpha = std::max(0.0, -1.5 * ev.front());
      std::vector<double> w(m);
      double wn = 0;
      for (int a = 0; a < m; ++a) {
        double s2 = alpha * v[a];
        for (int b = 0; b < m; ++b) s2 += M(a, b) * v[b];
        w[a] = s2;
        wn += s2 * s2;
      }
      wn = std::sqrt(wn);
      if (wn < 1e-300) break;
      double step = 0;
      for (int a = 0; a < m; ++a) {
        w[a] /= wn;
        step = std::max(step, std::fabs(w[a] - v[a]));
      }
      // antipodal iterates are the same direction for the odd function f
      double stepflip = 0;
      for (int a = 0; a < m; ++a)
        stepflip = std::max(stepflip, std::fabs(w[a] + v[a]));
      v = w;
      if (std::min(step, stepflip) < cfg.step_tol) {
        conv = true;
        break;
      }
    }

    DMat<double> M = apply(v);
    double lam = 0;
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) lam += v[a] * M(a, b) * v[b];
    if (lam < 0) {
      for (auto& x : v) x = -x;
      lam = -lam;
    }
    M = apply(v);
    double stat = 0;
    for (int a = 0; a < m; ++a) {
      double g = -lam * v[a];
      for (int b = 0; b < m; ++b) g += M(a, b) * v[b];
      stat += g * g;
    }
    stat = std::sqrt(stat);

    if (!have || lam > best.value) {
      have = true;
      best.value = lam;
      best.direction = to_full(v);
      best.iterations = it;
      best.stationarity = stat;
      best.converged = conv;
    }
  }
  return best;
}

// The recursive frame construction on a product-split affine sphere: at each
// level maximize the cubic form on the unit sphere of what remains of the
// first factor, take the maximizer as the next frame vector, and restrict.
// The mu ladder is read from the action on the second factor, where K acts
// isotropically.
inline FrameResult split_frame(const BlaschkeData<double>& b, const Blocks& blocks,
                               const FrameConfig& cfg = {}) {
  const int n = b.n;
  const int n1 = static_cast<int>(blocks.first.size());
  const int n2 = static_cast<int>(blocks.second.size());
  require(n1 >= 1 && n2 >= 1 && n1 + n2 == n, ErrorKind::bad_argument,
          "block partition does not cover the coordinates");
  {
    double dev = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        dev = std::max(dev, std::fabs(b.shape(i, j) -
                                      (i == j ? b.mean_curvature : 0.0)));
    require(dev < 1e-5, ErrorKind::bad_argument,
            "frame construction expects an affine sphere (S = H id)");
  }

  auto coord_vectors = [&](const std::vector<int>& idx) {
    std::vector<std::vector<double>> vs;
    for (int i : idx) {
      std::vector<double> e(n, 0.0);
      e[i] = 1.0;
      vs.push_back(std::move(e));
    }
    return vs;
  };
  auto E = detail::h_orthonormalize(b.metric.h, coord_vectors(blocks.first));
  auto F = detail::h_orthonormalize(b.metric.h, coord_vectors(blocks.second));
  require(static_cast<int>(E.size()) == n1 && static_cast<int>(F.size()) == n2,
          ErrorKind::rank_deficient, "degenerate block metric");

  FrameResult fr;
  fr.n1 = n1;
  fr.n2 = n2;

  std::vector<std::vector<double>> X;
  auto Es = E;
  for (int level = 0; level < n1; ++level) {
    FrameConfig lc = cfg;
    lc.seed = cfg.seed * 1000003ull + static_cast<std::uint64_t>(level);
    auto r = maximize_cubic(b.cubic, b.metric.h, Es, lc);
    LevelInfo li;
    li.subspace_dim = static_cast<int>(Es.size());
    li.value = r.value;
    li.iterations = r.iterations;
    li.stationarity = r.stationarity;
    li.converged = r.converged;
    fr.levels.push_back(li);
    if (r.vanishing && level == 0) {
      // zero cubic form (hyperquadric): no ladder to build
      fr.vanishing_cubic = true;
      fr.lambdas.assign(n1, 0.0);
      fr.mus.assign(n1, 0.0);
      fr.maximizer_values.assign(n1, 0.0);
      X = Es;
      break;
    }
    fr.maximizer_values.push_back(r.value);
    fr.lambdas.push_back(r.value);
    fr.stationarity_residual = std::max(fr.stationarity_residual, r.stationarity);
    X.push_back(r.direction);

    if (static_cast<int>(Es.size()) == 1) {
      Es.clear();
      break;
    }
    // orthonormal basis of the complement of the maximizer inside span(Es),
    // via a Householder reflector in the reduced coordinates
    const int m = static_cast<int>(Es.size());
    std::vector<double> xc(m);
    for (int a = 0; a < m; ++a) xc[a] = detail::h_dot(b.metric.h, r.direction, Es[a]);
    std::vector<double> w(m);
    w = xc;
    w[0] -= 1.0;
    double wn = 0;
    for (double v : w) wn += v * v;
    std::vector<std::vector<double>> comp;
    for (int c = 1; c < m; ++c) {
      std::vector<double> col(m, 0.0);
      col[c] = 1.0;
      if (wn > 1e-24) {
        double f = 2.0 * w[c] / wn;
        for (int a = 0; a < m; ++a) col[a] -= f * w[a];
      }
      std::vector<double> full(n, 0.0);
      for (int a = 0; a < m; ++a)
        for (int i = 0; i < n; ++i) full[i] += col[a] * Es[a][i];
      comp.push_back(std::move(full));
    }
    Es = detail::h_orthonormalize(b.metric.h, std::move(comp));
    require(static_cast<int>(Es.size()) == m - 1, ErrorKind::rank_deficient,
            "lost rank while restricting the maximization subspace");
  }

  // mu_i from the second-factor action of K_{X_i}
  if (!fr.vanishing_cubic) {
    for (int i = 0; i < n1; ++i) {
      double tr = 0, dev = 0;
      DMat<double> A(n2, n2);
      for (int a = 0; a < n2; ++a)
        for (int bb = 0; bb < n2; ++bb)
          A(a, bb) = detail::cubic_eval(b.cubic, X[i], F[a], F[bb]);
      for (int a = 0; a < n2; ++a) tr += A(a, a);
      double mu = tr / n2;
      for (int a = 0; a < n2; ++a)
        for (int bb = 0; bb < n2; ++bb)
          dev = std::max(dev, std::fabs(A(a, bb) - (a == bb ? mu : 0.0)));
      fr.mus.push_back(mu);
      fr.isotropy_residual = std::max(fr.isotropy_residual, dev);
    }
  }

  // assemble basis rows and the global residuals
  fr.basis = DMat<double>(n, n);
  std::vector<std::vector<double>> all;
  for (auto& v : X) all.push_back(v);
  for (auto& v : F) all.push_back(v);
  for (int r = 0; r < n; ++r)
    for (int c2 = 0; c2 < n; ++c2) fr.basis(r, c2) = all[r][c2];

  for (int a = 0; a < n; ++a)
    for (int bb = 0; bb < n; ++bb) {
      double g = detail::h_dot(b.metric.h, all[a], all[bb]) - (a == bb ? 1.0 : 0.0);
      fr.gram_residual = std::max(fr.gram_residual, std::fabs(g));
    }

  if (!fr.vanishing_cubic) {
    // model cubic form from the ladder: the only nonzero frame components are
    //   C(X_i,X_i,X_i) = lambda_i,  C(X_i,X_j,X_j) = mu_i (i<j),
    //   C(X_i,Y_a,Y_b) = mu_i delta_ab
    auto model = [&](int p, int q, int r) {
      int idx[3] = {p, q, r};
      std::sort(idx, idx + 3);
      int nf = 0;
      for (int v : idx) nf += v < n1 ? 1 : 0;
      if (nf == 3) {
        if (idx[0] == idx[1] && idx[1] == idx[2]) return fr.lambdas[idx[0]];
        if (idx[1] == idx[2] && idx[0] < idx[1]) return fr.mus[idx[0]];
        return 0.0;
      }
      if (nf == 1 && idx[1] == idx[2]) return fr.mus[idx[0]];
      return 0.0;
    };
    double worst = 0, worst2 = 0;
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q)
        for (int r = 0; r < n; ++r) {
          double got = detail::cubic_eval(b.cubic, all[p], all[q], all[r]);
          double dev = std::fabs(got - model(p, q, r));
          worst = std::max(worst, dev);
          if (p >= n1 && q >= n1) worst2 = std::max(worst2, dev);
        }
    fr.canonical_form_residual = worst;
    fr.second_factor_residual = worst2;
  }
  return fr;
}

// Parallelism surrogate across a sequence of points: the difference tensor's
// covariant derivative must vanish and the (frame-free) ladder values must be
// point independent.
struct ParallelismReport {
  double max_nabla_k = 0;
  double lambda_spread = 0;
  double mu_spread = 0;
  bool has_ladder = false;
};

inline ParallelismReport verify_parallelism(
    std::span<const BlaschkeData<double>> datas,
    std::span<const FrameResult> frames = {}) {
  ParallelismReport rep;
  for (const auto& b : datas)
    for (double x : b.nabla_k.v)
      rep.max_nabla_k = std::max(rep.max_nabla_k, std::fabs(x));
  if (!frames.empty() && !frames[0].vanishing_cubic) {
    rep.has_ladder = true;
    const std::size_t levels = frames[0].lambdas.size();
    for (std::size_t l = 0; l < levels; ++l) {
      double lmin = frames[0].lambdas[l], lmax = lmin;
      double mmin = frames[0].mus[l], mmax = mmin;
      for (const auto& f : frames) {
        lmin = std::min(lmin, f.lambdas[l]);
        lmax = std::max(lmax, f.lambdas[l]);
        mmin = std::min(mmin, f.mus[l]);
        mmax = std::max(mmax, f.mus[l]);
      }
      rep.lambda_spread = std::max(rep.lambda_spread, lmax - lmin);
      rep.mu_spread = std::max(rep.mu_spread, mmax - mmin);
    }
  }
  return rep;
}

}  // namespace blaschke
