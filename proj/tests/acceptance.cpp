// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// fail. Tolerances are pinned here, in code.

#include <array>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include <blaschke/frame.hpp>
#include <blaschke/invariants.hpp>
#include <blaschke/verify.hpp>

using namespace blaschke;

namespace {

struct ChartRun {
  ChartSpec spec;
  Chart chart;
  std::vector<std::vector<double>> points;
  std::vector<BlaschkeData<double>> data;
  std::vector<FrameResult> frames;  // empty rows for charts without ladder
  // gauss, codazzi, ricci identity, apolarity, tsinghua per point
  std::vector<std::array<double, 5>> identities;
};

double uniform01(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

std::vector<double> sample(const Chart& chart, std::mt19937_64& rng) {
  std::vector<double> u(chart.dim);
  for (int i = 0; i < chart.dim; ++i) {
    auto [lo, hi] = chart.sample_box[i];
    u[i] = lo + (hi - lo) * uniform01(rng);
  }
  return u;
}

double max_abs(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

std::vector<std::vector<double>> gram_schmidt(const DMat<double>& h,
                                              std::vector<std::vector<double>> vs) {
  std::vector<std::vector<double>> out;
  const int n = h.rows;
  auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += h(i, j) * a[i] * b[j];
    return s;
  };
  for (auto& v : vs) {
    for (const auto& e : out) {
      double c = dot(v, e);
      for (int i = 0; i < n; ++i) v[i] -= c * e[i];
    }
    double nm = std::sqrt(dot(v, v));
    if (nm < 1e-9) continue;
    for (auto& x : v) x /= nm;
    out.push_back(v);
  }
  return out;
}

double cubic_at(const Tensor3<double>& C, const std::vector<double>& v) {
  const int n = C.n;
  double s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) s += C(i, j, k) * v[i] * v[j] * v[k];
  return s;
}

}  // namespace

int main() {
  const std::vector<ChartSpec> catalog = {
      ChartSpec::paraboloid(3), ChartSpec::ellipsoid(3),
      ChartSpec::hyperboloid(3), ChartSpec::q1n(3),
      ChartSpec::q1n(4),        ChartSpec::calabi(2, 2),
      ChartSpec::calabi(2, 3),  ChartSpec::calabi(1, 2),
      ChartSpec::thm12(3),      ChartSpec::thm12(4)};

  std::vector<ChartRun> runs;
  for (std::size_t ci = 0; ci < catalog.size(); ++ci) {
    ChartRun r;
    r.spec = catalog[ci];
    r.chart = make_chart(r.spec);
    std::mt19937_64 rng(1000 + ci);
    for (int p = 0; p < 10; ++p) {
      auto u = sample(r.chart, rng);
      r.points.push_back(u);
      if (r.chart.mode == ScalarMode::rational) {
        std::vector<Rational> ur(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) ur[i] = Rational(u[i]);
        auto br = full_invariants<Rational>(r.chart, ur);
        r.identities.push_back({to_double(check_gauss(br)),
                                to_double(check_codazzi(br)),
                                to_double(check_ricci_identity(br)),
                                to_double(check_apolarity(br)),
                                to_double(check_tsinghua(br))});
        r.data.push_back(to_double_data(br));
      } else {
        auto b = full_invariants<double>(r.chart, u);
        r.identities.push_back({to_double(check_gauss(b)),
                                to_double(check_codazzi(b)),
                                to_double(check_ricci_identity(b)),
                                to_double(check_apolarity(b)),
                                to_double(check_tsinghua(b))});
        r.data.push_back(std::move(b));
      }
      if (r.chart.blocks) {
        auto fr = split_frame(r.data.back(), *r.chart.blocks);
        r.frames.push_back(std::move(fr));
      }
    }
    runs.push_back(std::move(r));
  }
  auto run_of = [&](const ChartSpec& s) -> const ChartRun& {
    for (const auto& r : runs)
      if (r.spec == s) return r;
    std::abort();
  };

  int failures = 0;
  auto criterion = [&](int k, const std::string& desc, bool ok) {
    std::printf("[%s] criterion %2d: %s\n", ok ? "PASS" : "FAIL", k, desc.c_str());
    if (!ok) ++failures;
  };

  // 1. structural identities on every chart at 10 seeded points
  {
    bool ok = true;
    for (const auto& r : runs) {
      const bool exact = r.chart.mode == ScalarMode::rational;
      for (const auto& id : r.identities)
        for (double v : id) ok = ok && (exact ? v == 0.0 : v < 1e-7);
    }
    criterion(1, "Gauss/Codazzi/Ricci-identity/apolarity/Tsinghua residuals "
                 "< 1e-7 (exact 0 in rational mode)", ok);
  }

  // 2. affine-sphere certification
  {
    bool ok = true;
    for (const auto& r : runs) {
      double hmin = r.data[0].mean_curvature, hmax = hmin;
      for (const auto& b : r.data) {
        for (int i = 0; i < b.n; ++i)
          for (int j = 0; j < b.n; ++j) {
            double dev = std::fabs(b.shape(i, j) - (i == j ? b.mean_curvature : 0.0));
            ok = ok && dev < 1e-7;
          }
        hmin = std::min(hmin, b.mean_curvature);
        hmax = std::max(hmax, b.mean_curvature);
      }
      double mean = 0;
      for (const auto& b : r.data) mean += b.mean_curvature;
      mean /= static_cast<double>(r.data.size());
      double spread = (hmax - hmin) / std::max(std::fabs(mean), 1e-8);
      ok = ok && spread < 1e-7;
      switch (r.spec.kind) {
        case ChartKind::paraboloid: ok = ok && std::fabs(mean) < 1e-12; break;
        case ChartKind::ellipsoid: ok = ok && mean > 0; break;
        case ChartKind::q1n:
        case ChartKind::calabi:
        case ChartKind::thm12: ok = ok && mean < 0; break;
        default: break;
      }
    }
    criterion(2, "S = H id, relative H-spread < 1e-7, H signs as classified", ok);
  }

  // 3. quadric sanity: vanishing cubic form
  {
    bool ok = true;
    for (auto spec : {ChartSpec::ellipsoid(3), ChartSpec::hyperboloid(3)})
      for (const auto& b : run_of(spec).data)
        ok = ok && max_abs(b.difference.v) < 1e-9;
    criterion(3, "||K|| < 1e-9 on ellipsoid(3) and hyperboloid(3)", ok);
  }

  // 4. flat case: q1n(3)
  {
    bool ok = true;
    for (const auto& b : run_of(ChartSpec::q1n(3)).data)
      ok = ok && max_abs(b.curvature.v) < 1e-8 && max_abs(b.nabla_k.v) < 1e-7;
    criterion(4, "q1n(3): ||R|| < 1e-8 and ||nabla K|| < 1e-7", ok);
  }

  // 5. product relations on calabi(2,2) and calabi(2,3)
  {
    bool ok = true;
    for (auto spec : {ChartSpec::calabi(2, 2), ChartSpec::calabi(2, 3)}) {
      const auto& r = run_of(spec);
      const int n = r.chart.dim, n1 = spec.n1, n2 = spec.n2;
      for (std::size_t p = 0; p < r.data.size(); ++p) {
        const auto& b = r.data[p];
        double H = b.mean_curvature;
        auto fit = product_structure(b, *r.chart.blocks, 555 + p);
        ok = ok && fit.c1 && std::fabs(*fit.c1) < 1e-7;
        ok = ok && fit.c2 &&
             std::fabs(*fit.c2 - (n + 1) * H / (n2 + 1)) < 1e-6 * std::fabs(H);
        ok = ok && fit.form_residual < 1e-7;
        double crossh = 0;
        for (int i : r.chart.blocks->first)
          for (int j : r.chart.blocks->second)
            crossh = std::max(crossh, std::fabs(b.metric.h(i, j)));
        ok = ok && crossh < 1e-7;
        const auto& fr = r.frames[p];
        double smu = 0;
        for (double m : fr.mus) smu += m * m;
        ok = ok && std::fabs(smu + n1 * H / (n2 + 1)) < 1e-6 * std::fabs(H);
      }
    }
    criterion(5, "calabi(2,2)/(2,3): c1 = 0, c2 = (n+1)H/(n2+1), "
                 "sum mu^2 = -n1 H/(n2+1), block-diagonal metric", ok);
  }

  // 6. canonical frame ladder on calabi(2,2), with brute-force cross-check
  {
    bool ok = true;
    const auto& r = run_of(ChartSpec::calabi(2, 2));
    const int n = 4;
    for (std::size_t p = 0; p < r.data.size(); ++p) {
      const auto& b = r.data[p];
      const auto& fr = r.frames[p];
      for (const auto& lv : fr.levels) ok = ok && lv.converged;
      const double ref = (n - 1) * std::sqrt(-b.mean_curvature / n);
      ok = ok && std::fabs(fr.lambdas[0] - ref) < 1e-6 * ref;
      for (std::size_t i = 0; i < fr.lambdas.size(); ++i)
        ok = ok && std::fabs(fr.lambdas[i] +
                             (n - static_cast<int>(i) - 1) * fr.mus[i]) < 1e-6;
    }
    // brute force at the first point: level 1 over the flat 2-plane,
    // level 2 over the complement line
    const auto& b = r.data[0];
    const auto& fr = r.frames[0];
    auto E = gram_schmidt(b.metric.h, {{1, 0, 0, 0}, {0, 1, 0, 0}});
    double bf1 = -1e300;
    for (int k = 0; k < 10000; ++k) {
      double t = 2 * M_PI * k / 10000.0;
      std::vector<double> v(4);
      for (int i = 0; i < 4; ++i)
        v[i] = std::cos(t) * E[0][i] + std::sin(t) * E[1][i];
      bf1 = std::max(bf1, cubic_at(b.cubic, v));
    }
    ok = ok && std::fabs(bf1 - fr.lambdas[0]) < 1e-4;
    std::vector<double> x1(4);
    for (int i = 0; i < 4; ++i) x1[i] = fr.basis(0, i);
    auto comp = gram_schmidt(b.metric.h, {x1, E[0], E[1]});
    // comp[1] spans the level-2 line
    double bf2 = std::max(cubic_at(b.cubic, comp[1]), -cubic_at(b.cubic, comp[1]));
    ok = ok && std::fabs(bf2 - fr.lambdas[1]) < 1e-4;
    criterion(6, "calabi(2,2) ladder: lambda_1 = (n-1)sqrt(-H/n), "
                 "lambda_i + (n-i)mu_i = 0, brute-force agreement", ok);
  }

  // 7. thm12 eigenstructure and curvature relation
  {
    bool ok = true;
    for (int n : {3, 4}) {
      const auto& r = run_of(ChartSpec::thm12(n));
      for (std::size_t p = 0; p < r.data.size(); ++p) {
        const auto& b = r.data[p];
        const auto& fr = r.frames[p];
        const double H = b.mean_curvature;
        const double root = std::sqrt(-H / n);
        ok = ok && std::fabs(fr.lambdas[0] - (n - 1) * root) < 1e-6;
        ok = ok && std::fabs(fr.mus[0] + root) < 1e-6;
        ok = ok && fr.canonical_form_residual < 1e-6;
        auto fit = product_structure(b, *r.chart.blocks, 777 + p);
        ok = ok && fit.c2 &&
             std::fabs(*fit.c2 - (n + 1) * H / n) < 1e-6 * std::fabs(H);
        ok = ok && max_abs(b.nabla_k.v) < 1e-7;
      }
    }
    criterion(7, "thm12(3)/(4): K eigenvalues (n-1)sqrt(-H/n), -sqrt(-H/n); "
                 "c2 = (n+1)H/n; ||nabla K|| < 1e-7", ok);
  }

  // 8. parallel Ricci
  {
    bool ok = true;
    for (auto spec : {ChartSpec::q1n(3), ChartSpec::q1n(4), ChartSpec::thm12(3),
                      ChartSpec::calabi(2, 2), ChartSpec::thm12(4)})
      for (const auto& b : run_of(spec).data)
        ok = ok && parallel_ricci_check(b) < 1e-7;
    criterion(8, "||nabla Ric|| < 1e-7 on q1n(3), q1n(4), thm12(3), "
                 "calabi(2,2), thm12(4)", ok);
  }

  // 9. implicit-equation membership, 100 seeded points per chart
  {
    bool ok = true;
    for (std::size_t ci = 0; ci < catalog.size(); ++ci) {
      auto chart = make_chart(catalog[ci]);
      if (!chart.has_implicit) continue;
      std::mt19937_64 rng(5000 + ci);
      for (int p = 0; p < 100; ++p) {
        auto u = sample(chart, rng);
        double res;
        if (chart.mode == ScalarMode::rational) {
          std::vector<Rational> ur(u.size());
          for (std::size_t i = 0; i < u.size(); ++i) ur[i] = Rational(u[i]);
          res = std::fabs(to_double(implicit_residual<Rational>(chart, ur)));
        } else {
          res = std::fabs(implicit_residual<double>(chart, u));
        }
        ok = ok && res < 1e-12;
      }
    }
    criterion(9, "implicit membership |P(x(u)) - const| < 1e-12 at 100 points "
                 "per chart", ok);
  }

  // 10. negative controls through the suite hook
  {
    SuiteConfig cfg;
    cfg.chart = ChartSpec::calabi(2, 2);
    cfg.points = 3;
    cfg.corruption = Corruption::difference_tensor;
    auto repK = run_suite(cfg);
    cfg.corruption = Corruption::nabla_difference_tensor;
    auto repN = run_suite(cfg);
    bool ok = !repK.verdict && !repN.verdict;
    double gauss = 0, codazzi = 0;
    for (const auto& c : repK.checks)
      if (c.name == "gauss_identity") gauss = c.residual;
    for (const auto& c : repN.checks)
      if (c.name == "codazzi_identity") codazzi = c.residual;
    ok = ok && gauss > 1e-3 && codazzi > 1e-3;
    criterion(10, "corrupted K drives Gauss > 1e-3; corrupted nabla K drives "
                  "Codazzi > 1e-3", ok);
  }

  // 11. byte-identical reports under identical configs
  {
    SuiteConfig cfg;
    cfg.chart = ChartSpec::calabi(2, 2);
    cfg.points = 10;
    cfg.seed = 42;
    auto a = report_to_json(run_suite(cfg));
    auto b = report_to_json(run_suite(cfg));
    criterion(11, "two identical SuiteConfig runs produce byte-identical JSON",
              a == b && !a.empty());
  }

  std::printf("%d of 11 criteria passed\n", 11 - failures);
  return failures == 0 ? 0 : 1;
}
