#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "chart.hpp"
#include "errors.hpp"
#include "frame.hpp"
#include "invariants.hpp"

namespace blaschke {

enum class ReportFormat { json, csv };

// Negative-control hook: deliberately corrupt one tensor after the pipeline
// so the corresponding structural identity must fail. Guards the suite
// against vacuous passes; not reachable from the CLI.
enum class Corruption { none, difference_tensor, nabla_difference_tensor };

struct SuiteConfig {
  ChartSpec chart = ChartSpec::paraboloid(3);
  int points = 10;
  std::uint64_t seed = 42;
  int jet_order = 5;
  double tol_identity = 1e-7;
  double tol_solve = 1e-9;
  double tol_ladder = 1e-6;
  std::string output;
  ReportFormat format = ReportFormat::json;
  Corruption corruption = Corruption::none;
  FrameConfig frame;
};

struct CheckRow {
  std::string name;
  double residual = 0;
  double tolerance = 0;
  bool pass = false;
};

struct PointRow {
  int point = 0;  // -1 for cross-point aggregates
  std::string name;
  double residual = 0;
  double tolerance = 0;
  bool pass = false;
};

struct ConstStat {
  double mean = 0;
  double spread = 0;
  bool applicable = false;
};

struct CheckReport {
  int schema_version = 1;
  SuiteConfig config;
  std::vector<std::vector<double>> points;
  std::vector<CheckRow> checks;
  std::vector<PointRow> point_rows;
  ConstStat mean_curvature, c1, c2, sum_mu_sq;
  std::vector<ConstStat> lambda_ladder, mu_ladder;
  std::vector<std::string> errors;
  bool verdict = false;
};

// Constant-curvature fit of the curvature tensor against the two-block
// product form. c values are sectional-curvature estimates (3 random planes
// per block); the least-squares fit over the whole tensor is the redundancy,
// and their disagreement is reported.
struct ProductFit {
  std::optional<double> c1, c2;
  double form_residual = 0;
  double sectional_agreement = 0;
};

namespace detail {

inline double stat_uniform(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// aggregation that preserves first-insertion order of check names
class Collector {
 public:
  void add(std::vector<PointRow>& rows, int point, const std::string& name,
           double residual, double tol, bool lower_bound = false) {
    bool pass = lower_bound ? residual > tol : residual <= tol;
    rows.push_back({point, name, residual, tol, pass});
    auto it = index_.find(name);
    if (it == index_.end()) {
      index_[name] = agg_.size();
      agg_.push_back({name, residual, tol, pass, lower_bound});
    } else {
      Agg& a = agg_[it->second];
      a.resid = lower_bound ? std::min(a.resid, residual)
                            : std::max(a.resid, residual);
      a.pass = a.pass && pass;
    }
  }

  std::vector<CheckRow> rows() const {
    std::vector<CheckRow> out;
    for (const auto& a : agg_) out.push_back({a.name, a.resid, a.tol, a.pass});
    return out;
  }

 private:
  struct Agg {
    std::string name;
    double resid, tol;
    bool pass;
    bool lower;
  };
  std::map<std::string, std::size_t> index_;
  std::vector<Agg> agg_;
};

}  // namespace detail

inline ProductFit product_structure(const BlaschkeData<double>& b,
                                    const Blocks& blocks,
                                    std::uint64_t plane_seed) {
  const int n = b.n;
  std::mt19937_64 rng(plane_seed);
  auto sectional = [&](const std::vector<int>& block) -> std::optional<double> {
    if (block.size() < 2) return std::nullopt;
    double acc = 0;
    for (int trial = 0; trial < 3; ++trial) {
      std::vector<std::vector<double>> pair;
      for (int v = 0; v < 2; ++v) {
        std::vector<double> w(n, 0.0);
        for (int i : block) w[i] = 2 * detail::stat_uniform(rng) - 1;
        pair.push_back(std::move(w));
      }
      auto on = detail::h_orthonormalize(b.metric.h, pair);
      if (on.size() < 2) {
        --trial;
        continue;
      }
      const auto& e = on[0];
      const auto& f = on[1];
      double sec = 0;
      for (int l = 0; l < n; ++l) {
        double rv = 0;
        for (int k = 0; k < n; ++k)
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
              rv += b.curvature(l, k, i, j) * f[k] * e[i] * f[j];
        for (int m = 0; m < n; ++m) sec += b.metric.h(l, m) * rv * e[m];
      }
      acc += sec;
    }
    return acc / 3.0;
  };

  ProductFit fit;
  fit.c1 = sectional(blocks.first);
  fit.c2 = sectional(blocks.second);

  // basis tensor of constant curvature restricted to one block
  std::vector<bool> in1(n, false), in2(n, false);
  for (int i : blocks.first) in1[i] = true;
  for (int i : blocks.second) in2[i] = true;
  auto basis = [&](const std::vector<bool>& in, int l, int k, int i, int j) {
    if (!in[l] || !in[k] || !in[i] || !in[j]) return 0.0;
    double t = 0;
    if (l == i) t += b.metric.h(j, k);
    if (l == j) t -= b.metric.h(i, k);
    return t;
  };

  double num1 = 0, den1 = 0, num2 = 0, den2 = 0;
  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double t1 = basis(in1, l, k, i, j), t2 = basis(in2, l, k, i, j);
          double r = b.curvature(l, k, i, j);
          num1 += t1 * r;
          den1 += t1 * t1;
          num2 += t2 * r;
          den2 += t2 * t2;
        }
  double f1 = den1 > 0 ? num1 / den1 : 0.0;
  double f2 = den2 > 0 ? num2 / den2 : 0.0;

  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double dev = b.curvature(l, k, i, j) - f1 * basis(in1, l, k, i, j) -
                       f2 * basis(in2, l, k, i, j);
          fit.form_residual = std::max(fit.form_residual, std::fabs(dev));
        }
  if (fit.c1)
    fit.sectional_agreement = std::max(fit.sectional_agreement, std::fabs(*fit.c1 - f1));
  if (fit.c2)
    fit.sectional_agreement = std::max(fit.sectional_agreement, std::fabs(*fit.c2 - f2));
  return fit;
}

inline double parallel_ricci_check(const BlaschkeData<double>& b) {
  require(b.has_second_derivatives, ErrorKind::insufficient_order,
          "parallel-Ricci check needs jet order >= 5");
  double worst = 0;
  for (double x : b.nabla_ricci.v) worst = std::max(worst, std::fabs(x));
  return worst;
}

namespace detail {

struct KindTraits {
  bool quadric = false;     // cubic form must vanish
  bool flat = false;        // curvature must vanish
  int h_sign = 0;           // -1, 0, +1
  bool curved_factor = false;  // c2 relations apply
};

inline KindTraits kind_traits(ChartKind k) {
  switch (k) {
    case ChartKind::paraboloid: return {true, true, 0, false};
    case ChartKind::ellipsoid: return {true, false, +1, false};
    case ChartKind::hyperboloid: return {true, false, -1, false};
    case ChartKind::q1n: return {false, true, -1, false};
    case ChartKind::calabi: return {false, false, -1, true};
    case ChartKind::thm12: return {false, false, -1, true};
  }
  return {};
}

inline void apply_corruption(BlaschkeData<double>& b, Corruption c) {
  if (c == Corruption::difference_tensor) {
    b.difference(0, 0, b.n > 1 ? 1 : 0) += 0.1;
    b.difference(0, b.n > 1 ? 1 : 0, 0) += 0.1;
  } else if (c == Corruption::nabla_difference_tensor) {
    b.nabla_k(0, 0, b.n > 1 ? 1 : 0, 0) += 0.1;
  }
}

}  // namespace detail

// Appends the product-constant relations to the report rows:
//   c2 = (n+1) H / (n2+1)  and  sum mu_i^2 = -n1 H / (n2+1),
// both relative to |H|.
inline void constants_check(detail::Collector& col,
                            std::vector<PointRow>& rows, double H, double c2,
                            int n, int n1, int n2, double sum_mu_sq,
                            bool have_ladder, double tol_rel) {
  const double scale = std::fabs(H);
  col.add(rows, -1, "c2_mean_curvature_relation",
          std::fabs(c2 - (n + 1) * H / (n2 + 1)) / scale, tol_rel);
  if (have_ladder)
    col.add(rows, -1, "mu_sq_sum_relation",
            std::fabs(sum_mu_sq + n1 * H / (n2 + 1)) / scale, tol_rel);
}

inline CheckReport run_suite(const SuiteConfig& cfg) {
  require(cfg.points >= 1, ErrorKind::bad_argument, "need at least one point");
  require(cfg.jet_order >= 5 && cfg.jet_order <= kMaxJetOrder,
          ErrorKind::insufficient_order,
          "suite checks include nabla^2 K and nabla Ric; jet order must be 5 "
          "or 6");
  require(cfg.tol_identity > 0 && cfg.tol_solve > 0 && cfg.tol_ladder > 0,
          ErrorKind::bad_argument, "tolerances must be positive");

  const Chart chart = make_chart(cfg.chart);
  const auto traits = detail::kind_traits(cfg.chart.kind);
  const bool exact = chart.mode == ScalarMode::rational &&
                     cfg.corruption == Corruption::none;
  // rational-mode runs demand exact zeros from the identity checks
  const double tol_identity = exact ? 0.0 : cfg.tol_identity;
  const double tol_solve = exact ? 0.0 : cfg.tol_solve;
  const double tol_implicit = exact ? 0.0 : 1e-12;
  const double tol_cross_deriv = exact ? 0.0 : 1e-8;

  CheckReport rep;
  rep.config = cfg;
  detail::Collector col;

  std::mt19937_64 rng(cfg.seed);
  for (int p = 0; p < cfg.points; ++p) {
    std::vector<double> u(chart.dim);
    for (int i = 0; i < chart.dim; ++i) {
      auto [lo, hi] = chart.sample_box[i];
      u[i] = lo + (hi - lo) * detail::stat_uniform(rng);
    }
    rep.points.push_back(u);
  }

  PipelineOptions popts{cfg.jet_order, cfg.tol_solve};
  std::vector<double> hs;
  std::vector<double> c1s, c2s, fit_resids, fit_agree;
  std::vector<FrameResult> frames;
  std::vector<double> sum_mu_sqs;

  for (int p = 0; p < cfg.points; ++p) {
    const auto& u = rep.points[p];
    try {
      BlaschkeData<double> b;
      double gauss, codazzi, apol, tsinghua, ricci_id, implicit_res;
      if (chart.mode == ScalarMode::rational) {
        std::vector<Rational> ur(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) ur[i] = Rational(u[i]);
        auto br = full_invariants<Rational>(chart, ur, popts);
        gauss = to_double(check_gauss(br));
        codazzi = to_double(check_codazzi(br));
        apol = to_double(check_apolarity(br));
        tsinghua = to_double(check_tsinghua(br));
        ricci_id = to_double(check_ricci_identity(br));
        implicit_res = chart.has_implicit
                           ? std::fabs(to_double(implicit_residual<Rational>(chart, ur)))
                           : 0.0;
        b = to_double_data(br);
        if (cfg.corruption != Corruption::none) {
          detail::apply_corruption(b, cfg.corruption);
          gauss = to_double(check_gauss(b));
          codazzi = to_double(check_codazzi(b));
        }
      } else {
        b = full_invariants<double>(chart, std::span<const double>(u), popts);
        detail::apply_corruption(b, cfg.corruption);
        gauss = to_double(check_gauss(b));
        codazzi = to_double(check_codazzi(b));
        apol = to_double(check_apolarity(b));
        tsinghua = to_double(check_tsinghua(b));
        ricci_id = to_double(check_ricci_identity(b));
        implicit_res =
            chart.has_implicit
                ? std::fabs(implicit_residual<double>(chart, std::span<const double>(u)))
                : 0.0;
      }
      const int n = b.n;

      col.add(rep.point_rows, p, "immersion_min_singular_value",
              b.immersion_min_sv, 1e-10, true);
      col.add(rep.point_rows, p, "metric_min_eigenvalue",
              b.metric_min_eigenvalue, 1e-10, true);
      if (chart.has_implicit)
        col.add(rep.point_rows, p, "implicit_membership", implicit_res, tol_implicit);
      col.add(rep.point_rows, p, "metricity", b.metricity_residual, tol_solve);
      col.add(rep.point_rows, p, "equiaffine_metric_consistency",
              b.equiaffine_residual, tol_solve);
      col.add(rep.point_rows, p, "weingarten_tangency", b.weingarten_residual,
              tol_solve);
      col.add(rep.point_rows, p, "transversal_volume", b.volume_residual, tol_solve);
      col.add(rep.point_rows, p, "cubic_form_symmetry",
              b.cubic_symmetry_residual, tol_solve);
      col.add(rep.point_rows, p, "apolarity", apol, tol_solve);
      col.add(rep.point_rows, p, "gauss_identity", gauss, tol_identity);
      col.add(rep.point_rows, p, "codazzi_identity", codazzi, tol_identity);
      col.add(rep.point_rows, p, "tsinghua_identity", tsinghua, tol_identity);
      col.add(rep.point_rows, p, "ricci_identity", ricci_id, tol_identity);

      {
        double off = 0, spread = 0;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            if (i != j) off = std::max(off, std::fabs(b.shape(i, j)));
        for (int i = 0; i < n; ++i)
          spread = std::max(spread, std::fabs(b.shape(i, i) - b.mean_curvature));
        col.add(rep.point_rows, p, "shape_operator_isotropy",
                std::max(off, spread), tol_identity);
      }
      hs.push_back(b.mean_curvature);

      if (traits.quadric) {
        double knorm = 0;
        for (double x : b.difference.v) knorm = std::max(knorm, std::fabs(x));
        col.add(rep.point_rows, p, "cubic_form_norm", knorm,
                exact ? 0.0 : 1e-9);
      }
      if (traits.flat) {
        double rnorm = 0;
        for (double x : b.curvature.v) rnorm = std::max(rnorm, std::fabs(x));
        col.add(rep.point_rows, p, "curvature_norm", rnorm, exact ? 0.0 : 1e-8);
      }
      {
        double nk = 0;
        for (double x : b.nabla_k.v) nk = std::max(nk, std::fabs(x));
        col.add(rep.point_rows, p, "cubic_form_parallel", nk, tol_identity);
        col.add(rep.point_rows, p, "ricci_parallel", parallel_ricci_check(b),
                tol_identity);
      }

      if (chart.blocks) {
        const auto& bl = *chart.blocks;
        double crossh = 0, crossd = 0;
        for (int i : bl.first)
          for (int j : bl.second)
            crossh = std::max(crossh, std::fabs(b.metric.h(i, j)));
        for (int k : bl.second)
          for (int i : bl.first)
            for (int j : bl.first)
              crossd = std::max(crossd, std::fabs(b.metric.dh(k, i, j)));
        for (int k : bl.first)
          for (int i : bl.second)
            for (int j : bl.second)
              crossd = std::max(crossd, std::fabs(b.metric.dh(k, i, j)));
        col.add(rep.point_rows, p, "metric_block_diagonal", crossh, tol_solve);
        col.add(rep.point_rows, p, "metric_block_cross_derivatives", crossd,
                tol_cross_deriv);

        auto fit = product_structure(b, bl, cfg.seed ^ (0xC001D00Dull + 7919ull * p));
        col.add(rep.point_rows, p, "product_curvature_form", fit.form_residual,
                tol_identity);
        col.add(rep.point_rows, p, "sectional_fit_agreement",
                fit.sectional_agreement, tol_identity);
        if (fit.c1) c1s.push_back(*fit.c1);
        if (fit.c2) c2s.push_back(*fit.c2);

        // canonical frame and ladder (skipped for vanishing cubic forms)
        FrameConfig fc = cfg.frame;
        auto fr = split_frame(b, bl, fc);
        if (!fr.vanishing_cubic) {
          col.add(rep.point_rows, p, "frame_gram", fr.gram_residual, tol_solve);
          col.add(rep.point_rows, p, "frame_stationarity",
                  fr.stationarity_residual, cfg.frame.stationarity_tol);
          col.add(rep.point_rows, p, "frame_isotropy", fr.isotropy_residual,
                  tol_identity);
          col.add(rep.point_rows, p, "frame_second_factor_form",
                  fr.second_factor_residual, tol_identity);
          col.add(rep.point_rows, p, "frame_canonical_form",
                  fr.canonical_form_residual, tol_identity);
          bool conv = true;
          double iters = 0;
          for (const auto& lv : fr.levels) {
            conv = conv && lv.converged;
            iters = std::max(iters, static_cast<double>(lv.iterations));
          }
          col.add(rep.point_rows, p, "frame_convergence", conv ? iters : 1e300,
                  static_cast<double>(cfg.frame.max_iter));
          const int n1 = fr.n1;
          double ladder = 0;
          for (int i = 0; i < n1; ++i)
            ladder = std::max(
                ladder, std::fabs(fr.lambdas[i] + (n - (i + 1)) * fr.mus[i]));
          col.add(rep.point_rows, p, "frame_ladder_relation", ladder,
                  cfg.tol_ladder);
          // sign pattern: lambda_i > 0 below the last level, last >= 0
          double sign_slack = 1e300;
          for (int i = 0; i + 1 < n1; ++i) sign_slack = std::min(sign_slack, fr.lambdas[i]);
          sign_slack = std::min(sign_slack, fr.lambdas[n1 - 1] + cfg.tol_ladder);
          col.add(rep.point_rows, p, "frame_ladder_signs", sign_slack, 0.0, true);

          if (traits.curved_factor && b.mean_curvature < 0) {
            const double ref = (n - 1) * std::sqrt(-b.mean_curvature / n);
            col.add(rep.point_rows, p, "frame_lambda1_closed_form",
                    std::fabs(fr.lambdas[0] - ref) / ref, cfg.tol_ladder);
            col.add(rep.point_rows, p, "frame_mu1_closed_form",
                    std::fabs(fr.mus[0] + std::sqrt(-b.mean_curvature / n)) /
                        std::sqrt(-b.mean_curvature / n),
                    cfg.tol_ladder);
          }
          double smu = 0;
          for (double m : fr.mus) smu += m * m;
          sum_mu_sqs.push_back(smu);
          frames.push_back(std::move(fr));
        }
      }
    } catch (const ComputeError& e) {
      rep.errors.push_back("point " + std::to_string(p) + ": " + e.what());
    }
  }

  // cross-point rows
  auto stat_of = [](const std::vector<double>& v) {
    ConstStat s;
    if (v.empty()) return s;
    s.applicable = true;
    double lo = v[0], hi = v[0], acc = 0;
    for (double x : v) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
      acc += x;
    }
    s.mean = acc / static_cast<double>(v.size());
    s.spread = hi - lo;
    return s;
  };

  rep.mean_curvature = stat_of(hs);
  rep.c1 = stat_of(c1s);
  rep.c2 = stat_of(c2s);
  rep.sum_mu_sq = stat_of(sum_mu_sqs);

  if (!hs.empty()) {
    double denom = std::max(std::fabs(rep.mean_curvature.mean), 1e-8);
    col.add(rep.point_rows, -1, "mean_curvature_spread",
            rep.mean_curvature.spread / denom, exact ? 0.0 : cfg.tol_identity);
    if (traits.h_sign == 0)
      col.add(rep.point_rows, -1, "mean_curvature_zero",
              std::fabs(rep.mean_curvature.mean), exact ? 0.0 : cfg.tol_identity);
    else {
      double signed_h = traits.h_sign * rep.mean_curvature.mean;
      col.add(rep.point_rows, -1,
              traits.h_sign > 0 ? "mean_curvature_positive"
                                : "mean_curvature_negative",
              signed_h, 0.0, true);
    }
  }

  if (!frames.empty()) {
    const std::size_t levels = frames[0].lambdas.size();
    std::vector<double> lmeans, lspreads, mmeans, mspreads;
    for (std::size_t l = 0; l < levels; ++l) {
      std::vector<double> ls, ms;
      for (const auto& f : frames) {
        ls.push_back(f.lambdas[l]);
        ms.push_back(f.mus[l]);
      }
      auto lst = stat_of(ls), mst = stat_of(ms);
      rep.lambda_ladder.push_back(lst);
      rep.mu_ladder.push_back(mst);
      lspreads.push_back(lst.spread);
      mspreads.push_back(mst.spread);
    }
    double worst = 0;
    for (double s : lspreads) worst = std::max(worst, s);
    for (double s : mspreads) worst = std::max(worst, s);
    col.add(rep.point_rows, -1, "frame_ladder_spread", worst, cfg.tol_ladder);
  }

  if (traits.curved_factor && rep.c2.applicable && !hs.empty()) {
    col.add(rep.point_rows, -1, "c2_negative", -rep.c2.mean, 0.0, true);
    const int n = chart.dim;
    const int n1 = static_cast<int>(chart.blocks->first.size());
    const int n2 = static_cast<int>(chart.blocks->second.size());
    constants_check(col, rep.point_rows, rep.mean_curvature.mean, rep.c2.mean,
                    n, n1, n2, rep.sum_mu_sq.mean, rep.sum_mu_sq.applicable,
                    cfg.tol_ladder);
  }
  if (chart.spec.kind == ChartKind::calabi && rep.c1.applicable)
    col.add(rep.point_rows, -1, "c1_flat", std::fabs(rep.c1.mean),
            cfg.tol_identity);
  if (chart.spec.kind == ChartKind::paraboloid && rep.c1.applicable) {
    col.add(rep.point_rows, -1, "c1_flat", std::fabs(rep.c1.mean),
            exact ? 0.0 : cfg.tol_identity);
    if (rep.c2.applicable)
      col.add(rep.point_rows, -1, "c2_flat", std::fabs(rep.c2.mean),
              exact ? 0.0 : cfg.tol_identity);
  }

  rep.checks = col.rows();
  rep.verdict = rep.errors.empty();
  for (const auto& r : rep.checks) rep.verdict = rep.verdict && r.pass;
  return rep;
}

// ---- serialization ----------------------------------------------------------
// Hand-rolled emitters: field order is fixed and floats print with 17
// significant digits, so identical configs produce byte-identical reports.

namespace detail {

inline std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void json_stat(std::string& s, const char* name, const ConstStat& c) {
  s += '"';
  s += name;
  s += "\":";
  if (!c.applicable) {
    s += "null";
    return;
  }
  s += "{\"mean\":" + fmt17(c.mean) + ",\"spread\":" + fmt17(c.spread) + "}";
}

}  // namespace detail

inline std::string report_to_json(const CheckReport& rep) {
  using detail::fmt17;
  std::string s = "{\n";
  s += "\"schema_version\":" + std::to_string(rep.schema_version) + ",\n";
  const auto& spec = rep.config.chart;
  s += "\"chart_spec\":{\"kind\":\"" + std::string(kind_token(spec.kind)) + "\"";
  if (spec.kind == ChartKind::calabi)
    s += ",\"n1\":" + std::to_string(spec.n1) + ",\"n2\":" + std::to_string(spec.n2);
  else
    s += ",\"n\":" + std::to_string(spec.n1);
  s += "},\n";
  s += "\"config\":{\"points\":" + std::to_string(rep.config.points) +
       ",\"seed\":" + std::to_string(rep.config.seed) +
       ",\"jet_order\":" + std::to_string(rep.config.jet_order) +
       ",\"tol_identity\":" + fmt17(rep.config.tol_identity) +
       ",\"tol_solve\":" + fmt17(rep.config.tol_solve) +
       ",\"tol_ladder\":" + fmt17(rep.config.tol_ladder) + ",\"corruption\":\"";
  switch (rep.config.corruption) {
    case Corruption::none: s += "none"; break;
    case Corruption::difference_tensor: s += "difference_tensor"; break;
    case Corruption::nabla_difference_tensor: s += "nabla_difference_tensor"; break;
  }
  s += "\"},\n";
  s += "\"points\":[";
  for (std::size_t p = 0; p < rep.points.size(); ++p) {
    if (p) s += ",";
    s += "[";
    for (std::size_t i = 0; i < rep.points[p].size(); ++i) {
      if (i) s += ",";
      s += fmt17(rep.points[p][i]);
    }
    s += "]";
  }
  s += "],\n";
  s += "\"checks\":[\n";
  for (std::size_t i = 0; i < rep.checks.size(); ++i) {
    const auto& c = rep.checks[i];
    s += "{\"name\":\"" + c.name + "\",\"residual\":" + fmt17(c.residual) +
         ",\"tolerance\":" + fmt17(c.tolerance) +
         ",\"pass\":" + (c.pass ? "true" : "false") + "}";
    if (i + 1 < rep.checks.size()) s += ",";
    s += "\n";
  }
  s += "],\n";
  s += "\"constants\":{";
  detail::json_stat(s, "mean_curvature", rep.mean_curvature);
  s += ",";
  detail::json_stat(s, "c1", rep.c1);
  s += ",";
  detail::json_stat(s, "c2", rep.c2);
  s += ",";
  detail::json_stat(s, "sum_mu_sq", rep.sum_mu_sq);
  s += ",\"lambda_ladder\":[";
  for (std::size_t i = 0; i < rep.lambda_ladder.size(); ++i) {
    if (i) s += ",";
    s += "{\"mean\":" + fmt17(rep.lambda_ladder[i].mean) +
         ",\"spread\":" + fmt17(rep.lambda_ladder[i].spread) + "}";
  }
  s += "],\"mu_ladder\":[";
  for (std::size_t i = 0; i < rep.mu_ladder.size(); ++i) {
    if (i) s += ",";
    s += "{\"mean\":" + fmt17(rep.mu_ladder[i].mean) +
         ",\"spread\":" + fmt17(rep.mu_ladder[i].spread) + "}";
  }
  s += "]},\n";
  s += "\"errors\":[";
  for (std::size_t i = 0; i < rep.errors.size(); ++i) {
    if (i) s += ",";
    std::string esc;
    for (char ch : rep.errors[i]) {
      if (ch == '"' || ch == '\\') esc += '\\';
      esc += ch;
    }
    s += "\"" + esc + "\"";
  }
  s += "],\n";
  s += std::string("\"verdict\":") + (rep.verdict ? "true" : "false") + "\n}\n";
  return s;
}

inline std::string report_to_csv(const CheckReport& rep) {
  std::string s = "point,check,residual,tolerance,pass\n";
  for (const auto& r : rep.point_rows) {
    s += std::to_string(r.point) + "," + r.name + "," +
         detail::fmt17(r.residual) + "," + detail::fmt17(r.tolerance) + "," +
         (r.pass ? "true" : "false") + "\n";
  }
  return s;
}

inline void write_report(const CheckReport& rep) {
  if (rep.config.output.empty()) return;
  std::ofstream out(rep.config.output, std::ios::binary);
  require(out.good(), ErrorKind::bad_argument,
          "cannot open output file: " + rep.config.output);
  out << (rep.config.format == ReportFormat::json ? report_to_json(rep)
                                                  : report_to_csv(rep));
}

}  // namespace blaschke
