// Batch front door: enumerate the chart catalog, print invariants at a
// point, run verification suites and emit reports.
//
// Exit codes: 0 success (and suite verdict pass), 1 a suite check failed,
// 2 usage/config/domain errors.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <blaschke/verify.hpp>

namespace {

using namespace blaschke;

std::string fmt_shortest(double v) {
  char buf[40];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ChartSpec parse_spec(const std::string& kind, std::optional<int> n,
                     std::optional<int> n1, std::optional<int> n2) {
  auto k = kind_from_token(kind);
  if (!k) fail(ErrorKind::bad_argument, "unknown chart kind: " + kind);
  if (*k == ChartKind::calabi) {
    if (!n1 || !n2)
      fail(ErrorKind::bad_argument, "calabi requires --n1 and --n2");
    return ChartSpec::calabi(*n1, *n2);
  }
  if (!n) fail(ErrorKind::bad_argument, kind + " requires --n");
  return ChartSpec{*k, *n, 0};
}

std::vector<double> parse_point(const std::string& text, int expected) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stod(tok));
    } catch (...) {
      fail(ErrorKind::bad_argument, "malformed point component: " + tok);
    }
  }
  if (static_cast<int>(out.size()) != expected)
    fail(ErrorKind::bad_argument,
         "point arity " + std::to_string(out.size()) + " does not match chart dimension " +
             std::to_string(expected));
  return out;
}

int cmd_list(bool as_json) {
  auto families = std::vector<ChartKind>{
      ChartKind::paraboloid, ChartKind::ellipsoid, ChartKind::hyperboloid,
      ChartKind::q1n,        ChartKind::calabi,    ChartKind::thm12};
  if (as_json) {
    std::string s = "[\n";
    for (std::size_t i = 0; i < families.size(); ++i) {
      ChartKind k = families[i];
      s += std::string("{\"kind\":\"") + kind_token(k) + "\",\"parameters\":\"" +
           (k == ChartKind::calabi ? "n1,n2" : "n") + "\",\"implicit\":\"" +
           implicit_equation_text(k) + "\",\"description\":\"" +
           chart_description(k) + "\"}";
      if (i + 1 < families.size()) s += ",";
      s += "\n";
    }
    s += "]\n";
    std::fputs(s.c_str(), stdout);
    return 0;
  }
  for (ChartKind k : families) {
    std::printf("%-12s %-14s %s\n", kind_token(k),
                k == ChartKind::calabi ? "(n1>=1, n2>=2)" : "(n)",
                implicit_equation_text(k).c_str());
    std::printf("             %s\n", chart_description(k).c_str());
  }
  return 0;
}

int cmd_invariants(const ChartSpec& spec, const std::string& point_text,
                   int jet_order, bool as_json) {
  Chart chart = make_chart(spec);
  auto u = parse_point(point_text, chart.dim);
  PipelineOptions opts;
  opts.jet_order = jet_order;

  BlaschkeData<double> b;
  if (chart.mode == ScalarMode::rational) {
    std::vector<Rational> ur(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) ur[i] = Rational(u[i]);
    b = to_double_data(full_invariants<Rational>(chart, ur, opts));
  } else {
    b = full_invariants<double>(chart, std::span<const double>(u), opts);
  }

  DMat<double> hv = b.shape;
  auto eig = symmetric_eigenvalues(hv);  // S is symmetric for affine spheres
  double knorm = 0, nknorm = 0;
  for (double x : b.difference.v) knorm = std::max(knorm, std::fabs(x));
  for (double x : b.nabla_k.v) nknorm = std::max(nknorm, std::fabs(x));

  std::optional<ProductFit> fit;
  if (chart.blocks) fit = product_structure(b, *chart.blocks, 12345);

  if (as_json) {
    std::string s = "{\"chart\":\"" + spec.name() + "\",\"point\":[";
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (i) s += ",";
      s += fmt17(u[i]);
    }
    s += "],\"mean_curvature\":" + fmt17(b.mean_curvature) +
         ",\"shape_eigenvalues\":[";
    for (std::size_t i = 0; i < eig.size(); ++i) {
      if (i) s += ",";
      s += fmt17(eig[i]);
    }
    s += "],\"cubic_norm\":" + fmt17(knorm) +
         ",\"nabla_cubic_norm\":" + fmt17(nknorm);
    s += ",\"c1\":" + (fit && fit->c1 ? fmt17(*fit->c1) : "null");
    s += ",\"c2\":" + (fit && fit->c2 ? fmt17(*fit->c2) : "null");
    s += ",\"residuals\":{\"weingarten\":" + fmt17(b.weingarten_residual) +
         ",\"equiaffine\":" + fmt17(b.equiaffine_residual) +
         ",\"volume\":" + fmt17(b.volume_residual) +
         ",\"apolarity\":" + fmt17(b.apolarity_residual) + "}}\n";
    std::fputs(s.c_str(), stdout);
    return 0;
  }

  std::printf("chart: %s\n", spec.name().c_str());
  std::string pt;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (i) pt += ", ";
    pt += fmt_shortest(u[i]);
  }
  std::printf("point: [%s]\n", pt.c_str());
  std::printf("mean_curvature: %s\n", fmt_shortest(b.mean_curvature).c_str());
  std::string es;
  for (std::size_t i = 0; i < eig.size(); ++i) {
    if (i) es += ", ";
    es += fmt_shortest(eig[i]);
  }
  std::printf("shape_eigenvalues: [%s]\n", es.c_str());
  std::printf("cubic_norm: %s\n", fmt_shortest(knorm).c_str());
  std::printf("nabla_cubic_norm: %s\n", fmt_shortest(nknorm).c_str());
  if (fit) {
    std::printf("c1: %s\n", fit->c1 ? fmt_shortest(*fit->c1).c_str() : "n/a");
    std::printf("c2: %s\n", fit->c2 ? fmt_shortest(*fit->c2).c_str() : "n/a");
  } else {
    std::printf("c1: n/a\nc2: n/a\n");
  }
  std::printf("residuals: weingarten=%s equiaffine=%s volume=%s apolarity=%s\n",
              fmt_shortest(b.weingarten_residual).c_str(),
              fmt_shortest(b.equiaffine_residual).c_str(),
              fmt_shortest(b.volume_residual).c_str(),
              fmt_shortest(b.apolarity_residual).c_str());
  return 0;
}

void load_config_file(const std::string& path, SuiteConfig& cfg,
                      std::optional<int>& n, std::optional<int>& n1,
                      std::optional<int>& n2, std::optional<std::string>& kind) {
  std::ifstream in(path);
  if (!in.good()) fail(ErrorKind::bad_argument, "cannot read config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    if (eq == std::string::npos)
      fail(ErrorKind::bad_argument,
           "config line " + std::to_string(lineno) + ": expected key=value");
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r\n");
      auto e = s.find_last_not_of(" \t\r\n");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
    try {
      if (key == "chart") kind = val;
      else if (key == "n") n = std::stoi(val);
      else if (key == "n1") n1 = std::stoi(val);
      else if (key == "n2") n2 = std::stoi(val);
      else if (key == "points") cfg.points = std::stoi(val);
      else if (key == "seed") cfg.seed = std::stoull(val);
      else if (key == "jet_order") cfg.jet_order = std::stoi(val);
      else if (key == "tol_identity") cfg.tol_identity = std::stod(val);
      else if (key == "tol_solve") cfg.tol_solve = std::stod(val);
      else if (key == "tol_ladder") cfg.tol_ladder = std::stod(val);
      else if (key == "out") cfg.output = val;
      else if (key == "format") {
        if (val == "json") cfg.format = ReportFormat::json;
        else if (val == "csv") cfg.format = ReportFormat::csv;
        else fail(ErrorKind::bad_argument, "format must be json or csv");
      } else {
        fail(ErrorKind::bad_argument, "unknown config key: " + key);
      }
    } catch (const ComputeError&) {
      throw;
    } catch (...) {
      fail(ErrorKind::bad_argument,
           "config line " + std::to_string(lineno) + ": bad value for " + key);
    }
  }
}

int cmd_verify(const SuiteConfig& cfg) {
  CheckReport rep = run_suite(cfg);
  write_report(rep);

  std::printf("suite: %s  points=%d seed=%llu jet_order=%d\n",
              cfg.chart.name().c_str(), cfg.points,
              static_cast<unsigned long long>(cfg.seed), cfg.jet_order);
  for (const auto& c : rep.checks)
    std::printf("  [%s] %-34s residual=%-12s tol=%s\n", c.pass ? "pass" : "FAIL",
                c.name.c_str(), fmt_shortest(c.residual).c_str(),
                fmt_shortest(c.tolerance).c_str());
  for (const auto& e : rep.errors) std::printf("  [error] %s\n", e.c_str());
  std::printf("constants: mean_curvature=%s",
              rep.mean_curvature.applicable
                  ? fmt_shortest(rep.mean_curvature.mean).c_str()
                  : "n/a");
  if (rep.c1.applicable) std::printf(" c1=%s", fmt_shortest(rep.c1.mean).c_str());
  else std::printf(" c1=n/a");
  if (rep.c2.applicable) std::printf(" c2=%s", fmt_shortest(rep.c2.mean).c_str());
  else std::printf(" c2=n/a");
  if (!rep.lambda_ladder.empty()) {
    std::printf(" lambda=[");
    for (std::size_t i = 0; i < rep.lambda_ladder.size(); ++i)
      std::printf("%s%s", i ? ", " : "", fmt_shortest(rep.lambda_ladder[i].mean).c_str());
    std::printf("] mu=[");
    for (std::size_t i = 0; i < rep.mu_ladder.size(); ++i)
      std::printf("%s%s", i ? ", " : "", fmt_shortest(rep.mu_ladder[i].mean).c_str());
    std::printf("]");
  }
  std::printf("\nverdict: %s\n", rep.verdict ? "PASS" : "FAIL");
  return rep.verdict ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical verification of equiaffine hypersurface geometry"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "list the chart catalog");
  bool list_json = false;
  list->add_flag("--json", list_json, "machine-readable catalog");

  auto* inv = app.add_subcommand("invariants", "print invariants at one point");
  std::string inv_kind, inv_point;
  int inv_n = 0, inv_n1 = 0, inv_n2 = 0, inv_order = 5;
  bool inv_json = false;
  inv->add_option("--chart", inv_kind, "chart kind")->required();
  auto* inv_n_opt = inv->add_option("--n", inv_n, "dimension");
  auto* inv_n1_opt = inv->add_option("--n1", inv_n1, "first factor dimension");
  auto* inv_n2_opt = inv->add_option("--n2", inv_n2, "second factor dimension");
  inv->add_option("--point", inv_point, "comma-separated coordinates")->required();
  inv->add_option("--jet-order", inv_order, "jet truncation order (4-6)");
  inv->add_flag("--json", inv_json, "JSON output");

  auto* ver = app.add_subcommand("verify", "run a verification suite");
  std::string ver_kind, ver_config, ver_out, ver_format;
  int ver_n = 0, ver_n1 = 0, ver_n2 = 0, ver_points = 0, ver_order = 0;
  unsigned long long ver_seed = 0;
  double ver_ti = 0, ver_ts = 0, ver_tl = 0;
  ver->add_option("--config", ver_config, "flat key=value config file");
  auto* vk = ver->add_option("--chart", ver_kind, "chart kind");
  auto* vn = ver->add_option("--n", ver_n, "dimension");
  auto* vn1 = ver->add_option("--n1", ver_n1, "first factor dimension");
  auto* vn2 = ver->add_option("--n2", ver_n2, "second factor dimension");
  auto* vp = ver->add_option("--points", ver_points, "sample point count");
  auto* vs = ver->add_option("--seed", ver_seed, "sampling seed");
  auto* vo = ver->add_option("--jet-order", ver_order, "jet truncation order");
  auto* vti = ver->add_option("--tol-identity", ver_ti, "identity residual tolerance");
  auto* vts = ver->add_option("--tol-solve", ver_ts, "linear solve residual tolerance");
  auto* vtl = ver->add_option("--tol-ladder", ver_tl, "ladder relation tolerance");
  auto* vout = ver->add_option("--out", ver_out, "report output path");
  auto* vfmt = ver->add_option("--format", ver_format, "json or csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (list->parsed()) return cmd_list(list_json);

    if (inv->parsed()) {
      auto spec = parse_spec(
          inv_kind, inv_n_opt->count() ? std::optional<int>(inv_n) : std::nullopt,
          inv_n1_opt->count() ? std::optional<int>(inv_n1) : std::nullopt,
          inv_n2_opt->count() ? std::optional<int>(inv_n2) : std::nullopt);
      return cmd_invariants(spec, inv_point, inv_order, inv_json);
    }

    if (ver->parsed()) {
      SuiteConfig cfg;
      std::optional<int> n, n1, n2;
      std::optional<std::string> kind;
      if (!ver_config.empty()) load_config_file(ver_config, cfg, n, n1, n2, kind);
      if (vk->count()) kind = ver_kind;
      if (vn->count()) n = ver_n;
      if (vn1->count()) n1 = ver_n1;
      if (vn2->count()) n2 = ver_n2;
      if (vp->count()) cfg.points = ver_points;
      if (vs->count()) cfg.seed = ver_seed;
      if (vo->count()) cfg.jet_order = ver_order;
      if (vti->count()) cfg.tol_identity = ver_ti;
      if (vts->count()) cfg.tol_solve = ver_ts;
      if (vtl->count()) cfg.tol_ladder = ver_tl;
      if (vout->count()) cfg.output = ver_out;
      if (vfmt->count()) {
        if (ver_format == "json") cfg.format = ReportFormat::json;
        else if (ver_format == "csv") cfg.format = ReportFormat::csv;
        else fail(ErrorKind::bad_argument, "format must be json or csv");
      }
      if (!kind) fail(ErrorKind::bad_argument, "no chart given (flag or config)");
      cfg.chart = parse_spec(*kind, n, n1, n2);
      return cmd_verify(cfg);
    }
  } catch (const ComputeError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
