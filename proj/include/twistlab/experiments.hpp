#pragma once

// Scenario execution: builds the operators a task needs, runs the solvers,
// and emits deterministic CSV artifacts plus a manifest.  Also the report
// renderer (reads a manifest back, verifies content hashes, prints the
// ledger and the inequality checks with margins) and the OBJ tube export.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "twistlab/curve_geometry.hpp"
#include "twistlab/errors.hpp"
#include "twistlab/experiment_io.hpp"
#include "twistlab/hardy_constants.hpp"
#include "twistlab/scenario.hpp"
#include "twistlab/stability_thresholds.hpp"
#include "twistlab/transverse.hpp"
#include "twistlab/waveguide_operators.hpp"

namespace twistlab {

struct RunOptions {
  std::string out_dir;  // overrides scenario and environment
  int threads = 0;      // 0 = leave the default
  std::optional<std::uint64_t> seed;
};

struct RunOutcome {
  std::filesystem::path dir;
  std::filesystem::path manifest;
  std::vector<std::string> files;
};

namespace detail {

inline std::filesystem::path resolve_out_dir(const Scenario& sc, const RunOptions& opt) {
  if (!opt.out_dir.empty()) return std::filesystem::path(opt.out_dir) / sc.name;
  if (!sc.out_dir.empty()) return std::filesystem::path(sc.out_dir) / sc.name;
  if (const char* env = std::getenv("TWISTLAB_OUT"))
    return std::filesystem::path(env) / sc.name;
  return std::filesystem::path("runs") / sc.name;
}

inline CurvatureProfile scenario_profile(const Scenario& sc) {
  return make_profile(sc.kappa1, sc.kappa2, sc.theta_dot, sc.s_a, sc.s_b,
                      sc.profile_delta_s);
}

// Sup of |f| over the profile grid and midpoints.
inline double profile_sup(const CurvatureProfile& p,
                          const std::function<double(double)>& f) {
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < p.s.size(); ++i) {
    m = std::max(m, std::abs(f(p.s[i])));
    m = std::max(m, std::abs(f(0.5 * (p.s[i] + p.s[i + 1]))));
  }
  if (!p.s.empty()) m = std::max(m, std::abs(f(p.s.back())));
  return m;
}

inline double coupling_sup(const CurvatureProfile& p) {
  return profile_sup(p, [&p](double x) { return p.kappa2_at(x) - p.theta_dot_at(x); });
}

inline double twist_sup(const CurvatureProfile& p) {
  return profile_sup(p, [&p](double x) { return p.theta_dot_at(x); });
}

struct HardyChain {
  LambdaResult lambda;
  SigmaDecomposition decomposition;
  bool machinery = false;  // lambda > 0 and sigma not identically zero
  HardyLedger ledger;      // valid only when machinery
};

// lambda, sigma support decomposition, and (when possible) the certified
// weighted bound; lambda below the asymmetry floor counts as circular.
inline HardyChain hardy_chain(const CrossSectionDomain& dom, const TransverseOperator& top,
                              const GroundPair& ground, const CurvatureProfile& p,
                              double s_lo, double s_hi, double grid_ds, double s0) {
  HardyChain c;
  c.lambda = compute_lambda(dom, top, ground);
  c.decomposition = decompose_sigma(
      [p](double x) { return p.theta_dot_at(x) - p.kappa2_at(x); },
      [p](double x) { return p.theta_ddot_at(x) - p.dkappa2_at(x); }, s_lo, s_hi, grid_ds);
  const double lambda_floor = 1e-3 * ground.E1;
  if (c.lambda.lambda > lambda_floor && !c.decomposition.components.empty()) {
    c.machinery = true;
    c.ledger = global_hardy_bound(c.decomposition, dom.a, c.lambda.lambda, s0);
  }
  return c;
}

inline void add_quantity_table(ArtifactSet& set, const std::string& name,
                               const std::vector<std::pair<std::string, CsvCell>>& rows) {
  CsvTable t({"quantity", "value"});
  for (const auto& [k, v] : rows) t.add_row({k, v});
  set.add(name, t.to_bytes());
}

inline CsvTable components_table(const SigmaDecomposition& d, double a, double lambda) {
  CsvTable t({"component", "A_lo", "A_hi", "sup_sigma", "sup_dsigma", "sigma0",
              "embedding_constant", "local_coefficient"});
  for (std::size_t j = 0; j < d.components.size(); ++j) {
    const SigmaComponent& c = d.components[j];
    const double aj =
        lambda > 0.0 ? local_hardy_coefficient(d, int(j), a, lambda).a_j : 0.0;
    t.add_row({int(j), c.A.lo, c.A.hi, c.sup_sigma, c.sup_dsigma, c.sigma0, c.embedding_c, aj});
  }
  return t;
}

inline CsvTable ledger_table(const ThresholdLedger& led) {
  CsvTable t({"constant", "value", "formula"});
  const bool eff = led.mode == TwistStabilityMode::effective_twist;
  t.add_row({"a", led.a, "sup |t| over the cross-section"});
  t.add_row({"coupling_norm", led.coupling_norm,
             eff ? "sup|kappa2 - theta'|" : "sup|kappa2|"});
  t.add_row({"twist_norm", led.twist_norm, "sup|theta'|"});
  t.add_row({"C1", led.C1,
             eff ? "6a(1 + a sup|kappa2 - theta'|)^2"
                 : "6a(1 + a sup|kappa2| + a sup|theta'|)^2"});
  t.add_row({"C2", led.C2, "1 + a(1 + sup|theta'|)"});
  t.add_row({"C3", led.C3,
             eff ? "1 + a sup|kappa2 - theta'| + a^2 sup|kappa2 - theta'|^2"
                 : "max{2; 1 + 2a^2 sup|theta'|^2}"});
  t.add_row({"C4", led.C4, "3 C1 C3"});
  t.add_row({"C5", led.C5, "C2 sqrt(3 C3 (1 + C4))"});
  t.add_row({"C6", led.C6, "1 + C4"});
  t.add_row({"C7", led.C7, "2 C5^2"});
  if (!led.constraints.empty()) {
    t.add_row({"epsilon", led.epsilon, "min of the constraints below; " + led.k_definition});
    for (std::size_t i = 0; i < led.constraints.size(); ++i) {
      std::string c = led.constraints[i];
      for (char& ch : c)
        if (ch == ',') ch = ';';
      double bound = led.epsilon;
      if (const auto pos = c.rfind("k <= "); pos != std::string::npos)
        bound = std::strtod(c.c_str() + pos + 5, nullptr);
      t.add_row({"constraint_" + std::to_string(i), bound, c});
    }
  }
  return t;
}

}  // namespace detail

// Executes the scenario's task and writes its artifacts plus manifest.json.
inline RunOutcome run_scenario(const Scenario& sc, const RunOptions& opt = {}) {
  Scenario s = sc;
  if (opt.seed) s.seed = *opt.seed;
  validate(s);
  const std::filesystem::path dir = detail::resolve_out_dir(s, opt);

  EigOptions eig;
  eig.seed = s.seed;
  ArtifactSet set;

  switch (s.task) {
    case TaskKind::ground_pair: {
      const CrossSectionDomain dom = build_domain(s.shape, s.delta);
      const TransverseOperator top = build_transverse_operator(dom);
      const GroundPair ground = dirichlet_ground_pair(dom, top, eig);
      detail::add_quantity_table(set, "ground_pair.csv",
                                 {{"E1", ground.E1},
                                  {"rayleigh_check", ground.rayleigh_check},
                                  {"nodes", dom.size()},
                                  {"delta", dom.delta},
                                  {"rasterized_area", dom.rasterized_area()},
                                  {"a", dom.a}});
      break;
    }
    case TaskKind::lambda: {
      const CrossSectionDomain dom = build_domain(s.shape, s.delta);
      const TransverseOperator top = build_transverse_operator(dom);
      const GroundPair ground = dirichlet_ground_pair(dom, top, eig);
      const LambdaResult lam = compute_lambda(dom, top, ground, eig);
      detail::add_quantity_table(set, "lambda.csv",
                                 {{"lambda", lam.lambda},
                                  {"E1", lam.E1},
                                  {"lambda_over_E1", lam.lambda / lam.E1},
                                  {"asymmetry_norm", lam.asymmetry_norm},
                                  {"nodes", dom.size()},
                                  {"delta", dom.delta}});
      break;
    }
    case TaskKind::spectrum: {
      const TubeGrid g = make_tube_grid(s.shape, s.delta, s.L, s.tube_delta_s, s.margin);
      const CurvatureProfile p = detail::scenario_profile(s);
      const SymmetricForm form = assemble_q(g, p);
      const SpectralResult res =
          eigenvalues_below_threshold(form, form.E1, s.n_eigs, eig);
      CsvTable t({"index", "value", "below_threshold", "residual"});
      for (std::size_t i = 0; i < res.below.size(); ++i)
        t.add_row({int(i), res.below[i], true, res.residuals(long(i))});
      if (res.below.empty()) t.add_row({0, res.smallest, false, res.residuals(0)});
      set.add("spectrum.csv", t.to_bytes());
      detail::add_quantity_table(set, "summary.csv",
                                 {{"E1", form.E1},
                                  {"smallest", res.smallest},
                                  {"count_below", res.below.size()},
                                  {"L", g.L},
                                  {"delta", g.dom.delta},
                                  {"delta_s", g.delta_s},
                                  {"dof", g.dof()},
                                  {"iterations", res.iterations},
                                  {"embedding_inconclusive", !form.warning.empty()}});
      break;
    }
    case TaskKind::hardy: {
      const TubeGrid g = make_tube_grid(s.shape, s.delta, s.L, s.tube_delta_s, s.margin);
      const CurvatureProfile p = detail::scenario_profile(s);
      const SymmetricForm form = assemble_q(g, p);
      const detail::HardyChain chain = detail::hardy_chain(
          g.dom, g.top, g.ground, p, -g.L, g.L, g.delta_s, s.hardy_s0);
      double s0 = s.hardy_s0;
      if (std::isnan(s0))
        s0 = chain.machinery ? chain.ledger.s0
                             : (chain.decomposition.components.empty()
                                    ? 0.0
                                    : chain.decomposition.window.s0);
      const double bound = chain.machinery ? chain.ledger.c_h : -1.0;
      const HardyVerification v = verify_hardy(form, form.E1, s0, bound, eig);
      detail::add_quantity_table(
          set, "hardy.csv",
          {{"lambda", chain.lambda.lambda},
           {"machinery_available", chain.machinery},
           {"c_h", chain.machinery ? chain.ledger.c_h : 0.0},
           {"c_h_prose", chain.machinery ? chain.ledger.c_h_prose : 0.0},
           {"c0", chain.machinery ? chain.ledger.c0 : 0.0},
           {"alpha", chain.machinery ? chain.ledger.alpha : 0.0},
           {"window_b", chain.machinery ? chain.ledger.b : 0.0},
           {"min_window_sigma", chain.machinery ? chain.ledger.min_J_sigma : 0.0},
           {"s0", s0},
           {"mu_star", v.mu_star},
           {"mu_star_over_E1", v.mu_star / form.E1},
           {"residual", v.residual},
           {"meets_bound", v.meets_bound},
           {"sharpness", v.sharpness},
           {"E1", form.E1},
           {"L", g.L},
           {"dof", g.dof()}});
      set.add("components.csv",
              detail::components_table(chain.decomposition, g.dom.a, chain.lambda.lambda)
                  .to_bytes());
      break;
    }
    case TaskKind::sweep: {
      const TubeGrid g = make_tube_grid(s.shape, s.delta, s.L, s.tube_delta_s, s.margin);
      const CurvatureProfile base = detail::scenario_profile(s);
      const ShapeNorms norms = shape_norms(base);

      // profile at k = 0: the unbent (and in pure mode untwisted-kappa2)
      // reference whose sigma feeds the certified threshold
      const bool pure = s.mode == TwistStabilityMode::pure_twist;
      const CurvatureProfile straight =
          make_profile({}, pure ? std::vector<Bump>{} : base.kappa2, base.theta_dot,
                       base.s_a, base.s_b, base.delta_s);
      const detail::HardyChain chain =
          detail::hardy_chain(g.dom, g.top, g.ground, straight, -g.L, g.L, g.delta_s,
                              std::numeric_limits<double>::quiet_NaN());

      ThresholdLedger led = constants_ledger(
          s.mode, g.dom.a, pure ? norms.kappa2 : detail::coupling_sup(straight),
          detail::twist_sup(straight));
      double eps = -1.0;
      if (chain.machinery) {
        auto [lo, hi] = support_hull(base.kappa1);
        const double unit = pure ? norms.sum_pure() : norms.sum_effective();
        const EpsilonThreshold et =
            epsilon_threshold(led, chain.ledger.c_h, g.ground.E1, {lo, hi},
                              chain.ledger.s0, norms.kappa1 / unit);
        attach_epsilon(led, et);
        eps = et.epsilon;
      }

      BendSweepConfig cfg;
      cfg.k_values = s.k_values;
      cfg.n_eigs = s.n_eigs;
      cfg.epsilon = eps;
      cfg.mode = s.mode;
      cfg.eig = eig;
      const SweepResult sweep = bend_sweep(g, base, cfg);

      CsvTable t({"k", "kappa1_sup", "dkappa1_sup", "solved", "lowest", "gap", "below",
                  "k_le_epsilon", "embedding_inconclusive"});
      for (const SweepRow& row : sweep.rows)
        t.add_row({row.k, row.kappa1_sup, row.dkappa1_sup, row.solved, row.lowest,
                   row.gap, row.below, eps >= 0.0 && row.k <= eps,
                   row.injectivity_flag});
      set.add("sweep.csv", t.to_bytes());
      set.add("ledger.csv", detail::ledger_table(led).to_bytes());
      detail::add_quantity_table(set, "sweep_summary.csv",
                                 {{"epsilon", eps},
                                  {"k_c", sweep.k_c},
                                  {"onset_monotone", sweep.onset_monotone},
                                  {"conservative", sweep.conservative},
                                  {"shape_unit_sup", sweep.shape_unit_sup},
                                  {"shape_ratio", sweep.shape_ratio},
                                  {"c_h", chain.machinery ? chain.ledger.c_h : 0.0},
                                  {"lambda", chain.lambda.lambda},
                                  {"E1", g.ground.E1}});
      break;
    }
    case TaskKind::injectivity: {
      const CrossSectionDomain dom = build_domain(s.shape, s.delta);
      const CurvatureProfile p = detail::scenario_profile(s);
      const InjectivityReport rep = check_injectivity(p, dom.a);
      detail::add_quantity_table(set, "injectivity.csv",
                                 {{"a", rep.a},
                                  {"k1", rep.k1},
                                  {"k2", rep.k2},
                                  {"k3", rep.k3},
                                  {"injectivity_bound", rep.injectivity_bound},
                                  {"immersion_ok", rep.immersion_ok},
                                  {"certified", rep.certified}});
      break;
    }
    case TaskKind::constants: {
      const CrossSectionDomain dom = build_domain(s.shape, s.delta);
      const TransverseOperator top = build_transverse_operator(dom);
      const GroundPair ground = dirichlet_ground_pair(dom, top, eig);
      const CurvatureProfile p = detail::scenario_profile(s);
      const ShapeNorms norms = shape_norms(p);
      const bool pure = s.mode == TwistStabilityMode::pure_twist;
      ThresholdLedger led = constants_ledger(
          s.mode, dom.a, pure ? norms.kappa2 : detail::coupling_sup(p),
          detail::twist_sup(p));

      const detail::HardyChain chain = detail::hardy_chain(
          dom, top, ground, p, p.s_a, p.s_b, p.delta_s,
          std::numeric_limits<double>::quiet_NaN());
      if (chain.machinery) {
        Interval I{p.s_a, p.s_b};
        if (!p.kappa1.empty()) {
          auto [lo, hi] = support_hull(p.kappa1);
          I = {lo, hi};
        }
        double unit_sup = 1.0;
        if (norms.kappa1 > 0.0)
          unit_sup = norms.kappa1 / (pure ? norms.sum_pure() : norms.sum_effective());
        const EpsilonThreshold et = epsilon_threshold(led, chain.ledger.c_h, ground.E1,
                                                      I, chain.ledger.s0, unit_sup);
        attach_epsilon(led, et);
      }
      set.add("ledger.csv", detail::ledger_table(led).to_bytes());
      detail::add_quantity_table(
          set, "threshold.csv",
          {{"epsilon", chain.machinery ? led.epsilon : 0.0},
           {"machinery_available", chain.machinery},
           {"c_h", chain.machinery ? chain.ledger.c_h : 0.0},
           {"lambda", chain.lambda.lambda},
           {"E1", ground.E1},
           {"k_definition", led.k_definition}});
      set.add("components.csv",
              detail::components_table(chain.decomposition, dom.a, chain.lambda.lambda)
                  .to_bytes());
      break;
    }
  }

  RunOutcome out;
  out.dir = dir;
  out.manifest = set.write_all(dir, s.name, scenario_hash(s), scenario_to_json(s));
  for (const Artifact& a : set.items) out.files.push_back(a.name);
  out.files.push_back("manifest.json");
  return out;
}

// Boundary polyline of the cross-section, counterclockwise-ish, used as the
// swept ring of the tube surface.
inline std::vector<Eigen::Vector2d> boundary_polyline(const ShapeSpec& s, int segments) {
  validate(s);
  if (segments < 3) throw ConfigError("mesh.segments: must be at least 3");
  std::vector<Eigen::Vector2d> pts;
  switch (s.kind) {
    case ShapeSpec::Kind::rectangle: {
      const int per_edge = std::max(1, segments / 4);
      const double hw = 0.5 * s.width, hh = 0.5 * s.height;
      const Eigen::Vector2d c = s.center;
      const Eigen::Vector2d corners[4] = {{c.x() - hw, c.y() - hh},
                                          {c.x() + hw, c.y() - hh},
                                          {c.x() + hw, c.y() + hh},
                                          {c.x() - hw, c.y() + hh}};
      for (int e = 0; e < 4; ++e)
        for (int i = 0; i < per_edge; ++i) {
          const double u = double(i) / per_edge;
          pts.push_back(corners[e] + u * (corners[(e + 1) % 4] - corners[e]));
        }
      break;
    }
    case ShapeSpec::Kind::disk:
    case ShapeSpec::Kind::ellipse: {
      const double rx = s.kind == ShapeSpec::Kind::disk ? s.radius : s.rx;
      const double ry = s.kind == ShapeSpec::Kind::disk ? s.radius : s.ry;
      for (int i = 0; i < segments; ++i) {
        const double ang = 2.0 * std::numbers::pi * i / segments;
        pts.push_back({s.center.x() + rx * std::cos(ang),
                       s.center.y() + ry * std::sin(ang)});
      }
      break;
    }
    case ShapeSpec::Kind::polygon:
      pts = s.vertices;
      break;
  }
  return pts;
}

// Sweeps the cross-section boundary along the twist-rotated frame and writes
// tube.obj (v/f records) plus a manifest.
inline RunOutcome export_mesh(const Scenario& sc, const RunOptions& opt = {}) {
  if (!sc.has_tube) throw ConfigError("tube: required for export-mesh");
  const std::filesystem::path dir = detail::resolve_out_dir(sc, opt);

  // profile over the full truncated span; the margin rule keeps bump support
  // away from the ends, which make_profile re-checks
  const CurvatureProfile p = make_profile(sc.kappa1, sc.kappa2, sc.theta_dot, -sc.L,
                                          sc.L, sc.profile_delta_s);
  const FrameField frame = integrate_frame(p);
  const std::vector<Eigen::Vector2d> ring = boundary_polyline(sc.shape, sc.mesh_segments);

  const int n_edges = std::max(2, int(std::lround(2.0 * sc.L / sc.tube_delta_s)));
  const double ds = 2.0 * sc.L / n_edges;
  const int m = int(ring.size());

  ObjMesh mesh;
  for (int i = 0; i <= n_edges; ++i) {
    const FramePoint fp = frame_at(frame, -sc.L + i * ds);
    for (const Eigen::Vector2d& t : ring)
      mesh.vertices.push_back(fp.gamma + t.x() * fp.re2 + t.y() * fp.re3);
  }
  for (int i = 0; i < n_edges; ++i)
    for (int j = 0; j < m; ++j) {
      const int a = i * m + j;
      const int b = i * m + (j + 1) % m;
      mesh.quads.push_back({a, b, b + m, a + m});
    }

  ArtifactSet set;
  set.add("tube.obj", mesh.to_bytes());
  CsvTable meta({"quantity", "value"});
  meta.add_row({"rings", n_edges + 1});
  meta.add_row({"ring_points", m});
  meta.add_row({"vertices", mesh.vertices.size()});
  meta.add_row({"faces", mesh.quads.size()});
  meta.add_row({"gram_defect", frame.max_gram_defect});
  set.add("mesh_summary.csv", meta.to_bytes());

  RunOutcome out;
  out.dir = dir;
  out.manifest = set.write_all(dir, sc.name, scenario_hash(sc), scenario_to_json(sc));
  for (const Artifact& a : set.items) out.files.push_back(a.name);
  out.files.push_back("manifest.json");
  return out;
}

// Reads a manifest, re-hashes every listed artifact, and renders the run as
// text: constants with their formulas, inequality checks with margins.
inline std::string render_report(const std::filesystem::path& manifest_path) {
  std::ifstream f(manifest_path, std::ios::binary);
  if (!f) throw ConfigError("cannot open manifest " + manifest_path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("manifest parse error: ") + e.what());
  }
  const std::filesystem::path dir = manifest_path.parent_path();

  std::ostringstream out;
  out << "scenario " << m.value("scenario", std::string("?")) << "  hash "
      << m.value("scenario_hash", std::string("?")) << "\n";

  // integrity pass over every listed artifact
  std::vector<std::pair<std::string, std::string>> tables;
  for (const auto& a : m.value("artifacts", nlohmann::json::array())) {
    const std::string name = a.value("file", std::string());
    std::ifstream af(dir / name, std::ios::binary);
    if (!af) {
      out << "MISSING " << name << "\n";
      continue;
    }
    std::ostringstream bytes;
    bytes << af.rdbuf();
    const std::string hash = fnv1a64_hex(bytes.str());
    const bool ok = hash == a.value("fnv1a64", std::string());
    out << (ok ? "ok      " : "CORRUPT ") << name << "  " << hash << "\n";
    if (ok && name.size() > 4 && name.substr(name.size() - 4) == ".csv")
      tables.emplace_back(name, bytes.str());
  }

  auto lookup = [&tables](const std::string& file,
                          const std::string& key) -> std::optional<double> {
    for (const auto& [name, bytes] : tables) {
      if (name != file) continue;
      std::istringstream lines(bytes);
      std::string line;
      std::getline(lines, line);  // header
      while (std::getline(lines, line)) {
        const auto comma = line.find(',');
        if (comma == std::string::npos) continue;
        if (line.substr(0, comma) == key)
          return std::strtod(line.c_str() + comma + 1, nullptr);
      }
    }
    return std::nullopt;
  };

  out << "\n";
  for (const auto& [name, bytes] : tables) {
    out << "== " << name << " ==\n";
    std::istringstream lines(bytes);
    std::string line;
    while (std::getline(lines, line)) {
      for (char& c : line)
        if (c == ',') c = '\t';
      out << "  " << line << "\n";
    }
  }

  // inequality verdicts with margins
  if (const auto mu = lookup("hardy.csv", "mu_star")) {
    const auto ch = lookup("hardy.csv", "c_h");
    const auto avail = lookup("hardy.csv", "machinery_available");
    out << "\nmu_star = " << format_double(*mu) << "\n";
    if (avail && *avail != 0.0 && ch) {
      out << "c_h bound = " << format_double(*ch) << "\n";
      const double margin = *mu - *ch;
      out << (margin >= -1e-8 ? "PASS" : "FAIL") << " mu_star >= c_h bound (margin "
          << format_double(margin) << ")\n";
    } else {
      out << "lambda ~ 0: rotationally invariant cross-section, no weighted "
             "lower bound available\n";
    }
  }
  if (const auto lam = lookup("lambda.csv", "lambda")) {
    const auto ratio = lookup("lambda.csv", "lambda_over_E1");
    if (ratio && *ratio < 1e-2)
      out << "\nlambda = " << format_double(*lam)
          << " ~ 0: rotationally invariant cross-section, twisting cannot "
             "stabilize\n";
    else
      out << "\nlambda = " << format_double(*lam) << " > 0: twisting stabilizes\n";
  }
  if (const auto cert = lookup("injectivity.csv", "certified")) {
    const auto val = lookup("injectivity.csv", "injectivity_bound");
    out << "\nembedding certificate: " << (*cert != 0.0 ? "CERTIFIED" : "INCONCLUSIVE")
        << " (max expression = " << format_double(val ? *val : 0.0) << ", needs < 1)\n";
  }
  if (const auto eps = lookup("sweep_summary.csv", "epsilon")) {
    const auto kc = lookup("sweep_summary.csv", "k_c");
    const auto cons = lookup("sweep_summary.csv", "conservative");
    out << "\nepsilon = " << format_double(*eps) << "\n";
    if (kc && *kc >= 0.0) out << "measured onset k_c = " << format_double(*kc) << "\n";
    if (cons)
      out << (*cons != 0.0 ? "PASS" : "FAIL")
          << " no spectrum below threshold for k <= epsilon\n";
  }
  return out.str();
}

}  // namespace twistlab
