// Command dispatch for the qshare tool. `run_cli` is callable in-process so the
// test suites exercise exactly what the binary does.

#pragma once

#include "state_file.hpp"

#include "qshare/monogamy.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iostream>

namespace qshare::cli {

using io::json;

enum ExitCode { kOk = 0, kInput = 2, kInvariant = 3, kCheck = 4 };

struct Globals {
  std::uint64_t seed = 0;
  OptBudget budget;
  std::string format = "text";
  bool timing = false;
};

/// Shortest round-trip decimal form, shared by reports and tables.
inline std::string num(double x) { return json(x).dump(); }

struct Report {
  std::string command;
  json inputs = json::object();
  json results = json::object();
  json directions = json::object();
  int exit_code = kOk;

  json to_json(const Globals& g, std::optional<double> wall_ms) const {
    json in = inputs;
    in["seed"] = g.seed;
    in["restarts"] = g.budget.restarts;
    in["iters"] = g.budget.iterations;
    in["tol"] = g.budget.tol;
    json doc{{"command", command}, {"inputs", in}, {"results", results}, {"estimates_direction", directions}};
    if (wall_ms) doc["wall_time_ms"] = *wall_ms;
    return doc;
  }
};

inline void render_text(const json& doc, std::ostream& out) {
  out << "command: " << doc["command"].get<std::string>() << '\n';
  for (const auto& [key, value] : doc["results"].items()) {
    if (key == "rows") continue;
    out << "  " << key << ": " << (value.is_string() ? value.get<std::string>() : value.dump());
    if (doc["estimates_direction"].contains(key))
      out << " (" << doc["estimates_direction"][key].get<std::string>() << ")";
    out << '\n';
  }
  if (doc.contains("wall_time_ms")) out << "  wall_time_ms: " << doc["wall_time_ms"].dump() << '\n';
}

namespace detail {

inline const DensityMatrix& bipartite(const io::StateFile& f) {
  if (f.dims.size() != 2) throw io::ParseError("dims: a bipartite state is required, got " +
                                               std::to_string(f.dims.size()) + " subsystems");
  return f.state();
}

inline json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json n_max_json(const std::optional<int>& n) { return n ? json(*n) : json("UNBOUNDED"); }

inline void fill_bound(Report& r, const BoundReport& b) {
  r.results["s_a"] = b.s_a;
  r.results["g_arrow"] = b.g_arrow_ab;
  r.results["n_max"] = n_max_json(b.n_max);
  r.results["separability"] = std::string(to_string(b.verdict));
  r.results["status"] = std::string(to_string(b.status));
  r.results["margin"] = optional_number(b.margin);
  r.results["tie"] = b.tie;
  r.directions["s_a"] = "exact";
  r.directions["g_arrow"] = "upper";
}

/// "0.4:1.0:0.1" (inclusive) or "0.4,0.6,0.9".
inline std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> out;
  auto to_double = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw io::ParseError("--grid: cannot parse \"" + s + "\"");
    }
  };
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw io::ParseError("--grid: expected start:stop:step");
    const double start = to_double(parts[0]), stop = to_double(parts[1]), step = to_double(parts[2]);
    if (!(step > 0.0) || stop < start) throw io::ParseError("--grid: empty or invalid range");
    for (int i = 0;; ++i) {
      const double v = std::round((start + i * step) * 1e9) / 1e9;
      if (v > stop + 1e-12) break;
      out.push_back(v);
    }
  } else {
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ',');) out.push_back(to_double(p));
  }
  if (out.empty()) throw io::ParseError("--grid: no points");
  return out;
}

}  // namespace detail

inline Report cmd_analyze(const std::string& path, const Globals& g) {
  const io::StateFile f = io::load_state(path);
  const DensityMatrix& rho = detail::bipartite(f);
  Report r{"analyze"};
  r.inputs["file"] = path;
  r.results["s_a"] = entropy(partial_trace(rho, {0}));
  r.results["s_b"] = entropy(partial_trace(rho, {1}));
  r.directions["s_a"] = "exact";
  r.directions["s_b"] = "exact";
  if (f.pure) {
    r.results["eof"] = pure_entanglement(*f.pure, Cut::first_party());
    r.directions["eof"] = "exact";
  } else {
    const EofValue ef = best_eof(rho, Cut::first_party(), g.budget, derive_seed(g.seed, 1));
    r.results["eof"] = ef.value;
    r.directions["eof"] = std::string(to_string(ef.direction));
  }
  if (rho.dims() == Dims{2, 2}) r.results["concurrence"] = concurrence_2q(rho);
  const OptResult cc = classical_correlation(rho, 1, g.budget, derive_seed(g.seed, 2));
  r.results["c_arrow"] = cc.value;
  r.results["c_arrow_gap"] = cc.best_gap;
  r.directions["c_arrow"] = std::string(to_string(cc.direction));
  const OptResult ga = g_arrow(rho, 1, g.budget, derive_seed(g.seed, 3));
  r.results["g_arrow"] = ga.value;
  r.results["g_arrow_gap"] = ga.best_gap;
  const int rank = numerical_rank(eigh(rho.matrix()));
  r.results["g_arrow_member_cap"] = rank * rank;
  r.directions["g_arrow"] = std::string(to_string(ga.direction));
  r.results["separability"] = std::string(to_string(ppt_entangled(rho, Cut::first_party())));
  return r;
}

inline Report cmd_bound(const std::string& path, const Globals& g) {
  const io::StateFile f = io::load_state(path);
  Report r{"bound"};
  r.inputs["file"] = path;
  detail::fill_bound(r, sharability_bound(detail::bipartite(f), g.budget, g.seed));
  return r;
}

inline Report cmd_duality(const std::string& path, double check_tol, const Globals& g) {
  const io::StateFile f = io::load_state(path);
  if (!f.pure || f.dims.size() != 3) throw io::ParseError("duality requires a pure tripartite state");
  const DualityReport d = duality_check(*f.pure, g.budget, g.seed);
  Report r{"duality"};
  r.inputs["file"] = path;
  r.inputs["check_tol"] = check_tol;
  r.results["s_a"] = d.s_a;
  r.results["eof_ab"] = d.eof_ab;
  r.results["cc_ac"] = d.cc_ac;
  r.results["residual"] = d.residual;
  r.results["within_tolerance"] = std::abs(d.residual) <= check_tol;
  r.directions["s_a"] = "exact";
  r.directions["eof_ab"] = std::string(to_string(d.eof_direction));
  r.directions["cc_ac"] = std::string(to_string(d.cc_direction));
  if (std::abs(d.residual) > check_tol) r.exit_code = kCheck;
  return r;
}

inline Report cmd_chain(const std::string& path, double check_tol, const Globals& g) {
  const io::StateFile f = io::load_state(path);
  const ChainReport c = chain_verify(f.state(), g.budget, g.seed);
  Report r{"chain"};
  r.inputs["file"] = path;
  r.inputs["check_tol"] = check_tol;
  r.results["n"] = c.n;
  r.results["s_a"] = c.s_a;
  r.results["g_arrow"] = c.g_arrow_ab;
  r.results["margin"] = c.margin;
  r.results["holds"] = c.margin >= -check_tol;
  json prefix = json::array(), slacks = json::array();
  for (const auto& v : c.eof_prefix) prefix.push_back(detail::optional_number(v));
  for (const auto& v : c.step_slacks) slacks.push_back(detail::optional_number(v));
  r.results["eof_prefix_advisory"] = prefix;
  r.results["step_slacks_advisory"] = slacks;
  r.directions["s_a"] = "exact";
  r.directions["g_arrow"] = "upper";
  r.directions["eof_prefix_advisory"] = "upper";
  if (c.margin < -check_tol) r.exit_code = kCheck;
  return r;
}

inline Report cmd_extend(const std::string& path, int n, const std::string& out_path) {
  const io::StateFile f = io::load_state(path);
  if (!f.decomposition) throw io::ParseError("decomposition: missing (extend needs a separable decomposition)");
  const DensityMatrix& declared = detail::bipartite(f);
  const double mismatch = f.decomposition->deviation_from(declared);
  if (mismatch > kExtensionTol)
    throw Error(ErrorKind::invariant,
                "decomposition does not reproduce the declared state (deviation " + num(mismatch) + ")");
  const DensityMatrix ext = build(*f.decomposition, n);
  const Validation v = validate(ext, declared);
  if (!out_path.empty()) io::write_json(out_path, io::encode_state(ext));
  Report r{"extend"};
  r.inputs["file"] = path;
  r.inputs["n"] = n;
  r.inputs["out"] = out_path;
  r.results["dims"] = ext.dims();
  r.results["valid"] = v.valid;
  r.results["max_deviation"] = v.deviation;
  if (!v.valid) {
    r.results["first_invalid_k"] = v.k;
    r.exit_code = kCheck;
  }
  return r;
}

inline Report cmd_validate(const std::string& path, const std::string& target_path) {
  const io::StateFile ext = io::load_state(path);
  const io::StateFile target = io::load_state(target_path);
  const Validation v = validate(ext.state(), target.state());
  Report r{"validate"};
  r.inputs["file"] = path;
  r.inputs["target"] = target_path;
  r.results["valid"] = v.valid;
  r.results["deviation"] = v.deviation;
  if (!v.valid) {
    r.results["first_invalid_k"] = v.k;
    r.exit_code = kCheck;
  }
  return r;
}

inline Report cmd_search(const std::string& path, int n, const std::string& out_path, const Globals& g) {
  const io::StateFile f = io::load_state(path);
  const SearchResult s = search_extension(detail::bipartite(f), n, g.seed);
  if (s.found && !out_path.empty()) io::write_json(out_path, io::encode_state(*s.extension));
  Report r{"search"};
  r.inputs["file"] = path;
  r.inputs["n"] = n;
  r.inputs["out"] = out_path;
  r.results["outcome"] = s.found ? "found" : "not_found";
  r.results["best_deviation"] = s.best_deviation;
  r.results["rounds"] = s.rounds;
  if (!s.found) r.results["note"] = "not_found is evidence from a heuristic search, not a proof";
  return r;
}

struct SweepArgs {
  std::string family;
  std::string grid = "0.4:1.0:0.1";
  int count = 10;
  int rank = 2;
  double check_tol = 2e-3;
  std::string out;
};

inline Report cmd_sweep(const SweepArgs& a, const Globals& g) {
  Report r{"sweep"};
  r.inputs["family"] = a.family;
  r.inputs["check_tol"] = a.check_tol;
  r.inputs["out"] = a.out;
  json rows = json::array();
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> table;
  int violations = 0;

  if (a.family == "werner") {
    r.inputs["grid"] = a.grid;
    const std::vector<double> grid = detail::parse_grid(a.grid);
    for (double p : grid)
      if (p < -1.0 / 3.0 || p > 1.0) throw io::ParseError("--grid: Werner parameter outside [-1/3, 1]: " + num(p));
    header = {"p", "s_a", "eof", "c_arrow", "g_arrow", "n_max", "status", "margin"};
    std::vector<std::pair<double, int>> bounded;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double p = grid[i];
      const DensityMatrix rho = werner_state(p);
      const std::uint64_t s = derive_seed(g.seed, i);
      const BoundReport b = sharability_bound(rho, g.budget, s);
      const double ef = eof_2q(rho);
      const double cc = classical_correlation(rho, 1, g.budget, derive_seed(s, 2)).value;
      if (b.g_arrow_ab > cc + a.check_tol || b.g_arrow_ab > ef + a.check_tol) ++violations;
      if (b.n_max && b.verdict == Separability::entangled) bounded.emplace_back(p, *b.n_max);
      rows.push_back({{"p", p}, {"s_a", b.s_a}, {"eof", ef}, {"c_arrow", cc}, {"g_arrow", b.g_arrow_ab},
                      {"n_max", detail::n_max_json(b.n_max)}, {"status", std::string(to_string(b.status))},
                      {"margin", detail::optional_number(b.margin)}});
      table.push_back({num(p), num(b.s_a), num(ef), num(cc), num(b.g_arrow_ab),
                       b.n_max ? std::to_string(*b.n_max) : "UNBOUNDED", std::string(to_string(b.status)),
                       b.margin ? num(*b.margin) : "NA"});
    }
    std::sort(bounded.begin(), bounded.end());
    bool monotone = true;
    for (std::size_t i = 1; i < bounded.size(); ++i) monotone = monotone && bounded[i].second <= bounded[i - 1].second;
    r.results["monotone"] = monotone;
    if (!monotone) r.exit_code = kCheck;
    r.directions["eof"] = "exact";
    r.directions["c_arrow"] = "lower";
    r.directions["g_arrow"] = "upper";
  } else if (a.family == "haar-pure") {
    r.inputs["count"] = a.count;
    header = {"index", "seed", "s_a", "eof_ab", "cc_ac", "residual"};
    double worst = 0.0;
    for (int i = 0; i < a.count; ++i) {
      const std::uint64_t s = derive_seed(g.seed, static_cast<std::uint64_t>(i));
      const DualityReport d = duality_check(random_pure_state({2, 2, 2}, s), g.budget, derive_seed(s, 1));
      worst = std::max(worst, std::abs(d.residual));
      if (std::abs(d.residual) > a.check_tol) ++violations;
      rows.push_back({{"index", i}, {"seed", s}, {"s_a", d.s_a}, {"eof_ab", d.eof_ab}, {"cc_ac", d.cc_ac},
                      {"residual", d.residual}});
      table.push_back({std::to_string(i), std::to_string(s), num(d.s_a), num(d.eof_ab), num(d.cc_ac),
                       num(d.residual)});
    }
    r.results["max_abs_residual"] = worst;
    r.directions["eof_ab"] = "exact";
    r.directions["cc_ac"] = "lower";
  } else if (a.family == "hs-mixed") {
    r.inputs["count"] = a.count;
    r.inputs["rank"] = a.rank;
    if (a.rank < 1 || a.rank > 8) throw io::ParseError("--rank: must lie in 1..8 for three qubits");
    header = {"index", "seed", "eof_a_bc", "eof_a_b", "g_a_c", "slack"};
    double worst = std::numeric_limits<double>::infinity();
    const StateMeasure measure = a.rank == 8 ? StateMeasure::hilbert_schmidt() : StateMeasure::rank_limited(a.rank);
    for (int i = 0; i < a.count; ++i) {
      const std::uint64_t s = derive_seed(g.seed, static_cast<std::uint64_t>(i));
      const StepReport st = monogamy_step(random_state({2, 2, 2}, measure, s), g.budget, derive_seed(s, 1));
      worst = std::min(worst, st.slack);
      if (st.slack < -a.check_tol) ++violations;
      rows.push_back({{"index", i}, {"seed", s}, {"eof_a_bc", st.eof_a_bc}, {"eof_a_b", st.eof_a_b},
                      {"g_a_c", st.g_a_c}, {"slack", st.slack}});
      table.push_back({std::to_string(i), std::to_string(s), num(st.eof_a_bc), num(st.eof_a_b), num(st.g_a_c),
                       num(st.slack)});
    }
    r.results["min_slack"] = a.count > 0 ? json(worst) : json(nullptr);
    r.directions["eof_a_bc"] = "upper";
    r.directions["eof_a_b"] = "exact";
    r.directions["g_a_c"] = "upper";
  } else {
    throw io::ParseError("--family: unknown family \"" + a.family + "\" (expected werner, haar-pure, hs-mixed)");
  }

  r.results["rows"] = rows;
  r.results["count"] = rows.size();
  r.results["violations"] = violations;
  if (violations > 0) r.exit_code = kCheck;
  if (!a.out.empty()) {
    std::ofstream out(a.out);
    if (!out) throw io::ParseError("cannot write " + a.out);
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "\t" : "") << header[c];
    out << '\n';
    for (const auto& row : table) {
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "\t" : "") << row[c];
      out << '\n';
    }
    out << "# violations=" << violations;
    if (r.results.contains("monotone")) out << " monotone=" << (r.results["monotone"].get<bool>() ? "yes" : "no");
    out << '\n';
  }
  return r;
}

/// Runs one command line (without the program name). Returns the exit code.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entanglement shareability toolkit", "qshare"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "master seed");
  app.add_option("--restarts", g.budget.restarts, "optimizer restarts")->check(CLI::PositiveNumber);
  app.add_option("--iters", g.budget.iterations, "iterations per local search")->check(CLI::PositiveNumber);
  app.add_option("--tol", g.budget.tol, "optimizer convergence tolerance")->check(CLI::PositiveNumber);
  app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"text", "structured"}));
  app.add_flag("--timing", g.timing, "include wall_time_ms in the report");

  std::string file, target, out_path;
  int n = 2;
  double check_tol = 2e-3;
  SweepArgs sweep;

  auto* analyze = app.add_subcommand("analyze", "S, E_f, C<-, G<- and PPT verdict of a bipartite state");
  analyze->add_option("file", file)->required();
  auto* bound = app.add_subcommand("bound", "shareability bound N = floor(S(rho_A) / G<-)");
  bound->add_option("file", file)->required();
  auto* duality = app.add_subcommand("duality", "S(rho_A) = E_f(A:B) + C<-(A:C) on a pure tripartite state");
  duality->add_option("file", file)->required();
  duality->add_option("--check-tol", check_tol, "allowed |residual|");
  auto* chain = app.add_subcommand("chain", "S(rho_A) >= n G<-(A:B) on an n-extension");
  chain->add_option("file", file)->required();
  chain->add_option("--check-tol", check_tol, "allowed negative margin");
  auto* extend = app.add_subcommand("extend", "build an n-extension from a separable decomposition");
  extend->add_option("file", file)->required();
  extend->add_option("--n", n)->required()->check(CLI::PositiveNumber);
  extend->add_option("--out", out_path);
  auto* validate_cmd = app.add_subcommand("validate", "check the A:B_k marginals of an extension");
  validate_cmd->add_option("file", file)->required();
  validate_cmd->add_option("--target", target)->required();
  auto* search = app.add_subcommand("search", "search for a symmetric n-extension");
  search->add_option("file", file)->required();
  search->add_option("--n", n)->check(CLI::PositiveNumber);
  search->add_option("--out", out_path);
  auto* sweep_cmd = app.add_subcommand("sweep", "batch checks over a state family");
  sweep_cmd->add_option("--family", sweep.family)->required();
  sweep_cmd->add_option("--grid", sweep.grid, "werner grid, start:stop:step or a,b,c");
  sweep_cmd->add_option("--count", sweep.count)->check(CLI::NonNegativeNumber);
  sweep_cmd->add_option("--rank", sweep.rank, "hs-mixed state rank");
  sweep_cmd->add_option("--check-tol", sweep.check_tol);
  sweep_cmd->add_option("--out", sweep.out, "table file (tab-separated)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInput;
  }

  const auto start = std::chrono::steady_clock::now();
  Report report;
  try {
    if (*analyze)
      report = cmd_analyze(file, g);
    else if (*bound)
      report = cmd_bound(file, g);
    else if (*duality)
      report = cmd_duality(file, check_tol, g);
    else if (*chain)
      report = cmd_chain(file, check_tol, g);
    else if (*extend)
      report = cmd_extend(file, n, out_path);
    else if (*validate_cmd)
      report = cmd_validate(file, target);
    else if (*search)
      report = cmd_search(file, n, out_path, g);
    else
      report = cmd_sweep(sweep, g);
  } catch (const io::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInput;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    const bool input = e.kind() == ErrorKind::invalid_argument || e.kind() == ErrorKind::dimension_limit;
    return input ? kInput : kInvariant;
  }
  std::optional<double> wall;
  if (g.timing)
    wall = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  const json doc = report.to_json(g, wall);
  if (g.format == "structured")
    out << doc.dump(2) << '\n';
  else
    render_text(doc, out);
  return report.exit_code;
}

}  // namespace qshare::cli
