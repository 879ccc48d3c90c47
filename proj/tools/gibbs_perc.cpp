// gibbs_perc: command-line driver for bounds, sampling, percolation,
// contour and branching experiments. Every output file starts with `#`
// metadata lines (version, seed, config hash) followed by a CSV table.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gibbsperc/branching.hpp"
#include "gibbsperc/contour2d.hpp"
#include "gibbsperc/io.hpp"
#include "gibbsperc/parallel.hpp"
#include "gibbsperc/percolation.hpp"
#include "run_config.hpp"

namespace fs = std::filesystem;
using namespace gperc;
using gperc::cli::json;
using gperc::cli::RunConfig;

namespace {

constexpr const char *kVersion = "gibbs-perc 1.0.0";

struct Options {
  std::string config_path;
  unsigned threads = 1;
  bool json_mirror = false;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool print_defaults = false;
  bool compare_printed = false;
};

/// A table whose cells are JSON scalars: numbers, strings, or null (empty CSV field).
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
  std::vector<std::string> notes;  // extra `# key=value` metadata lines
};

class Context {
public:
  Context(RunConfig cfg, json user, Options opt, std::string command)
      : cfg_(std::move(cfg)), user_(std::move(user)), opt_(std::move(opt)), command_(std::move(command)) {
    hash_ = cli::config_hash(user_);
  }

  [[nodiscard]] const RunConfig &cfg() const { return cfg_; }
  [[nodiscard]] const Options &opt() const { return opt_; }

  [[nodiscard]] std::string header() const {
    std::ostringstream os;
    os << "# " << kVersion << '\n'
       << "# command=" << command_ << '\n'
       << "# seed=" << cfg_.seed << '\n'
       << "# config_hash=" << hash_ << '\n'
       << "# rng=" << Xoshiro256::name << '\n';
    return os.str();
  }

  fs::path path(const std::string &name) const {
    fs::create_directories(cfg_.out);
    return fs::path(cfg_.out) / name;
  }

  void write(const std::string &stem, const Table &t) const {
    {
      std::ofstream os(path(stem + ".csv"));
      if (!os) throw std::runtime_error("cannot open " + path(stem + ".csv").string());
      os << header();
      for (const auto &n : t.notes) os << "# " << n << '\n';
      for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
      os << '\n';
      for (const auto &row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell(row[i]);
        os << '\n';
      }
    }
    if (opt_.json_mirror) {
      json doc{{"version", kVersion}, {"command", command_}, {"seed", cfg_.seed}, {"config_hash", hash_}};
      doc["notes"] = t.notes;
      json rows = json::array();
      for (const auto &row : t.rows) {
        json obj = json::object();
        for (std::size_t i = 0; i < row.size(); ++i) obj[t.columns[i]] = row[i];
        rows.push_back(std::move(obj));
      }
      doc["rows"] = std::move(rows);
      std::ofstream os(path(stem + ".json"));
      os << doc.dump(2) << '\n';
    }
    std::cout << "wrote " << path(stem + ".csv").string() << " (" << t.rows.size() << " rows)\n";
  }

private:
  static std::string cell(const json &v) {
    if (v.is_null()) return "";
    if (v.is_number_float()) return format_number(v.get<double>());
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
  }

  RunConfig cfg_;
  json user_;
  Options opt_;
  std::string command_;
  std::string hash_;
};

json num(double x) { return std::isfinite(x) ? json(x) : json(format_number(x)); }
json num(const std::optional<double> &x) { return x ? num(*x) : json(nullptr); }

struct GridPoint {
  double lambda;
  double beta;
};

std::vector<GridPoint> grid_points(const RunConfig &c) {
  if (c.lambda_grid.empty()) throw Error(ErrorCode::EmptyGrid, "lambda grid is empty");
  if (c.beta_grid.empty()) throw Error(ErrorCode::EmptyGrid, "beta grid is empty");
  std::vector<GridPoint> out;
  for (double l : c.lambda_grid)
    for (double b : c.beta_grid) out.push_back({l, b});
  return out;
}

// ---------------------------------------------------------------------------

int cmd_bounds(const Context &ctx) {
  const auto &c = ctx.cfg();
  const auto p = cli::potential_from_json(c.potential);
  const auto contour = cli::contour_params(c, p);
  if (contour) require_percolation_hypothesis(p, c.nu, c.ell);
  const auto rows = phase_diagram(c.lambda_grid, p, c.nu, c.ell, contour);
  Table t;
  t.columns = {"lambda", "beta_minus", "beta_plus", "lambda_minus", "lambda_plus", "verdict"};
  if (ctx.opt().compare_printed) t.columns.push_back("beta_minus_printed");
  if (contour) {
    t.notes.push_back("alpha=" + format_number(contour->alpha()));
    t.notes.push_back("a=" + format_number(contour->a) + " eps=" + format_number(contour->eps));
  }
  for (const auto &r : rows) {
    std::vector<json> row{num(r.lambda), num(r.beta_minus), num(r.beta_plus),
                          num(r.lambda_minus), num(r.lambda_plus), r.verdict};
    if (ctx.opt().compare_printed) row.push_back(num(r.beta_minus_printed));
    t.rows.push_back(std::move(row));
  }
  ctx.write("bounds", t);
  return 0;
}

template <int D>
int simulate_impl(const Context &ctx) {
  const auto &c = ctx.cfg();
  const auto p = cli::potential_from_json(c.potential);
  const auto pts = grid_points(c);
  std::vector<ChainResult<D>> results(pts.size());
  for (const auto &gp : pts) validate_params(cli::mc_params(c, gp.lambda, gp.beta), p);
  parallel_for(pts.size(), ctx.opt().threads, [&](std::size_t i) {
    auto mc = cli::mc_params(c, pts[i].lambda, pts[i].beta);
    mc.seed = stream_seed(c.seed, i);
    results[i] = run_chain<D>(mc, p);
  });

  Table summary;
  summary.columns = {"lambda", "beta", "mean_density", "acc_birth", "acc_death", "acc_translate",
                     "energy_drift", "tail_energy_bound", "min_pair_distance", "snapshots"};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto &res = results[i];
    const auto &diag = res.diagnostics;
    double mean_density = 0.0;
    for (std::size_t s = c.burn_in; s < diag.density.size(); ++s) mean_density += diag.density[s];
    if (diag.density.size() > c.burn_in) mean_density /= static_cast<double>(diag.density.size() - c.burn_in);
    double min_dist = std::numeric_limits<double>::infinity();
    for (const auto &snap : res.snapshots)
      min_dist = std::min(min_dist, min_pair_distance<D>(std::span<const Point<D>>(snap.points)));
    summary.rows.push_back({num(pts[i].lambda), num(pts[i].beta), num(mean_density),
                            num(diag.stats.rate(MoveKind::Birth)), num(diag.stats.rate(MoveKind::Death)),
                            num(diag.stats.rate(MoveKind::Translate)), num(diag.final_energy_drift),
                            num(diag.tail_energy_bound), num(min_dist), res.snapshots.size()});

    Table trace;
    trace.columns = {"sweep", "n", "density", "energy"};
    trace.notes.push_back("lambda=" + format_number(pts[i].lambda) + " beta=" + format_number(pts[i].beta));
    const double volume = std::pow(c.box, D);
    for (std::size_t s = 0; s < diag.density.size(); ++s)
      trace.rows.push_back({s + 1, static_cast<std::size_t>(std::llround(diag.density[s] * volume)),
                            num(diag.density[s]), num(diag.energy[s])});
    ctx.write("diagnostics_" + std::to_string(i), trace);

    std::ofstream os(ctx.path("snapshots_" + std::to_string(i) + ".txt"));
    os << ctx.header();
    for (const auto &snap : res.snapshots) write_snapshot<D>(os, snap, c.box, stream_seed(c.seed, i));
  }
  ctx.write("simulate", summary);
  return 0;
}

template <int D>
int percolation_impl(const Context &ctx) {
  const auto &c = ctx.cfg();
  const auto p = cli::potential_from_json(c.potential);
  if (c.replicas == 0) throw Error(ErrorCode::ConfigError, "replicas must be >= 1");
  const auto pts = grid_points(c);
  const auto proxy = c.proxy == "crossing" ? PercolationProxy::Crossing : PercolationProxy::CentreToBoundary;
  Table t;
  t.columns = {"lambda", "beta", "ell", "L", "replicas", "theta_hat", "ci_lo", "ci_hi", "mean_cluster_size"};
  t.notes.push_back("proxy=" + c.proxy + " axis=" + std::to_string(c.axis));
  t.notes.push_back("caveat=finite box with empty boundary condition; box-crossing proxy for infinite clusters");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    auto mc = cli::mc_params(c, pts[i].lambda, pts[i].beta);
    mc.seed = stream_seed(c.seed, i);
    const auto est = theta_estimate<D>(mc, p, c.ell, c.replicas, ctx.opt().threads, proxy, c.axis);
    t.rows.push_back({num(pts[i].lambda), num(pts[i].beta), num(c.ell), num(c.box), c.replicas,
                      num(est.theta_hat), num(est.ci95.lo), num(est.ci95.hi), num(est.mean_cluster_size)});
  }
  ctx.write("percolation", t);
  return 0;
}

int cmd_contours(const Context &ctx) {
  const auto &c = ctx.cfg();
  const auto p = cli::potential_from_json(c.potential);
  require_percolation_hypothesis(p, c.nu, c.ell);
  if (!c.contour) throw Error(ErrorCode::ConfigError, "contours needs a 'contour' section (delta, m)");
  if (c.replicas == 0) throw Error(ErrorCode::ConfigError, "replicas must be >= 1");
  const auto cp = *cli::contour_params(c, p);
  const auto grid = CellGrid::for_box(c.box, p.d, cp.delta);
  const auto pts = grid_points(c);

  Table summary;
  summary.columns = {"lambda", "beta", "G", "alpha", "snapshots", "verdict"};
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto mc0 = cli::mc_params(c, pts[i].lambda, pts[i].beta);
    validate_params(mc0, p);
    std::vector<std::vector<std::vector<Point2>>> per_replica(c.replicas);
    parallel_for(c.replicas, ctx.opt().threads, [&](std::size_t r) {
      auto mc = mc0;
      mc.seed = stream_seed(stream_seed(c.seed, i), r);
      auto res = run_chain<2>(mc, p);
      for (auto &s : res.snapshots) per_replica[r].push_back(std::move(s.points));
    });
    std::vector<std::vector<Point2>> snaps;
    for (auto &v : per_replica)
      for (auto &s : v) snaps.push_back(std::move(s));
    const EnvelopeParams env{pts[i].beta, pts[i].lambda, cp.m, cp.eps, cp.alpha()};
    const auto stats = contour_statistics(std::span<const std::vector<Point2>>(snaps), grid, env);
    const auto verdict = classify(pts[i].lambda, pts[i].beta, p, c.nu, c.ell, cp).verdict;

    Table t;
    t.columns = {"n", "empirical_freq", "envelope"};
    t.notes.push_back("lambda=" + format_number(pts[i].lambda) + " beta=" + format_number(pts[i].beta) +
                      " snapshots=" + std::to_string(stats.snapshots) + " G=" + format_number(env.G()));
    for (const auto &row : stats.rows) t.rows.push_back({row.n, num(row.empirical_freq), num(row.envelope)});
    ctx.write("contours_" + std::to_string(i), t);
    summary.rows.push_back({num(pts[i].lambda), num(pts[i].beta), num(env.G()), num(cp.alpha()), stats.snapshots,
                            to_string(verdict)});
  }
  ctx.write("contours", summary);
  return 0;
}

int cmd_gw(const Context &ctx) {
  const auto &c = ctx.cfg();
  const auto p = cli::potential_from_json(c.potential);
  const auto consts = bound_constants(p, c.nu, c.ell);
  const auto pts = grid_points(c);
  Table t;
  t.columns = {"lambda", "beta", "mean_bound", "law_mean", "extinction_rate", "mean_total_size", "bound_1_over_eps"};
  t.notes.push_back("max_generations=" + std::to_string(c.max_generations) +
                    " replicas=" + std::to_string(c.gw_replicas));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto law = dominating_offspring_law(pts[i].lambda, pts[i].beta, consts);
    const auto s = extinction_and_size(law, c.gw_replicas, stream_seed(c.seed, i), ctx.opt().threads,
                                       c.max_generations);
    const double nan = std::nan("");
    t.rows.push_back({num(pts[i].lambda), num(pts[i].beta),
                      num(offspring_mean_bound(pts[i].lambda, pts[i].beta, consts)), num(law.mean),
                      num(s.skipped ? nan : s.extinction_rate), num(s.skipped ? nan : s.mean_total_size),
                      num(s.skipped ? nan : s.size_bound)});
  }
  ctx.write("gw", t);
  return 0;
}

int cmd_validate(const Context &ctx) {
  const auto p = cli::potential_from_json(ctx.cfg().potential);
  const auto report = validate_shape(p);
  Table t;
  t.columns = {"r", "value", "expected"};
  t.notes.push_back(std::string("ok=") + (report.ok ? "true" : "false"));
  t.notes.push_back("family=" + p.family_name());
  for (const auto &s : report.structural) t.notes.push_back("structural=" + s);
  for (const auto &v : report.violations) t.rows.push_back({num(v.r), num(v.value), v.expected});
  ctx.write("validate", t);
  std::cout << (report.ok ? "ok" : "invalid") << '\n';
  return report.ok ? 0 : 2;
}

template <template <int> class F>
int dispatch(int nu, const Context &ctx) {
  switch (nu) {
  case 1: return F<1>::run(ctx);
  case 2: return F<2>::run(ctx);
  case 3: return F<3>::run(ctx);
  }
  throw Error(ErrorCode::ConfigError, "nu must be 1, 2 or 3");
}

template <int D> struct Simulate { static int run(const Context &ctx) { return simulate_impl<D>(ctx); } };
template <int D> struct Percolate { static int run(const Context &ctx) { return percolation_impl<D>(ctx); } };

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Boolean percolation of Gibbs point processes: bounds, sampling and checks"};
  app.require_subcommand(0, 1);
  Options opt;
  app.add_option("--config", opt.config_path, "JSON config file (missing keys take default values)");
  app.add_option("--threads", opt.threads, "worker threads; never changes output bytes")->check(CLI::PositiveNumber);
  app.add_flag("--json", opt.json_mirror, "also write a JSON mirror of every CSV");
  app.add_option("--out", opt.out, "output directory (overrides config 'out')");
  app.add_option("--seed", opt.seed, "master seed (overrides config 'seed')");
  app.add_flag("--print-defaults", opt.print_defaults, "print the default config and exit");

  std::map<std::string, CLI::App *> subs;
  for (const auto *name : {"bounds", "simulate", "percolation", "contours", "gw", "validate-potential"})
    subs[name] = app.add_subcommand(name)->fallthrough();
  subs["bounds"]->description("phase-diagram curves beta-(lambda), beta+(lambda)");
  subs["bounds"]->add_flag("--compare-printed", opt.compare_printed,
                           "add a beta_minus_printed column (alternative grouping of the log term)");
  subs["simulate"]->description("run one chain per (lambda, beta) and dump snapshots and traces");
  subs["percolation"]->description("crossing-frequency estimate of theta over replicas");
  subs["contours"]->description("empty-cell contour statistics around the box centre (nu = 2)");
  subs["gw"]->description("Galton-Watson extinction check of the dominating offspring law");
  subs["validate-potential"]->description("check the sign/tail conditions of the configured potential");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e);
  }

  if (opt.print_defaults) {
    std::cout << cli::default_config_json().dump(2) << '\n';
    return 0;
  }
  std::string command;
  for (const auto &[name, sub] : subs)
    if (sub->parsed()) command = name;
  if (command.empty()) {
    std::cerr << app.help();
    return 1;
  }

  try {
    json user = json::object();
    if (!opt.config_path.empty()) {
      std::ifstream is(opt.config_path);
      if (!is) throw Error(ErrorCode::ConfigError, "cannot read config " + opt.config_path);
      try {
        user = json::parse(is);
      } catch (const json::exception &e) {
        throw Error(ErrorCode::ConfigError, e.what());
      }
    }
    if (opt.seed) user["seed"] = *opt.seed;
    if (!opt.out.empty()) user["out"] = opt.out;
    RunConfig cfg = cli::config_from_json(user);
    // The output directory does not affect results, so it is left out of the hash.
    json hashed = user;
    hashed.erase("out");
    const Context ctx(cfg, hashed, opt, command);

    if (command == "bounds") return cmd_bounds(ctx);
    if (command == "simulate") return dispatch<Simulate>(cfg.nu, ctx);
    if (command == "percolation") return dispatch<Percolate>(cfg.nu, ctx);
    if (command == "contours") return cmd_contours(ctx);
    if (command == "gw") return cmd_gw(ctx);
    return cmd_validate(ctx);
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
