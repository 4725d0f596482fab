// Command-line front end: orchestrates the scalar kernels, the checkpointed
// second-moment integral, ladder solves, decomposition verifiers, limit
// functionals and the proliferation engine, and emits JSON/CSV reports.
//
// Option precedence: built-in defaults, then the config file (flat
// key=value), then command-line flags, then environment variables
// (LADDERLAB_*), which win last. All numeric output is deterministic for a
// fixed configuration and checkpoint store; `--threads 1` reproduces
// multi-threaded results bit for bit.
//
// Exit codes: 0 success, 2 domain/parameter error, 3 precision unreachable,
// 4 I/O or checkpoint-validation error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "ladderlab/report_io.hpp"

namespace fs = std::filesystem;
using namespace ladderlab;

namespace {

struct Options {
  double tol = 1e-8;
  double root_tol = 1e-10;
  double t_min = 100.0;
  double c0 = 0.0;
  int threads = 0;  // 0 = hardware concurrency
  std::string checkpoints;
  std::string out;
  std::string format = "json";

  // per-command parameters
  double T = 0.0;
  int k = 3;
  double x = 1.0;
  std::string rational;
  std::string variant = "raabe";
  std::string tau_grid = "1e3,1e4,1e5";
  double eps = 0.01;
  int n_max = 3;
  int z_max = 200;
  std::string generations = "1";
  int N = 6;
};

void apply_env(Options& opt) {
  if (const char* v = std::getenv("LADDERLAB_TOL")) opt.tol = std::strtod(v, nullptr);
  if (const char* v = std::getenv("LADDERLAB_ROOT_TOL")) opt.root_tol = std::strtod(v, nullptr);
  if (const char* v = std::getenv("LADDERLAB_T_MIN")) opt.t_min = std::strtod(v, nullptr);
  if (const char* v = std::getenv("LADDERLAB_C0")) opt.c0 = std::strtod(v, nullptr);
  if (const char* v = std::getenv("LADDERLAB_THREADS")) opt.threads = std::atoi(v);
}

LadderConfig make_config(const Options& opt) {
  LadderConfig cfg;
  cfg.c0 = opt.c0;
  cfg.t_min = opt.t_min;
  cfg.root_tol = opt.root_tol;
  cfg.quad_tol = opt.tol;
  cfg.threads = opt.threads > 0
                    ? opt.threads
                    : std::max(1u, std::thread::hardware_concurrency());
  cfg.validate();
  return cfg;
}

fs::path checkpoint_path(const Options& opt) {
  if (const char* dir = std::getenv("LADDERLAB_CHECKPOINT_DIR"))
    return fs::path(dir) / "checkpoints.csv";
  if (!opt.checkpoints.empty()) return opt.checkpoints;
  return "checkpoints.csv";
}

CheckpointTable open_table(const Options& opt) {
  fs::path path = checkpoint_path(opt);
  if (fs::exists(path)) return load_checkpoints(path, opt.tol);
  return CheckpointTable(opt.tol);
}

void save_table(const CheckpointTable& table, const Options& opt) {
  save_checkpoints(table, checkpoint_path(opt));
}

void emit(const Options& opt, const json& report, const std::string& csv) {
  if (opt.out.empty()) return;
  if (opt.format == "csv")
    atomic_write(opt.out, csv);
  else
    atomic_write(opt.out, report.dump(2) + "\n");
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    grid.push_back(std::strtod(text.substr(pos, comma - pos).c_str(), nullptr));
    pos = comma + 1;
  }
  if (grid.empty()) throw parameter_error("empty tau grid");
  return grid;
}

std::vector<int> parse_ints(const std::string& text) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    out.push_back(std::atoi(text.substr(pos, comma - pos).c_str()));
    pos = comma + 1;
  }
  if (out.empty()) throw parameter_error("empty generation list");
  return out;
}

FunctionalVariant parse_variant(const std::string& name) {
  if (name == "zeta" || name == "zeta_integral") return FunctionalVariant::zeta_integral;
  if (name == "raabe" || name == "raabe_difference") return FunctionalVariant::raabe_difference;
  throw parameter_error("unknown variant '" + name + "' (expected zeta or raabe)");
}

json ladder_block(double T, CheckpointTable& table, const LadderConfig& cfg) {
  const double phi = phi1(T, table, cfg);
  const double gap = T - phi;
  const double asym = cfg.consts.one_minus_c() * T / std::log(T);
  json block{{"T", T},
             {"phi1", phi},
             {"phi1_derivative", phi1_derivative(T, table, cfg)},
             {"z_tilde", z_tilde(T, table, cfg)},
             {"gap", gap},
             {"gap_over_asymptotic", gap / asym}};
  if (T <= 1e8) {
    const double pi_T = static_cast<double>(prime_count(T));
    block["gap_over_pi"] = gap / (cfg.consts.one_minus_c() * pi_T);
    block["complementarity"] = (phi + cfg.consts.one_minus_c() * pi_T) / T;
  }
  return block;
}

int run_command(const std::string& cmd, Options& opt) {
  LadderConfig cfg = make_config(opt);
  CheckpointTable table = open_table(opt);

  if (cmd == "j") {
    IntegralResult r = j_integral(opt.T, table, cfg.quad_tol, cfg.quad());
    save_table(table, opt);
    std::printf("J(%.17g) = %.17g  err_bound %.17g  panels %lld\n", opt.T, r.value, r.err_bound,
                r.panels);
    emit(opt, json{{"T", opt.T},
                   {"value", r.value},
                   {"err_bound", r.err_bound},
                   {"panels", r.panels},
                   {"constants", constants_block(cfg)}},
         "T,value,err_bound,panels\n" + format_g17(opt.T) + ',' + format_g17(r.value) + ',' +
             format_g17(r.err_bound) + ',' + std::to_string(r.panels) + '\n');
    return 0;
  }

  if (cmd == "ladder") {
    json block = ladder_block(opt.T, table, cfg);
    block["constants"] = constants_block(cfg);
    save_table(table, opt);
    std::printf("phi1(%.17g) = %.17g  gap %.17g\n", opt.T, block["phi1"].get<double>(),
                block["gap"].get<double>());
    emit(opt, block, "");
    return 0;
  }

  if (cmd == "tower") {
    ReverseTower tower = reverse_tower(opt.T, opt.k, table, cfg);
    save_table(table, opt);
    for (std::size_t r = 0; r < tower.levels.size(); ++r)
      std::printf("level %zu: %.17g\n", r, tower.levels[r]);
    emit(opt, to_json(tower, cfg), to_csv(tower));
    return 0;
  }

  if (cmd == "verify-decomposition") {
    DecompositionReport report = verify_increment_decomposition(opt.T, opt.k, table, cfg);
    save_table(table, opt);
    for (const auto& row : report.rows)
      std::printf("r=%d lhs %.17g rhs %.17g residual %.3e\n", row.r, row.lhs, row.rhs,
                  row.residual);
    std::printf("corollary residual %.3e  constant_used %.17g\n", report.corollary_residual,
                report.constant_used);
    emit(opt, to_json(report, cfg), to_csv(report));
    return 0;
  }

  if (cmd == "increments") {
    auto rows = almost_linear_increment_check(opt.T, opt.k, table, cfg);
    save_table(table, opt);
    for (const auto& row : rows)
      std::printf("r=%d increment %.17g expected %.17g rel_dev %.3e\n", row.r, row.increment,
                  row.expected, row.rel_dev);
    emit(opt, to_json(rows, opt.T, opt.k, cfg), to_csv(rows));
    return 0;
  }

  if (cmd == "fermat") {
    std::vector<double> grid = parse_grid(opt.tau_grid);
    FunctionalVariant variant = parse_variant(opt.variant);
    if (!opt.rational.empty()) {
      std::vector<int> parts = parse_ints(opt.rational);
      if (parts.size() != 4)
        throw parameter_error("--rational expects x,y,z,n");
      FermatRational fr;
      fr.x = parts[0];
      fr.y = parts[1];
      fr.z = parts[2];
      fr.n = parts[3];
      if (fr.x < 1 || fr.y < 1 || fr.z < 1 || fr.n < 3)
        throw parameter_error("--rational requires x,y,z >= 1 and n >= 3");
      bigint xn = 1, yn = 1, zn = 1;
      for (int i = 0; i < fr.n; ++i) {
        xn *= fr.x;
        yn *= fr.y;
        zn *= fr.z;
      }
      fr.num = xn + yn;
      fr.den = zn;
      EquivalenceReport report = equivalence_report({fr}, grid, variant, table, cfg);
      save_table(table, opt);
      const auto& entry = report.entries[0];
      std::printf("rational (%lld,%lld,%lld,%d) value %.17g flag: %s\n", fr.x, fr.y, fr.z, fr.n,
                  fr.value(), to_string(entry.flag));
      emit(opt, to_json(entry, cfg), to_csv(entry.trace));
    } else {
      FunctionalTrace trace = convergence_trace(opt.x, grid, variant, table, cfg);
      save_table(table, opt);
      for (const auto& p : trace.points)
        std::printf("tau %.17g value %.17g residual %.17g\n", p.tau, p.value, p.residual);
      std::printf("fit C %.17g quality %.17g\n", trace.fit.C, trace.fit.quality);
      emit(opt, to_json(trace, cfg), to_csv(trace));
    }
    return 0;
  }

  if (cmd == "enumerate-rationals") {
    auto list = fermat_rationals(opt.eps, opt.n_max, opt.z_max);
    json arr = json::array();
    for (const auto& fr : list) arr.push_back(to_json(fr));
    std::printf("%zu rationals in (1 - %.17g, 1 + %.17g)\n", list.size(), opt.eps, opt.eps);
    for (const auto& fr : list)
      std::printf("(%lld,%lld,%lld,%d) = %s/%s\n", fr.x, fr.y, fr.z, fr.n, fr.num.str().c_str(),
                  fr.den.str().c_str());
    std::string csv = "x,y,z,n,num,den,value\n";
    for (const auto& fr : list)
      csv += std::to_string(fr.x) + ',' + std::to_string(fr.y) + ',' + std::to_string(fr.z) +
             ',' + std::to_string(fr.n) + ',' + fr.num.str() + ',' + fr.den.str() + ',' +
             format_g17(fr.value()) + '\n';
    emit(opt, json{{"eps", opt.eps},
                   {"n_max", opt.n_max},
                   {"z_max", opt.z_max},
                   {"rationals", arr},
                   {"constants", constants_block(cfg)}},
         csv);
    return 0;
  }

  if (cmd == "proliferate") {
    ProliferationSpec spec;
    spec.base_T = opt.T;
    spec.generations = parse_ints(opt.generations);
    spec.N = opt.N;
    ProliferationEngine engine(spec, table, cfg);
    GramResult gram = engine.gram_matrix();
    save_table(table, opt);
    std::printf("gram %dx%d  max normalized offdiag %.3e\n", gram.n, gram.n,
                gram.max_offdiag_normalized);
    for (int n = 0; n < gram.n; ++n)
      std::printf("diag[%d] = %.17g  scaled %.17g\n", n, gram.diag[static_cast<std::size_t>(n)],
                  gram.diag[static_cast<std::size_t>(n)] * (2.0 * n + 1.0));
    emit(opt, to_json(gram, spec, cfg), to_csv(gram));
    return 0;
  }

  if (cmd == "report") {
    IntegralResult r = j_integral(opt.T, table, cfg.quad_tol, cfg.quad());
    const double main_term = hli_reference(opt.T, cfg.consts);

    // residual samples at decade heights up to T; the fitted exponent of
    // |R(T)| ~ T^a is recorded, not asserted (desk-scale fits are unstable)
    json samples = json::array();
    std::vector<double> log_t, log_r;
    for (double height = 1e3; height <= opt.T * (1.0 + 1e-12); height *= 10.0) {
      double resid = j_integral(height, table, cfg.quad_tol, cfg.quad()).value -
                     hli_reference(height, cfg.consts);
      samples.push_back(json{{"T", height}, {"residual", resid}});
      if (resid != 0.0) {
        log_t.push_back(std::log(height));
        log_r.push_back(std::log(std::abs(resid)));
      }
    }
    json exponent;  // null unless at least two usable samples
    if (log_t.size() >= 2) {
      double mt = 0.0, mr = 0.0;
      for (std::size_t i = 0; i < log_t.size(); ++i) {
        mt += log_t[i];
        mr += log_r[i];
      }
      mt /= static_cast<double>(log_t.size());
      mr /= static_cast<double>(log_t.size());
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < log_t.size(); ++i) {
        num += (log_t[i] - mt) * (log_r[i] - mr);
        den += (log_t[i] - mt) * (log_t[i] - mt);
      }
      if (den > 0.0) exponent = num / den;
    }

    json report{{"T", opt.T},
                {"j", json{{"value", r.value}, {"err_bound", r.err_bound}}},
                {"hli_main_term", main_term},
                {"hli_residual", r.value - main_term},
                {"hli_residual_over_T", (r.value - main_term) / opt.T},
                {"hli_residual_samples", samples},
                {"hli_residual_exponent_estimate", exponent},
                {"ladder", ladder_block(opt.T, table, cfg)},
                {"rectangle_constant", cfg.consts.rectangle_constant()},
                {"rectangle_constant_note",
                 "ln(2 pi) - 1 - c evaluates to 0.2606614 with c the Euler constant "
                 "(1 - c = 0.4228); the value 0.68 sometimes quoted for this constant "
                 "is inconsistent with that choice of c and is not used"},
                {"constants", constants_block(cfg)}};
    save_table(table, opt);
    std::printf("J(%.17g) = %.17g  residual/T %.6g  gap ratio %.6g\n", opt.T, r.value,
                report["hli_residual_over_T"].get<double>(),
                report["ladder"]["gap_over_asymptotic"].get<double>());
    emit(opt, report, "");
    return 0;
  }

  throw parameter_error("unknown command " + cmd);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ladderlab: desk-scale laboratory for the critical-line second moment,\n"
               "ladder transforms, Raabe decompositions and limit functionals"};
  app.fallthrough();
  app.set_config("--config", "", "flat key=value configuration file");

  Options opt;
  app.add_option("--tol", opt.tol, "quadrature tolerance (err <= tol * max(1, length))");
  app.add_option("--root-tol", opt.root_tol, "ladder solve tolerance (relative)");
  app.add_option("--t-min", opt.t_min, "domain floor for ladder solves");
  app.add_option("--c0", opt.c0, "additive constant of the almost-exact representation");
  app.add_option("--threads", opt.threads, "worker cap (0 = hardware concurrency)");
  app.add_option("--checkpoints", opt.checkpoints,
                 "checkpoint CSV path (LADDERLAB_CHECKPOINT_DIR overrides)");
  app.add_option("--out", opt.out, "write the report to this path (atomic)");
  app.add_option("--format", opt.format, "report format: json or csv")
      ->check(CLI::IsMember({"json", "csv"}));

  CLI::App* cmd_j = app.add_subcommand("j", "checkpointed second-moment integral J(T)");
  cmd_j->add_option("--T", opt.T, "height")->required();

  CLI::App* cmd_ladder = app.add_subcommand("ladder", "ladder transform at one height");
  cmd_ladder->add_option("--T", opt.T, "height")->required();

  CLI::App* cmd_tower = app.add_subcommand("tower", "reverse-iterate tower");
  cmd_tower->add_option("--T", opt.T, "base height")->required();
  cmd_tower->add_option("--k", opt.k, "levels (1..10)");

  CLI::App* cmd_verify =
      app.add_subcommand("verify-decomposition", "increment decomposition check");
  cmd_verify->add_option("--T", opt.T, "base height")->required();
  cmd_verify->add_option("--k", opt.k, "rows (1..10)");

  CLI::App* cmd_inc = app.add_subcommand("increments", "almost-linear increment law");
  cmd_inc->add_option("--T", opt.T, "base height")->required();
  cmd_inc->add_option("--k", opt.k, "rows (1..10)");

  CLI::App* cmd_fermat = app.add_subcommand("fermat", "limit functional traces");
  cmd_fermat->add_option("--x", opt.x, "ray target");
  cmd_fermat->add_option("--rational", opt.rational, "x,y,z,n (overrides --x)");
  cmd_fermat->add_option("--variant", opt.variant, "zeta or raabe");
  cmd_fermat->add_option("--tau-grid", opt.tau_grid, "comma-separated increasing taus");

  CLI::App* cmd_enum = app.add_subcommand("enumerate-rationals", "near-1 Fermat rationals");
  cmd_enum->add_option("--eps", opt.eps, "window half-width (0, 1)");
  cmd_enum->add_option("--n-max", opt.n_max, "largest exponent");
  cmd_enum->add_option("--z-max", opt.z_max, "largest denominator base");

  CLI::App* cmd_prolif = app.add_subcommand("proliferate", "proliferated Gram certification");
  cmd_prolif->add_option("--T", opt.T, "base height")->required();
  cmd_prolif->add_option("--generations", opt.generations, "comma-separated p list");
  cmd_prolif->add_option("--N", opt.N, "functions 0..N-1");

  CLI::App* cmd_report = app.add_subcommand("report", "summary report at one height");
  cmd_report->add_option("--T", opt.T, "height")->required();

  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  apply_env(opt);

  std::string cmd;
  for (CLI::App* sub : {cmd_j, cmd_ladder, cmd_tower, cmd_verify, cmd_inc, cmd_fermat, cmd_enum,
                        cmd_prolif, cmd_report})
    if (sub->parsed()) cmd = sub->get_name();

  try {
    return run_command(cmd, opt);
  } catch (const domain_error& e) {
    std::fprintf(stderr, "domain error: %s\n", e.what());
    return 2;
  } catch (const parameter_error& e) {
    std::fprintf(stderr, "parameter error: %s\n", e.what());
    return 2;
  } catch (const precision_error& e) {
    std::fprintf(stderr, "precision error: %s\n", e.what());
    return 3;
  } catch (const io_error& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 4;
  } catch (const validation_error& e) {
    std::fprintf(stderr, "validation error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
