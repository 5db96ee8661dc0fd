#include <algorithm>
#include <atomic>
#include <fnmatch.h>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "CLI11.hpp"
#include "commands.hpp"
#include "secord/expr.hpp"

#ifndef SECORD_CORPUS_DIR
#define SECORD_CORPUS_DIR "corpus"
#endif

namespace secord::cli {

namespace {

struct CorpusEntry {
  std::string name;
  int code = 0;
  Json report;
};

CorpusEntry run_one(const std::filesystem::path& file, const RunOptions& opt) {
  CorpusEntry e;
  e.name = file.stem().string();
  try {
    const ProblemFile pf = load_problem(file);
    e.name = pf.name;
    CommandResult r = cmd_solve(pf, opt);
    write_artifacts(pf.name, r, "solve", opt);
    e.code = r.pass ? 0 : 2;
    e.report = {{"name", pf.name}, {"class", to_string(pf.cls)}, {"pass", r.pass}};
  } catch (const Error& err) {
    e.code = exit_code_for(err);
    e.report = {{"name", e.name}, {"pass", false}};
    e.report.update(error_object(err));
  } catch (const std::exception& ex) {
    e.code = 1;
    e.report = {{"name", e.name}, {"pass", false}, {"error", {{"message", ex.what()}}}};
  }
  return e;
}

int run_corpus(const std::filesystem::path& dir, const std::string& filter, const RunOptions& opt,
               std::ostream& out) {
  if (!std::filesystem::is_directory(dir))
    throw Error(ErrorCode::InvalidInput, "cli", "corpus", "not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& d : std::filesystem::directory_iterator(dir)) {
    if (d.path().extension() != ".prob") continue;
    if (!filter.empty() && fnmatch(filter.c_str(), d.path().stem().c_str(), 0) != 0) continue;
    files.push_back(d.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<CorpusEntry> entries(files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next++) < files.size();) entries[k] = run_one(files[k], opt);
  };
  const unsigned n = std::max(1u, std::min<unsigned>(opt.jobs, static_cast<unsigned>(files.size())));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  std::sort(entries.begin(), entries.end(),
            [](const CorpusEntry& a, const CorpusEntry& b) { return a.name < b.name; });

  int code = 0;
  std::size_t passed = 0;
  Json list = Json::array();
  for (const auto& e : entries) {
    out << (e.code == 0 ? "[PASS] " : "[FAIL] ") << e.name << '\n';
    list.push_back(e.report);
    if (e.code == 0) ++passed;
    if (e.code == 1) code = 1;
    if (e.code == 2 && code == 0) code = 2;
  }
  out << passed << '/' << entries.size() << " problems passed\n";
  CommandResult summary;
  summary.report["command"] = "corpus";
  summary.report["directory"] = dir.string();
  summary.report["problems"] = list;
  summary.pass = code == 0;
  write_artifacts("corpus", summary, "corpus", opt);
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Symbolic-numeric solver for second-order ODEs"};
  app.name("secord");
  RunOptions opt;
  opt.corpus_dir = SECORD_CORPUS_DIR;
  std::string out_dir = "out";
  bool no_timestamp = false;
  auto* tol = app.add_option("--tol", opt.tol, "Solver tolerance")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "Directory for reports and trajectories");
  app.add_option("--grid", opt.grid, "Residual grid size")->check(CLI::Range(3, 1000000));
  app.add_option("--jobs", opt.jobs, "Worker threads for corpus")->check(CLI::Range(1, 256));
  app.add_flag("--no-timestamp", no_timestamp, "Omit timestamps from reports");
  app.require_subcommand(1, 1);

  std::string file, solution, y_expr, eta_expr, filter;
  std::string dir = opt.corpus_dir.string();

  auto* reduce = app.add_subcommand("reduce", "Reduce a problem to constant-coefficient form");
  reduce->add_option("file", file, "Problem file")->required();
  auto* solve = app.add_subcommand("solve", "Solve and verify a problem");
  solve->add_option("file", file, "Problem file")->required();
  auto* exact = app.add_subcommand("exact", "Exactness tools for quasi-linear equations");
  exact->require_subcommand(1, 1);
  auto* check = exact->add_subcommand("check", "Classify exactness");
  check->add_option("file", file, "Problem file")->required();
  auto* integ = exact->add_subcommand("integrate", "Build and test the first integral");
  integ->add_option("file", file, "Problem file")->required();
  auto* verify = app.add_subcommand("verify", "Residual test of a candidate solution");
  verify->add_option("file", file, "Problem file")->required();
  verify->add_option("--solution", solution, "Candidate y(x)")->required();
  auto* functional = app.add_subcommand("functional", "Stationarity of the weighted functional");
  functional->add_option("file", file, "Problem file")->required();
  functional->add_option("--y", y_expr, "Candidate extremal y(x)");
  functional->add_option("--eta", eta_expr, "Perturbation eta(x)");
  auto* corpus = app.add_subcommand("corpus", "Run every problem in a directory");
  corpus->add_option("--filter", filter, "Glob on problem names");
  corpus->add_option("--dir", dir, "Problem directory");
  for (auto* s : {reduce, solve, exact, check, integ, verify, functional, corpus}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << e.what() << '\n';
      return 0;
    }
    Json j;
    j["error"] = {{"code", "InvalidInput"}, {"module", "cli"}, {"operation", "parse_arguments"},
                  {"message", e.what()}, {"point", Json::array()}};
    err << j.dump() << '\n';
    return 1;
  }
  opt.tol_given = tol->count() > 0;
  opt.out = out_dir;
  opt.timestamp = !no_timestamp;

  try {
    if (corpus->parsed()) return run_corpus(dir, filter, opt, out);
    const ProblemFile pf = load_problem(file);
    CommandResult r;
    std::string command;
    if (reduce->parsed()) {
      r = cmd_reduce(pf, opt);
      command = "reduce";
    } else if (solve->parsed()) {
      r = cmd_solve(pf, opt);
      command = "solve";
    } else if (check->parsed()) {
      r = cmd_exact_check(pf, opt);
      command = "exact check";
    } else if (integ->parsed()) {
      r = cmd_exact_integrate(pf, opt);
      command = "exact integrate";
    } else if (verify->parsed()) {
      r = cmd_verify(pf, opt, parse(solution, {"x"}));
      command = "verify";
    } else {
      std::optional<Expr> y, eta;
      if (!y_expr.empty()) y = parse(y_expr, {"x"});
      if (!eta_expr.empty()) eta = parse(eta_expr, {"x"});
      r = cmd_functional(pf, opt, y, eta);
      command = "functional";
    }
    write_artifacts(pf.name, r, command, opt);
    out << r.report.dump(2) << '\n';
    return r.pass ? 0 : 2;
  } catch (const Error& e) {
    err << error_object(e).dump() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    Json j;
    j["error"] = {{"code", "InvalidInput"}, {"module", "cli"}, {"operation", "run"},
                  {"message", e.what()}, {"point", Json::array()}};
    err << j.dump() << '\n';
    return 1;
  }
}

}  // namespace secord::cli
