#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "problem_file.hpp"
#include "secord/error.hpp"

namespace secord::cli {

using Json = nlohmann::ordered_json;

struct RunOptions {
  double tol = 1e-9;
  bool tol_given = false;
  std::filesystem::path out = "out";
  std::size_t grid = 257;
  unsigned jobs = 1;
  bool timestamp = true;
  std::filesystem::path corpus_dir;
};

struct CommandResult {
  Json report;
  bool pass = true;
  std::vector<std::array<double, 3>> traj;  // x, y, yp
};

CommandResult cmd_reduce(const ProblemFile& pf, const RunOptions& opt);
CommandResult cmd_solve(const ProblemFile& pf, const RunOptions& opt);
CommandResult cmd_exact_check(const ProblemFile& pf, const RunOptions& opt);
CommandResult cmd_exact_integrate(const ProblemFile& pf, const RunOptions& opt);
CommandResult cmd_verify(const ProblemFile& pf, const RunOptions& opt, const Expr& solution);
CommandResult cmd_functional(const ProblemFile& pf, const RunOptions& opt,
                             const std::optional<Expr>& y, const std::optional<Expr>& eta);

Json error_object(const Error& e);
/// 2 for failed verification, 1 for everything else.
int exit_code_for(const Error& e);

/// Writes <out>/<name>.report.json and, when there is a trajectory, <name>.traj.csv.
void write_artifacts(const std::string& name, CommandResult& result, const std::string& command,
                     const RunOptions& opt);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace secord::cli
