// Command line front end: generate synthetic matrix sets, run the solvers on
// MSET files, and benchmark methods across datasets with trace output.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ajd/criterion.hpp"
#include "ajd/datasets.hpp"
#include "ajd/io.hpp"
#include "ajd/solver.hpp"
#include "ajd/types.hpp"
#include "ajd/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;  // bad flags, unreadable/unwritable files
constexpr int kExitMaxIter = 3;
constexpr int kExitLineSearchFailed = 4;
constexpr int kExitNotSpd = 5;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int status_exit_code(ajd::SolveStatus status) {
  switch (status) {
    case ajd::SolveStatus::kConverged:
      return kExitOk;
    case ajd::SolveStatus::kMaxIterReached:
      return kExitMaxIter;
    case ajd::SolveStatus::kLineSearchFailed:
      return kExitLineSearchFailed;
  }
  return kExitUsage;
}

ajd::Method parse_method(const std::string& name) {
  if (name == "qn") return ajd::Method::kQuasiNewton;
  if (name == "gd") return ajd::Method::kGradientDescent;
  throw std::invalid_argument("unknown method '" + name + "' (expected qn or gd)");
}

struct GenOptions {
  ajd::SynthConfig config;
  std::string out;
};

int run_gen(const GenOptions& opt) {
  ajd::SyntheticDataset data = ajd::gen_synthetic(opt.config);
  try {
    ajd::save_matset(opt.out, data.set);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  std::cerr << "wrote " << opt.out << " (n=" << opt.config.n
            << ", p=" << opt.config.p << ", sigma=" << opt.config.sigma
            << ", seed=" << opt.config.seed << ")\n"
            << "mixing condition number: " << data.truth.mixing_condition
            << ", diagonal redraws: " << data.truth.diag_redraws
            << ", mixing redraws: " << data.truth.mixing_redraws << "\n";
  return kExitOk;
}

struct SolveOptions {
  std::string in;
  std::string method = "qn";
  int max_iter = 1000;
  double tol = 1e-10;
  int max_halvings = 30;
  std::string trace_out;
  std::string b_out;
};

int run_solve(const SolveOptions& opt) {
  std::optional<ajd::SymmetricMatrixSet> set;
  try {
    set = ajd::load_matset(opt.in);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  const ajd::SpdReport spd = ajd::validate_spd(*set);
  if (!spd.all_positive_definite) {
    std::cerr << "error: input matrices are not positive definite at indices:";
    for (int i : spd.failures) std::cerr << " " << i;
    std::cerr << "\n";
    return kExitNotSpd;
  }

  const auto setup_start = Clock::now();
  const ajd::Diagonalizer b0 = ajd::whitener(*set);
  const double whiten_time = seconds_since(setup_start);

  ajd::SolverConfig config;
  config.method = parse_method(opt.method);
  config.max_iter = opt.max_iter;
  config.grad_tol = opt.tol;
  config.max_halvings = opt.max_halvings;
  const ajd::SolveResult result = ajd::solve(*set, b0, config);

  try {
    if (!opt.b_out.empty()) {
      ajd::save_matrices(opt.b_out, {result.b.matrix()});
    }
    if (!opt.trace_out.empty()) {
      ajd::TraceMetadata meta;
      meta.method = opt.method;
      meta.status = ajd::to_string(result.trace.status);
      meta.version = ajd::kVersion;
      meta.n = set->size();
      meta.p = set->dim();
      meta.init_time_s = whiten_time + result.trace.init_time_s;
      ajd::save_trace(opt.trace_out, result.trace, meta);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  const auto& trace = result.trace;
  const double final_loss =
      trace.records.empty() ? trace.initial_loss : trace.records.back().loss;
  const double final_grad = trace.records.empty()
                                ? trace.initial_grad_norm
                                : trace.records.back().grad_norm;
  std::cerr << "status: " << ajd::to_string(trace.status)
            << ", iterations: " << trace.records.size()
            << ", loss: " << final_loss << ", grad norm: " << final_grad
            << ", degenerate blocks: " << result.diagnostics.degenerate_blocks
            << "\n";
  return status_exit_code(trace.status);
}

struct BenchDataset {
  std::string name;
  std::string path;  // empty for synthetic specs
  std::optional<ajd::SynthConfig> synth;
};

ajd::SynthConfig parse_synth_spec(const std::string& spec) {
  ajd::SynthConfig config;
  bool have_n = false, have_p = false;
  std::istringstream in(spec);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("bad synthetic spec item '" + item +
                                  "' (expected key=value)");
    }
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (key == "n") {
      config.n = std::stoi(value);
      have_n = true;
    } else if (key == "p") {
      config.p = std::stoi(value);
      have_p = true;
    } else if (key == "sigma") {
      config.sigma = std::stod(value);
    } else if (key == "seed") {
      config.seed = std::stoull(value);
    } else {
      throw std::invalid_argument("unknown synthetic spec key '" + key + "'");
    }
  }
  if (!have_n || !have_p) {
    throw std::invalid_argument("synthetic spec needs at least n=... and p=...");
  }
  if (config.n < 1 || config.p < 1 || config.sigma < 0.0) {
    throw std::invalid_argument("invalid synthetic spec '" + spec + "'");
  }
  return config;
}

std::string synth_name(const ajd::SynthConfig& c) {
  std::ostringstream name;
  name << "synth-n" << c.n << "-p" << c.p << "-sigma" << c.sigma;
  return name.str();
}

struct SummaryRow {
  std::string dataset;
  std::string method;
  int repeat = 0;
  int n = 0;
  int p = 0;
  std::string status;
  std::size_t iterations = 0;
  double final_loss = 0.0;
  double final_grad = 0.0;
  double solve_time_s = 0.0;
  double init_time_s = 0.0;
};

struct BenchOptions {
  std::vector<std::string> inputs;
  std::vector<std::string> specs;
  std::string methods = "qn,gd";
  int repeats = 1;
  double tol = 1e-8;
  int max_iter = 100000;
  int max_halvings = 30;
  std::string out_dir;
};

int run_bench(const BenchOptions& opt) {
  std::vector<std::string> methods;
  {
    std::istringstream in(opt.methods);
    std::string m;
    while (std::getline(in, m, ',')) {
      parse_method(m);  // validates
      methods.push_back(m);
    }
  }
  if (methods.empty()) {
    std::cerr << "error: no methods selected\n";
    return kExitUsage;
  }

  std::vector<BenchDataset> datasets;
  for (const std::string& path : opt.inputs) {
    datasets.push_back(
        {std::filesystem::path(path).stem().string(), path, std::nullopt});
  }
  for (const std::string& spec : opt.specs) {
    const ajd::SynthConfig config = parse_synth_spec(spec);
    datasets.push_back({synth_name(config), "", config});
  }
  if (datasets.empty()) {
    std::cerr << "error: no datasets (use --in or --synthetic-spec)\n";
    return kExitUsage;
  }

  std::error_code ec;
  std::filesystem::create_directories(opt.out_dir, ec);
  if (ec) {
    std::cerr << "error: cannot create '" << opt.out_dir
              << "': " << ec.message() << "\n";
    return kExitUsage;
  }

  std::vector<SummaryRow> rows;
  for (const BenchDataset& dataset : datasets) {
    for (int repeat = 0; repeat < opt.repeats; ++repeat) {
      // Materialize the inputs for this repeat; synthetic repeats advance
      // the seed so they are distinct but reproducible.
      std::optional<ajd::SymmetricMatrixSet> set;
      std::optional<ajd::SynthConfig> synth = dataset.synth;
      std::string load_error;
      if (synth) {
        synth->seed += static_cast<std::uint64_t>(repeat);
        set.emplace(ajd::gen_synthetic(*synth).set);
      } else {
        try {
          set.emplace(ajd::load_matset(dataset.path));
        } catch (const std::exception& e) {
          load_error = e.what();
        }
      }

      for (const std::string& method : methods) {
        SummaryRow row;
        row.dataset = dataset.name;
        row.method = method;
        row.repeat = repeat;
        if (!set) {
          row.status = "load_failed";
          std::cerr << "error: " << load_error << "\n";
          rows.push_back(row);
          continue;
        }
        row.n = set->size();
        row.p = set->dim();

        const ajd::SpdReport spd = ajd::validate_spd(*set);
        if (!spd.all_positive_definite) {
          row.status = "not_positive_definite";
          rows.push_back(row);
          continue;
        }

        const auto setup_start = Clock::now();
        const ajd::Diagonalizer b0 = ajd::whitener(*set);
        const double whiten_time = seconds_since(setup_start);

        ajd::SolverConfig config;
        config.method = parse_method(method);
        config.grad_tol = opt.tol;
        config.max_iter = opt.max_iter;
        config.max_halvings = opt.max_halvings;
        const ajd::SolveResult result = ajd::solve(*set, b0, config);

        const auto& trace = result.trace;
        row.status = ajd::to_string(trace.status);
        row.iterations = trace.records.size();
        row.final_loss = trace.records.empty() ? trace.initial_loss
                                               : trace.records.back().loss;
        row.final_grad = trace.records.empty() ? trace.initial_grad_norm
                                               : trace.records.back().grad_norm;
        row.solve_time_s =
            trace.records.empty() ? 0.0 : trace.records.back().wall_time_s;
        row.init_time_s = whiten_time + trace.init_time_s;

        ajd::TraceMetadata meta;
        meta.method = method;
        meta.status = row.status;
        meta.version = ajd::kVersion;
        meta.n = row.n;
        meta.p = row.p;
        meta.init_time_s = row.init_time_s;
        if (synth) {
          meta.sigma = synth->sigma;
          meta.seed = synth->seed;
          meta.generator = ajd::kGeneratorName;
        }
        const std::string trace_path =
            (std::filesystem::path(opt.out_dir) /
             (dataset.name + "__" + method + "__r" + std::to_string(repeat) +
              ".csv"))
                .string();
        try {
          ajd::save_trace(trace_path, trace, meta);
        } catch (const std::exception& e) {
          std::cerr << "error: " << e.what() << "\n";
          return kExitUsage;
        }
        rows.push_back(row);
      }
    }
  }

  const std::string summary_path =
      (std::filesystem::path(opt.out_dir) / "summary.csv").string();
  std::ofstream summary(summary_path);
  if (!summary) {
    std::cerr << "error: cannot open '" << summary_path << "' for writing\n";
    return kExitUsage;
  }
  summary << "dataset,method,repeat,n,p,status,iterations,final_loss,"
             "final_grad_norm,solve_time_s,init_time_s\n";
  char line[512];
  for (const SummaryRow& row : rows) {
    std::snprintf(line, sizeof(line), "%s,%s,%d,%d,%d,%s,%zu,%.17g,%.17g,%.6f,%.6f\n",
                  row.dataset.c_str(), row.method.c_str(), row.repeat, row.n,
                  row.p, row.status.c_str(), row.iterations, row.final_loss,
                  row.final_grad, row.solve_time_s, row.init_time_s);
    summary << line;
  }
  summary.flush();
  if (!summary) {
    std::cerr << "error: write to '" << summary_path << "' failed\n";
    return kExitUsage;
  }

  std::printf("%-28s %-6s %-3s %-22s %6s %12s %12s %10s\n", "dataset", "method",
              "rep", "status", "iters", "final_loss", "final_grad", "time_s");
  for (const SummaryRow& row : rows) {
    std::printf("%-28s %-6s %-3d %-22s %6zu %12.4e %12.4e %10.4f\n",
                row.dataset.c_str(), row.method.c_str(), row.repeat,
                row.status.c_str(), row.iterations, row.final_loss,
                row.final_grad, row.solve_time_s);
  }
  std::printf("summary written to %s\n", summary_path.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"approximate joint diagonalization of symmetric positive matrix sets"};
  app.require_subcommand(1);

  GenOptions gen;
  std::int64_t gen_seed = 0;
  CLI::App* gen_cmd =
      app.add_subcommand("gen", "generate a synthetic matrix set");
  gen_cmd->add_option("--n", gen.config.n, "number of matrices")
      ->required()
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--p", gen.config.p, "matrix dimension")
      ->required()
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--sigma", gen.config.sigma, "noise level")
      ->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--seed", gen_seed, "random seed")
      ->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--out", gen.out, "output MSET file")->required();

  SolveOptions solve_opt;
  CLI::App* solve_cmd =
      app.add_subcommand("solve", "jointly diagonalize an MSET file");
  solve_cmd->add_option("--in", solve_opt.in, "input MSET file")->required();
  solve_cmd->add_option("--method", solve_opt.method, "qn or gd")
      ->check(CLI::IsMember({"qn", "gd"}));
  solve_cmd->add_option("--max-iter", solve_opt.max_iter, "iteration cap")
      ->check(CLI::PositiveNumber);
  solve_cmd->add_option("--tol", solve_opt.tol, "gradient norm tolerance")
      ->check(CLI::PositiveNumber);
  solve_cmd
      ->add_option("--max-halvings", solve_opt.max_halvings,
                   "line search candidates")
      ->check(CLI::PositiveNumber);
  solve_cmd->add_option("--trace-out", solve_opt.trace_out, "trace CSV path");
  solve_cmd->add_option("--b-out", solve_opt.b_out,
                        "final diagonalizer path (MSET, n=1)");

  BenchOptions bench;
  CLI::App* bench_cmd =
      app.add_subcommand("bench", "run methods across datasets with traces");
  bench_cmd->add_option("--in", bench.inputs, "input MSET files");
  bench_cmd->add_option("--synthetic-spec", bench.specs,
                        "synthetic dataset spec, e.g. n=100,p=40,sigma=0.1,seed=8");
  bench_cmd->add_option("--methods", bench.methods, "comma list of qn,gd");
  bench_cmd->add_option("--repeats", bench.repeats, "repeats per dataset")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--tol", bench.tol, "gradient norm tolerance")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--max-iter", bench.max_iter, "iteration cap")
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--out-dir", bench.out_dir, "output directory")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen_cmd->parsed()) {
      gen.config.seed = static_cast<std::uint64_t>(gen_seed);
      return run_gen(gen);
    }
    if (solve_cmd->parsed()) return run_solve(solve_opt);
    if (bench_cmd->parsed()) return run_bench(bench);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
