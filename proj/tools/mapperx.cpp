// Batch command line front end: wrangling, parameter sweeps, benchmarks.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mapper/cli.hpp"

namespace {

using namespace mapper;

int run(int argc, char **argv) {
  CLI::App app{"Mapper graph engine: batch command line API"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  auto *wrangle_cmd = app.add_subcommand("wrangle", "Clean a CSV file and report column kinds");
  std::string w_in, w_out;
  wrangle_cmd->add_option("input", w_in, "Input CSV")->required();
  wrangle_cmd->add_option("output", w_out, "Output CSV")->required();

  auto *mapper_cmd = app.add_subcommand("mapper", "Compute mapper graphs over a parameter sweep");
  cli::SweepOptions opt;
  std::string norm = "none", strategy = "precomputed";
  std::vector<std::string> filters;
  bool bench = false;
  mapper_cmd->add_option("--input", opt.input, "Input CSV")->required();
  mapper_cmd->add_option("--output-dir", opt.output_dir, "Directory for graph JSON files");
  mapper_cmd->add_option("--norm", norm, "none | minmax | l2")
      ->check(CLI::IsMember({"none", "minmax", "l2"}));
  mapper_cmd->add_option("--filter", filters, "Filter spec as JSON (repeat for a 2D filter)")
      ->required()
      ->take_all();
  mapper_cmd->add_option("--intervals", opt.intervals, "Interval counts n")->delimiter(',');
  mapper_cmd->add_option("--overlaps", opt.overlaps, "Overlap fractions p")->delimiter(',');
  mapper_cmd->add_option("--eps", opt.eps, "DBSCAN eps values")->delimiter(',');
  mapper_cmd->add_option("--min-pts", opt.min_pts, "DBSCAN minPts")->capture_default_str();
  mapper_cmd->add_option("--threads", opt.threads, "Worker threads (a list in --bench mode)")
      ->delimiter(',');
  mapper_cmd->add_option("--strategy", strategy, "precomputed | on-the-fly")
      ->check(CLI::IsMember({"precomputed", "on-the-fly"}));
  mapper_cmd->add_option("--precompute-threshold", opt.strategy.threshold,
                         "Largest cover element to precompute")
      ->capture_default_str();
  mapper_cmd->add_flag("--bench", bench, "Time vanilla vs precomputed; CSV to stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? cli::kOk : cli::kUsage;
  }

  try {
    if (*wrangle_cmd) {
      auto report = cli::wrangle_file(w_in, w_out);
      std::cout << to_json(report).dump(2) << '\n';
      return cli::kOk;
    }
    opt.norm = parse_normalization(norm);
    opt.strategy.mode = parse_distance_mode(strategy);
    if (filters.size() > 2)
      throw ParamError("filter", "at most two --filter specs");
    for (const auto &f : filters) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(f);
      } catch (const nlohmann::json::parse_error &) {
        throw ParamError("filter", "not valid JSON: " + f);
      }
      opt.filters.push_back(filter_from_json(j));
    }
    if (bench) {
      const auto w = wrangle(read_csv_file(opt.input));
      cli::write_bench_csv(cli::run_bench(w.cloud, opt), std::cout);
      return cli::kOk;
    }
    if (opt.output_dir.empty())
      throw ParamError("output-dir", "--output-dir is required unless --bench is given");
    cli::run_sweep(opt, &std::cerr);
    return cli::kOk;
  } catch (const ParamError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kUsage;
  } catch (const DataError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kData;
  } catch (const cli::GraphMismatch &e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kInternal;
  } catch (const std::runtime_error &e) {
    // I/O and similar environment failures.
    std::cerr << "error: " << e.what() << '\n';
    return cli::kData;
  } catch (const std::exception &e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return cli::kInternal;
  }
}

} // namespace

int main(int argc, char **argv) { return run(argc, argv); }
