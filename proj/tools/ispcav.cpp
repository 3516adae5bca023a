#include <iostream>
#include <string>
#include <vector>

#include "ispcav/harness/commands.hpp"

namespace {

constexpr const char* kUsage =
    "usage: ispcav <subcommand> [--config PATH] [--key value ...] --seed S --out DIR\n"
    "subcommands: gen-graph exact mis cavity-check fixpoint rs-free-energy\n"
    "             contraction-check isp-curve mp-eval residual sweep\n";

}  // namespace

int main(int argc, char** argv) {
  using namespace ispcav::harness;
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty() || args.front() == "--help" || args.front() == "-h") {
    std::cout << kUsage;
    return args.empty() ? kParameterError : kOk;
  }
  ExperimentConfig cfg;
  try {
    cfg = parse_config(args);
  } catch (const ispcav::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const ispcav::ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n' << kUsage;
    return kParameterError;
  }
  const auto result = run_command(cfg);
  if (result.exit_code != kOk) {
    std::cerr << "error: " << result.message << '\n';
    return result.exit_code;
  }
  std::cout << csv_header() << '\n';
  for (const auto& r : result.records) std::cout << csv_row(r) << '\n';
  return kOk;
}
