#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ispcav/harness/commands.hpp"

using namespace ispcav;
using namespace ispcav::harness;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("ispcav_harness_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::vector<std::string> split_args(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

std::string config_key(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<none>";
}

/// Re-runs a record from its echo alone.
std::vector<ExperimentRecord> rerun(const ExperimentRecord& r) {
  return run_command(make_config(r.command, {}, r.params, r.seed)).records;
}

void expect_same_numbers(const ExperimentRecord& a, const ExperimentRecord& b) {
  EXPECT_EQ(csv_row(a), csv_row(b));
  EXPECT_EQ(a.diagnostics, b.diagnostics);
}

}  // namespace

TEST(ParseConfig, DefaultsApplied) {
  const auto cfg = parse_config(split_args("fixpoint --beta 0.1 --h 0 --gamma 0.5 --seed 3"));
  EXPECT_EQ(cfg.count("pop_size"), 100000u);
  EXPECT_EQ(cfg.real("tol"), 2e-3);
  EXPECT_EQ(cfg.seed, 3u);
}

TEST(ParseConfig, FileAndInlineOverride) {
  const auto dir = scratch("config");
  std::ofstream((dir / "c.cfg").string()) << "# fixpoint\nbeta = 0.2\nh = 1\ngamma = 0.5\nseed = 11\npop-size = 5\n";
  // Dashed keys in a file are not rewritten; inline flags are.
  EXPECT_EQ(config_key([&] { parse_config({"fixpoint", "--config", (dir / "c.cfg").string()}); }), "pop-size");
  std::ofstream((dir / "c.cfg").string()) << "beta = 0.2\nh = 1\ngamma = 0.5\nseed = 11\npop_size = 5\n";
  const auto cfg = parse_config({"fixpoint", "--config", (dir / "c.cfg").string(), "--pop-size", "7", "--beta", "0.3"});
  EXPECT_EQ(cfg.count("pop_size"), 7u);
  EXPECT_EQ(cfg.real("beta"), 0.3);
  EXPECT_EQ(cfg.seed, 11u);
  EXPECT_THROW(parse_config({"fixpoint", "--config", (dir / "missing.cfg").string()}), IoError);
}

TEST(ParseConfig, Rejections) {
  EXPECT_EQ(config_key([] { parse_config(split_args("exact --n 3 --gamma 4 --beta 1 --h 0 --seed 1")); }), "gamma");
  EXPECT_EQ(config_key([] { parse_config(split_args("mp-eval --m 0.6,0.3 --beta 1 --h 0 --gamma 1 --seed 1")); }), "m");
  EXPECT_EQ(config_key([] { parse_config(split_args("fixpoint --beta 1 --h 0 --gamma 1 --colour red --seed 1")); }),
            "colour");
  EXPECT_EQ(config_key([] { parse_config(split_args("fixpoint --beta 1 --h 0 --gamma 1")); }), "seed");
  EXPECT_EQ(config_key([] { parse_config(split_args("fixpoint --beta -1 --h 0 --gamma 1 --seed 2")); }), "beta");
  EXPECT_EQ(config_key([] { parse_config(split_args("fixpoint --beta x --h 0 --gamma 1 --seed 2")); }), "beta");
  EXPECT_EQ(config_key([] { parse_config(split_args("fixpoint --beta 1 --gamma 1 --seed 2")); }), "h");
  EXPECT_EQ(config_key([] { parse_config(split_args("bogus --seed 2")); }), "command");
  EXPECT_EQ(config_key([] { parse_config(split_args("isp-curve --gamma 1 --betas 1,1 --hs 1 --seed 2")); }), "betas");
  EXPECT_EQ(config_key([] { parse_config(split_args("mp-eval --m 0.5 --beta 1 --h 0 --gamma 1 --directing x --seed 1")); }),
            "directing");
  EXPECT_EQ(config_key([] { parse_config(split_args("fixpoint --beta 1 --h 0 --gamma 1 --seed -4")); }), "seed");
  EXPECT_EQ(config_key([] { parse_config(split_args("fixpoint --beta 1 --beta 2 --h 0 --gamma 1 --seed 4")); }), "beta");
  EXPECT_EQ(config_key([] { parse_config(split_args("fixpoint --pop-size 0 --beta 1 --h 0 --gamma 1 --seed 4")); }),
            "pop_size");
}

TEST(Report, HeaderPinned) {
  EXPECT_EQ(csv_header(),
            "command,n,beta,h,gamma,pop_size,num_graphs,num_samples,estimate,std_error,C_beta_gamma,converged,"
            "extrapolated,seed,version");
}

TEST(Report, EmptyAndSingleRecord) {
  const auto dir = scratch("report");
  emit_report({}, dir.string());
  {
    std::ifstream is(dir / "records.csv");
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(is, line)) lines.push_back(line);
    EXPECT_EQ(lines, std::vector<std::string>{csv_header()});
  }
  ExperimentRecord r;
  r.command = "exact";
  r.estimate = 0.1 + 0.2;
  r.std_error = 1.0 / 3.0;
  r.beta = 1e-300;
  r.converged = true;
  r.seed = 18446744073709551615ULL;
  r.version = kVersion;
  emit_report({r}, dir.string());
  std::ifstream csv(dir / "records.csv"), json(dir / "records.jsonl");
  std::string line;
  int csv_lines = 0, json_lines = 0;
  while (std::getline(csv, line)) ++csv_lines;
  while (std::getline(json, line)) ++json_lines;
  EXPECT_EQ(csv_lines, 2);
  EXPECT_EQ(json_lines, 1);
}

TEST(Report, CsvJsonRoundTripIsExact) {
  ExperimentRecord r;
  r.command = "rs-free-energy";
  r.n = 18;
  r.beta = 0.1 + 0.2;
  r.h = -1.0 / 7.0;
  r.gamma = 5e-324;
  r.estimate = std::nextafter(1.0, 2.0);
  r.std_error = 1.2345678901234567e-17;
  r.c_beta_gamma = 1.0821;
  r.extrapolated = true;
  r.seed = 99;
  r.version = kVersion;
  std::stringstream ss;
  ss << csv_header() << '\n' << csv_row(r) << '\n';
  const auto rows = parse_csv(ss);
  ASSERT_EQ(rows.size(), 1u);
  const auto parsed = record_from_row(rows[0]);
  const auto back = nlohmann::json::parse(to_json(parsed).dump());
  EXPECT_EQ(back["beta"].get<double>(), *r.beta);
  EXPECT_EQ(back["h"].get<double>(), *r.h);
  EXPECT_EQ(back["gamma"].get<double>(), *r.gamma);
  EXPECT_EQ(back["estimate"].get<double>(), *r.estimate);
  EXPECT_EQ(back["std_error"].get<double>(), *r.std_error);
  EXPECT_EQ(back["C_beta_gamma"].get<double>(), *r.c_beta_gamma);
  EXPECT_EQ(back["n"].get<std::uint64_t>(), 18u);
  EXPECT_TRUE(back["pop_size"].is_null());
  EXPECT_EQ(csv_row(parsed), csv_row(r));
}

TEST(Report, UnwritablePath) {
  EXPECT_THROW(emit_report({}, "/proc/ispcav/nope"), IoError);
  const auto cfg = make_config("gen-graph", {}, {{"n", "5"}, {"gamma", "1"}}, 1, "/proc/ispcav/nope");
  EXPECT_EQ(run_command(cfg).exit_code, kIoError);
}

TEST(RunCommand, ExactOnStoredGraph) {
  const auto dir = scratch("exact");
  save_edge_list((dir / "g.txt").string(), generate_graph(10, 2.0, 4));
  const auto cfg = make_config("exact", {}, {{"graph", (dir / "g.txt").string()}, {"beta", "0"}, {"h", "1"}}, 1,
                               (dir / "out").string());
  const auto res = run_command(cfg);
  ASSERT_EQ(res.exit_code, kOk) << res.message;
  ASSERT_EQ(res.records.size(), 1u);
  EXPECT_NEAR(*res.records[0].estimate, std::log1p(std::exp(1.0)), 1e-15);
  EXPECT_NEAR(*res.records[0].estimate, 1.313262, 1e-6);
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "records.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "records.jsonl"));
}

TEST(RunCommand, ExitCodes) {
  const auto dir = scratch("codes");
  std::vector<Edge> ring;
  for (Vertex i = 0; i < 40; ++i) ring.push_back({i, (i + 1) % 40});
  save_edge_list((dir / "ring.txt").string(), Graph(40, ring));
  auto cfg = make_config("exact", {}, {{"graph", (dir / "ring.txt").string()}, {"beta", "1"}, {"h", "0"}}, 1);
  EXPECT_EQ(run_command(cfg).exit_code, kResourceLimit);
  cfg = make_config("exact", {}, {{"graph", (dir / "none.txt").string()}, {"beta", "1"}, {"h", "0"}}, 1);
  EXPECT_EQ(run_command(cfg).exit_code, kIoError);
  cfg = make_config("cavity-check", {}, {{"n", "5"}, {"gamma", "1"}, {"beta", "1"}, {"h", "0"}, {"vertex", "9"}}, 1);
  EXPECT_EQ(run_command(cfg).exit_code, kParameterError);
  std::ofstream((dir / "bad.txt").string()) << "3 1\n2 1\n";
  cfg = make_config("mis", {}, {{"graph", (dir / "bad.txt").string()}}, 1);
  EXPECT_EQ(run_command(cfg).exit_code, kParameterError);
}

TEST(RunCommand, EveryCommandReproducesFromEcho) {
  const auto dir = scratch("repro");
  save_edge_list((dir / "g.txt").string(), generate_graph(12, 2.0, 4));
  save_measure((dir / "pop.txt").string(), EmpiricalMeasure::uniform_grid(200));
  const std::string g = (dir / "g.txt").string(), pop = (dir / "pop.txt").string();
  const std::vector<std::pair<std::string, KeyValues>> runs{
      {"gen-graph", {{"n", "30"}, {"gamma", "2"}}},
      {"exact", {{"n", "10"}, {"gamma", "1.5"}, {"beta", "0.4"}, {"h", "0.2"}, {"num_graphs", "20"}}},
      {"exact", {{"graph", g}, {"beta", "0.4"}, {"h", "0.2"}}},
      {"mis", {{"graph", g}}},
      {"mis", {{"n", "16"}, {"gamma", "2"}, {"num_graphs", "10"}}},
      {"cavity-check", {{"graph", g}, {"beta", "1.5"}, {"h", "-0.5"}}},
      {"fixpoint", {{"beta", "0.1"}, {"h", "0"}, {"gamma", "0.5"}, {"pop_size", "2000"}, {"init", "zero"}}},
      {"rs-free-energy", {{"beta", "0.1"}, {"h", "0"}, {"gamma", "0.5"}, {"pop_size", "2000"}, {"num_samples", "3000"}}},
      {"rs-free-energy", {{"beta", "0.1"}, {"h", "0"}, {"gamma", "0.5"}, {"population", pop}, {"num_samples", "3000"}}},
      {"contraction-check", {{"beta", "0.1"}, {"gamma", "0.5"}, {"num_pairs", "5"}, {"pop_size", "500"}}},
      {"isp-curve", {{"gamma", "0.5"}, {"betas", "0.5,1"}, {"hs", "1,2"}, {"pop_size", "1000"}, {"num_samples", "1000"}}},
      {"mp-eval", {{"beta", "0.1"}, {"h", "0"}, {"gamma", "0.5"}, {"m", "0.5"}, {"pop_size", "2000"}, {"num_outer", "300"}}},
      {"mp-eval", {{"beta", "0.5"}, {"h", "0"}, {"gamma", "1"}, {"m", "0.3,0.7"}, {"truncation", "4"},
                   {"directing", "file:" + pop}, {"num_outer", "300"}}},
      {"mp-eval", {{"beta", "0.5"}, {"h", "0"}, {"gamma", "1"}, {"m", "0.5"}, {"directing", "tree"},
                   {"tree_weights", "0.25,0.75"}, {"tree_leaves", "0.2,file:" + pop}, {"num_outer", "300"}}},
      {"mp-eval", {{"beta", "0.5"}, {"h", "0"}, {"gamma", "1"}, {"m", "0.5"}, {"directing", "point:0.3"},
                   {"num_outer", "100"}}},
      {"residual", {{"n", "8"}, {"beta", "0.1"}, {"h", "0"}, {"gamma", "0.5"}, {"m", "0.5"}, {"pop_size", "2000"},
                    {"num_graphs", "30"}, {"num_outer", "300"}}},
      {"sweep", {{"ns", "6,8"}, {"beta", "0.1"}, {"h", "0"}, {"gamma", "0.5"}, {"num_graphs", "20"},
                 {"num_samples", "2000"}, {"pop_size", "2000"}}},
  };
  for (const auto& [command, values] : runs) {
    SCOPED_TRACE(command);
    const auto first = run_command(make_config(command, {}, values, 2024));
    ASSERT_EQ(first.exit_code, kOk) << first.message;
    ASSERT_FALSE(first.records.empty());
    for (const auto& record : first.records) {
      EXPECT_EQ(record.seed, 2024u);
      EXPECT_EQ(record.version, kVersion);
      const auto again = rerun(record);
      // isp-curve and sweep rows each map back to a single-row invocation.
      ASSERT_EQ(again.size(), 1u);
      expect_same_numbers(record, again[0]);
    }
  }
}

TEST(RunCommand, SweepRsVsExact) {
  const auto cfg = make_config("sweep", {},
                               {{"ns", "8,12,16"}, {"beta", "0.1"}, {"h", "0"}, {"gamma", "0.5"}, {"num_graphs", "50"},
                                {"num_samples", "5000"}, {"pop_size", "5000"}},
                               7);
  const auto res = run_command(cfg);
  ASSERT_EQ(res.exit_code, kOk) << res.message;
  ASSERT_EQ(res.records.size(), 4u);
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(res.records[k].command, "exact");
    EXPECT_EQ(res.records[k].params.at("beta"), "0.1");
  }
  EXPECT_EQ(*res.records[2].n, 16u);
  EXPECT_EQ(res.records[3].command, "rs-free-energy");
  EXPECT_EQ(res.records[3].params.at("gamma"), "0.5");
  for (const auto& r : res.records) EXPECT_TRUE(*r.extrapolated);
}

TEST(RunCommand, ExtrapolatedCellsFlagged) {
  const auto cfg = make_config(
      "isp-curve", {}, {{"gamma", "0.3"}, {"betas", "0.01,2"}, {"hs", "1"}, {"pop_size", "500"}, {"num_samples", "500"}},
      3);
  const auto res = run_command(cfg);
  ASSERT_EQ(res.records.size(), 2u);
  EXPECT_FALSE(*res.records[0].extrapolated);
  EXPECT_TRUE(*res.records[1].extrapolated);
  for (const auto& r : res.records) EXPECT_EQ(*r.extrapolated, !(*r.c_beta_gamma < 1.0));
}

TEST(RunCommand, FixpointCheckpointWritten) {
  const auto dir = scratch("fixpoint");
  const auto cfg = make_config("fixpoint", {}, {{"beta", "0.1"}, {"h", "0"}, {"gamma", "0.5"}, {"pop_size", "1000"}}, 5,
                               dir.string());
  ASSERT_EQ(run_command(cfg).exit_code, kOk);
  EXPECT_EQ(load_measure((dir / "population.txt").string()).size(), 1000u);
  EXPECT_EQ(load_fixpoint_metadata((dir / "population.meta").string()).seed, 5u);
}
