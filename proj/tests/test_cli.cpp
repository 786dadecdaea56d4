#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include <json.hpp>

#include "hamexp/mc.hpp"

#ifndef HAMEXPAND_BIN
#error "HAMEXPAND_BIN must point at the CLI binary"
#endif

using nlohmann::json;

namespace {

constexpr double kP1Plus = 2.14845415473780757938;
constexpr double kC2Sigma02 = 0.34604010394301191718;

int run_cli(const std::string& args) {
  const std::string cmd = std::string(HAMEXPAND_BIN) + " " + args;
  const int status = std::system(cmd.c_str());
  if (status < 0) return -1;
  return WEXITSTATUS(status);
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  REQUIRE(f.good());
  f << text;
}

json read_json(const std::string& path) {
  std::ifstream f(path);
  REQUIRE(f.good());
  return json::parse(f);
}

struct TempFile {
  std::string path;
  explicit TempFile(std::string p) : path(std::move(p)) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("blackscholes command", "[cli]") {
  TempFile out("cli_bs_out.json");
  REQUIRE(run_cli("blackscholes --sigma 1 --T 1 --output " + out.path) == 0);
  const json j = read_json(out.path);
  CHECK(j["c1"].get<double>() == Catch::Approx(0.5).margin(1e-14));
  CHECK(j["c2"].get<double>() == Catch::Approx(-0.5).margin(1e-14));
  CHECK(j["theta"].get<int>() == 1);
}

TEST_CASE("steinstein command reproduces the baseline constants", "[cli]") {
  TempFile cfg("cli_ss_cfg.json");
  TempFile out("cli_ss_out.json");
  write_file(cfg.path, R"({"b": 0, "c": 1, "rho": 0, "sigma0": 0.2, "T": 1})");
  REQUIRE(run_cli("steinstein --config " + cfg.path + " --output " + out.path) == 0);
  const json j = read_json(out.path);
  CHECK(j["c1"].get<double>() == Catch::Approx(kP1Plus).epsilon(1e-12));
  CHECK(j["c2"].get<double>() == Catch::Approx(kC2Sigma02).epsilon(1e-12));
  CHECK(j["theta"].get<int>() == 2);
  CHECK(j["branch_roots"].size() >= 1);
}

TEST_CASE("flag overrides beat config values", "[cli]") {
  TempFile cfg("cli_ov_cfg.json");
  TempFile out("cli_ov_out.json");
  write_file(cfg.path, R"({"sigma": 1, "T": 1})");
  REQUIRE(run_cli("blackscholes --config " + cfg.path + " --sigma 2 --output " + out.path) == 0);
  CHECK(read_json(out.path)["c1"].get<double>() == Catch::Approx(0.125).margin(1e-14));
}

TEST_CASE("expand agrees with the closed-form catalog", "[cli][slow]") {
  TempFile cfg("cli_expand_cfg.json");
  TempFile out("cli_expand_out.json");
  write_file(cfg.path, R"({
    "model": {"name": "stein_stein", "b": 0, "c": 1, "rho": 0, "sigma0": 0.2},
    "T": 1, "target": 1
  })");
  REQUIRE(run_cli("expand --config " + cfg.path + " --output " + out.path) == 0);
  const json j = read_json(out.path);
  CHECK(std::abs(j["c1"].get<double>() - kP1Plus) < 1e-6 * kP1Plus);
  CHECK(std::abs(j["c2"].get<double>() - kC2Sigma02) < 1e-6 * (1.0 + kC2Sigma02));
  CHECK(j["diagnostics"]["minimizer_count"].get<int>() == 2);
  CHECK_FALSE(j["diagnostics"]["hypotheses_unverified"].get<bool>());
  CHECK(j["search"]["starts"].get<int>() > 0);
}

TEST_CASE("invalid configs exit with code 2", "[cli]") {
  TempFile cfg("cli_bad_cfg.json");
  SECTION("missing required key") {
    write_file(cfg.path, R"({"b": 0})");  // no "c"
    CHECK(run_cli("steinstein --config " + cfg.path + " > /dev/null 2>&1") == 2);
  }
  SECTION("malformed JSON") {
    write_file(cfg.path, "{not json");
    CHECK(run_cli("steinstein --config " + cfg.path + " > /dev/null 2>&1") == 2);
  }
  SECTION("unsupported correlation sign") {
    write_file(cfg.path, R"({"c": 1, "rho": 0.5})");
    CHECK(run_cli("steinstein --config " + cfg.path + " > /dev/null 2>&1") == 2);
  }
  SECTION("unknown subcommand") {
    CHECK(run_cli("frobnicate > /dev/null 2>&1") == 2);
  }
}

TEST_CASE("smile command", "[cli]") {
  TempFile out("cli_smile_out.json");
  REQUIRE(run_cli("smile --b1 3 --b2 0 --output " + out.path) == 0);
  const json j = read_json(out.path);
  const double expected = std::sqrt(2.0) * (std::sqrt(2.0) - 1.0);
  CHECK(j["beta1"].get<double>() == Catch::Approx(expected).margin(1e-12));
  CHECK(j["beta2"].get<double>() == 0.0);
  CHECK(run_cli("smile --b1 1.5 > /dev/null 2>&1") == 2);
}

TEST_CASE("mc command is deterministic and writes samples", "[cli]") {
  TempFile cfg("cli_mc_cfg.json");
  TempFile out("cli_mc_out.json");
  TempFile bin_a("cli_mc_a.bin");
  TempFile bin_b("cli_mc_b.bin");
  write_file(cfg.path, R"({
    "model": {"name": "stein_stein", "b": 0, "c": 1, "sigma0": 0.2},
    "T": 1, "n_paths": 5000, "n_steps": 20, "seed": 99,
    "samples_path": ")" + bin_a.path + R"("
  })");
  REQUIRE(run_cli("mc --config " + cfg.path + " --output " + out.path) == 0);
  write_file(cfg.path, R"({
    "model": {"name": "stein_stein", "b": 0, "c": 1, "sigma0": 0.2},
    "T": 1, "n_paths": 5000, "n_steps": 20, "seed": 99,
    "samples_path": ")" + bin_b.path + R"("
  })");
  REQUIRE(run_cli("mc --config " + cfg.path + " --threads 3 --output " + out.path) == 0);
  const auto a = hamexp::read_samples_binary(bin_a.path);
  const auto b = hamexp::read_samples_binary(bin_b.path);
  REQUIRE(a.size() == 5000);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i] == b[i]);
}

TEST_CASE("sweep command emits a verdict table", "[cli][slow]") {
  TempFile cfg("cli_sweep_cfg.json");
  TempFile out("cli_sweep_out.csv");
  write_file(cfg.path, R"({
    "grid": {"b": [0], "c": [1], "rho": [0], "T": [1]},
    "sigma0": 0.2, "target": 1
  })");
  REQUIRE(run_cli("sweep --config " + cfg.path + " --output " + out.path) == 0);
  std::ifstream f(out.path);
  std::string header, row;
  std::getline(f, header);
  std::getline(f, row);
  CHECK(header == "b,c,rho,T,determinant,normalized_det,verdict");
  CHECK(row.find("nonfocal") != std::string::npos);
}
