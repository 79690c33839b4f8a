#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>

#include "nfrems/config.hpp"
#include "nfrems/error.hpp"
#include "nfrems/io/csv.hpp"
#include "nfrems/io/nfop.hpp"
#include "nfrems/io/text.hpp"
#include "nfrems/scenario.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidationFailed = 1;
constexpr int kError = 2;

int run(nfrems::ScenarioConfig cfg, const std::string& out_dir) {
  const nfrems::ResultSet rs = nfrems::run_scenario(cfg);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw nfrems::Error(nfrems::ErrorCode::IoError, "cannot create " + out_dir + ": " + ec.message());
  const std::filesystem::path dir(out_dir);
  nfrems::io::emit_csv(rs, (dir / "result.csv").string());
  nfrems::io::write_file((dir / "metadata.json").string(), nfrems::metadata_json(rs, cfg).dump(2) + "\n");
  std::cout << rs.rows.size() << " rows written to " << (dir / "result.csv").string() << '\n';
  return kOk;
}

int validate(const std::string& path) {
  nfrems::set_warning_handler(nullptr);  // the report below covers both checks
  const nfrems::RadiatingStructureOperator op = nfrems::io::read_nfop(path);
  const auto pr = nfrems::check_passivity(op.s_rr, nfrems::io::kIngestPassivityTol);
  const auto rr = nfrems::check_reciprocity(op.s_rr, nfrems::io::kIngestReciprocityTol);
  std::cout << "operator: M=" << op.ports() << " P=" << op.excitations() << " K=" << op.grid.size()
            << " f=" << nfrems::io::fmt_g17(op.f.hz()) << " Hz\n"
            << "passivity: " << (pr.passed ? "PASS" : "FAIL") << " (max eig S^H S = "
            << nfrems::io::fmt_g17(pr.max_eigenvalue) << ", tol " << pr.tol << ")\n"
            << "reciprocity: " << (rr.passed ? "PASS" : "WARN") << " (relative asymmetry "
            << nfrems::io::fmt_g17(rr.relative_asymmetry) << ", tol " << rr.tol << ")\n";
  return pr.passed ? kOk : kValidationFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Near-field models for reconfigurable electromagnetic structures"};
  app.require_subcommand(1);

  std::string config, out_dir, axis, op_path, gen_out;
  int scenario = 0;

  auto* run_cmd = app.add_subcommand("run", "Run a scenario configuration");
  run_cmd->add_option("--config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out_dir, "Output directory")->required();

  auto* sweep_cmd = app.add_subcommand("sweep", "Run a scenario over a default sweep of the given axis");
  sweep_cmd->add_option("--axis", axis, "Sweep axis")->required()->check(
      CLI::IsMember({"distance", "angle", "frequency", "grid2d"}));
  sweep_cmd->add_option("--config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--out", out_dir, "Output directory")->required();

  auto* val_cmd = app.add_subcommand("validate", "Passivity and reciprocity report for an NFOP-CSV operator");
  val_cmd->add_option("--operator", op_path, "Operator file")->required();

  auto* gen_cmd = app.add_subcommand("gen-config", "Print a reference scenario configuration");
  gen_cmd->add_option("--scenario", scenario, "Scenario number")->required()->check(CLI::Range(1, 3));
  gen_cmd->add_option("--out", gen_out, "Write to this file instead of standard output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kError;
  }

  try {
    if (*run_cmd) return run(nfrems::load_config(config), out_dir);
    if (*sweep_cmd) {
      nfrems::ScenarioConfig cfg = nfrems::load_config(config);
      cfg.sweep = nfrems::default_sweep(cfg, nfrems::parse_axis(axis));
      return run(cfg, out_dir);
    }
    if (*val_cmd) return validate(op_path);
    if (*gen_cmd) {
      const std::string text = nfrems::config_to_json(nfrems::scenario_template(scenario)).dump(2) + "\n";
      if (gen_out.empty()) {
        std::cout << text;
      } else {
        nfrems::io::write_file(gen_out, text);
      }
      return kOk;
    }
  } catch (const nfrems::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}
