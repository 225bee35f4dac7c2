#include <CLI11.hpp>

#include "emscreen/cli.hpp"

using emscreen::Command;
using emscreen::FamilyKind;
using emscreen::InputFormat;
using emscreen::PvalueMethod;
using emscreen::RunConfig;

int main(int argc, char** argv) {
  CLI::App app{"EM-test feature screening for clustering"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string family_str = "negbin";
  std::string format_str = "csv";
  std::string pvalue_str = "chisq";

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--family", family_str, "Distribution family")
        ->check(CLI::IsMember({"poisson", "negbin", "normal"}));
    cmd->add_option("--g", cfg.G, "Number of mixture components");
    cmd->add_option("--k", cfg.K, "Maximum EM updates");
    cmd->add_option("--lambda", cfg.lambda, "Mixing-proportion penalty weight");
    cmd->add_option("--initials", cfg.initials, "Number of initial mixing proportions");
    cmd->add_option("--inner-starts", cfg.inner_starts, "Initialization fits per initial");
    cmd->add_option("--vartheta", cfg.vartheta, "Threshold exponent: t_n = n^vartheta");
    cmd->add_option("--fdr", cfg.fdr, "BH-adjusted p-value cutoff");
    cmd->add_option("--seed", cfg.seed, "RNG seed");
    cmd->add_option("--threads", cfg.threads,
                    "Worker threads (0: EMSCREEN_THREADS or hardware)");
  };

  CLI::App* screen = app.add_subcommand("screen", "Screen features of a data matrix");
  screen->add_option("--input", cfg.input_path, "Input matrix path")->required();
  screen->add_option("--output", cfg.output_path, "Report JSON path")->required();
  screen->add_option("--format", format_str, "csv (samples as rows) or mtx (features as rows)")
      ->check(CLI::IsMember({"csv", "mtx"}));
  screen->add_flag("--transpose", cfg.transpose, "Flip the format's default orientation");
  screen->add_option("--pvalue-method", pvalue_str, "chisq bound or montecarlo limiting law")
      ->check(CLI::IsMember({"chisq", "montecarlo"}));
  screen->add_option("--n-mc", cfg.n_mc, "Monte-Carlo draws for the limiting law");
  screen->add_option("--downsample", cfg.downsample,
                     "Thin every sample to this total count before screening");
  screen->add_option("--batch-col", cfg.batch_col,
                     "Feature column holding integer batch ids; p-values are combined "
                     "across batches");
  add_common(screen);

  CLI::App* simulate = app.add_subcommand("simulate", "Generate a benchmark dataset");
  simulate->add_option("--case", cfg.case_id,
                       "nb-{low,med,high}-{low,high} or normal-{balanced,unbalanced}");
  simulate->add_option("--p", cfg.p, "Number of features");
  simulate->add_option("--n", cfg.n, "Number of samples");
  simulate->add_option("--output", cfg.output_path, "Output path prefix")->required();
  simulate->add_option("--seed", cfg.seed, "RNG seed");

  CLI::App* bench = app.add_subcommand("bench", "Replicate generate + screen + cluster");
  bench->add_option("--case", cfg.case_id, "Scenario id (see simulate)");
  bench->add_option("--p", cfg.p, "Number of features");
  bench->add_option("--n", cfg.n, "Number of samples");
  bench->add_option("--reps", cfg.reps, "Number of replications");
  bench->add_option("--output", cfg.output_path, "Output path prefix")->required();
  add_common(bench);

  CLI::App* nullcal = app.add_subcommand("null-calibrate",
                                         "Empirical type-I error on homogeneous features");
  nullcal->add_option("--features", cfg.features, "Number of homogeneous features");
  nullcal->add_option("--n", cfg.n, "Samples per feature");
  nullcal->add_option("--theta0", cfg.theta0, "Family parameters of the null model");
  nullcal->add_option("--output", cfg.output_path, "Output JSON path")->required();
  add_common(nullcal);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  cfg.family = emscreen::family_from_name(family_str);
  cfg.format = format_str == "csv" ? InputFormat::csv : InputFormat::mtx;
  cfg.pvalue_method = pvalue_str == "chisq" ? PvalueMethod::chisq : PvalueMethod::montecarlo;
  if (screen->parsed()) cfg.command = Command::screen;
  else if (simulate->parsed()) cfg.command = Command::simulate;
  else if (bench->parsed()) cfg.command = Command::bench;
  else cfg.command = Command::null_calibrate;

  // Benchmark generators key the family off the case id.
  if (cfg.command == Command::simulate || cfg.command == Command::bench) {
    cfg.family = cfg.case_id.rfind("normal", 0) == 0 ? FamilyKind::normal
                                                      : FamilyKind::negbin;
  }
  return emscreen::run_command(cfg);
}
