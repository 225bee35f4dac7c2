#ifndef EMSCREEN_CLI_HPP
#define EMSCREEN_CLI_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "emscreen/screening.hpp"

namespace emscreen {

enum class Command { screen, simulate, bench, null_calibrate };
enum class InputFormat { csv, mtx };

struct RunConfig {
  Command command = Command::screen;
  std::string input_path;
  std::string output_path;
  InputFormat format = InputFormat::csv;
  FamilyKind family = FamilyKind::negbin;
  int G = 5;
  int K = 100;
  double lambda = 1e-5;
  int initials = 3;
  int inner_starts = 3;
  double vartheta = 0.35;
  double fdr = 0.01;
  PvalueMethod pvalue_method = PvalueMethod::chisq;
  int n_mc = 10000;
  int threads = 0;  // 0: EMSCREEN_THREADS env or hardware concurrency
  std::uint64_t seed = 1;
  bool transpose = false;
  long long downsample = -1;   // < 0: off
  std::string batch_col;       // empty: off
  // simulate / bench
  std::string case_id = "nb-med-high";
  std::size_t p = 500;
  std::size_t n = 1000;
  int reps = 20;
  // null-calibrate
  std::size_t features = 2000;
  std::vector<double> theta0 = {3.0};

  void validate() const;
};

// CSV: header row of feature names, one sample per row (transpose flips).
// MatrixMarket coordinate: rows are features, columns samples (transpose
// flips). Count families reject negative or non-integer cells with their
// coordinates.
DataMatrix ingest(const std::string& path, InputFormat format, bool transpose, DataKind kind);

// Executes the command; writes outputs atomically (temp file + rename).
// Returns 0 on success, 2 on input errors, 3 on internal failure.
int run_command(const RunConfig& config);

int resolve_threads(int requested);

}  // namespace emscreen

#endif
