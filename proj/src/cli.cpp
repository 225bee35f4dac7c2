#include "emscreen/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "emscreen/asymptotics.hpp"
#include "emscreen/evalmetrics.hpp"
#include "emscreen/rng.hpp"
#include "emscreen/simulate.hpp"

namespace emscreen {

namespace {

using nlohmann::json;

// Parse failure of user input; mapped to exit code 2.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string format_cell(double x, DataKind kind) {
  if (kind == DataKind::count) {
    return std::to_string(static_cast<long long>(x));
  }
  return format_double(x);
}

double parse_cell(const std::string& cell, std::size_t line, const std::string& column) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(v)) {
    throw InputError("cannot parse numeric cell '" + cell + "' at row " +
                     std::to_string(line) + ", column " + column);
  }
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(cur);
  for (std::string& s : cells) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.pop_back();
  }
  return cells;
}

DataMatrix ingest_csv(const std::string& path, bool transpose, DataKind kind) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open input file " + path);
  std::string line;
  if (!std::getline(in, line)) throw InputError(path + ": empty file");
  const std::vector<std::string> header = split_csv_line(line);
  const std::size_t ncols = header.size();
  if (ncols == 0) throw InputError(path + ": empty header");

  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != ncols) {
      throw InputError(path + ": row " + std::to_string(lineno) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(ncols));
    }
    std::vector<double> row(ncols);
    for (std::size_t c = 0; c < ncols; ++c) {
      row[c] = parse_cell(cells[c], lineno, header[c]);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError(path + ": no data rows");

  DataMatrix m;
  m.kind = kind;
  if (!transpose) {
    // samples as rows (CSV default)
    m.n = rows.size();
    m.p = ncols;
    m.feature_names = header;
    m.values.resize(m.n * m.p);
    for (std::size_t i = 0; i < m.n; ++i) {
      for (std::size_t j = 0; j < m.p; ++j) m.values[i * m.p + j] = rows[i][j];
    }
  } else {
    // header names the samples; rows are features
    m.n = ncols;
    m.p = rows.size();
    m.feature_names.resize(m.p);
    for (std::size_t j = 0; j < m.p; ++j) m.feature_names[j] = "f" + std::to_string(j + 1);
    m.values.resize(m.n * m.p);
    for (std::size_t j = 0; j < m.p; ++j) {
      for (std::size_t i = 0; i < m.n; ++i) m.values[i * m.p + j] = rows[j][i];
    }
  }
  return m;
}

DataMatrix ingest_mtx(const std::string& path, bool transpose, DataKind kind) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open input file " + path);
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw InputError(path + ": empty file");
  ++lineno;
  if (line.rfind("%%MatrixMarket", 0) != 0 || line.find("coordinate") == std::string::npos)
    throw InputError(path + ": expected a MatrixMarket coordinate header");
  // skip comments
  std::size_t R = 0, C = 0, nnz = 0;
  for (;;) {
    if (!std::getline(in, line)) throw InputError(path + ": missing size line");
    ++lineno;
    if (!line.empty() && line[0] == '%') continue;
    std::istringstream ss(line);
    if (!(ss >> R >> C >> nnz))
      throw InputError(path + ": cannot parse size line at line " + std::to_string(lineno));
    break;
  }
  // rows are features unless transposed
  DataMatrix m;
  m.kind = kind;
  m.n = transpose ? R : C;
  m.p = transpose ? C : R;
  m.values.assign(m.n * m.p, 0.0);
  m.feature_names.resize(m.p);
  for (std::size_t j = 0; j < m.p; ++j) m.feature_names[j] = "f" + std::to_string(j + 1);
  for (std::size_t k = 0; k < nnz; ++k) {
    if (!std::getline(in, line))
      throw InputError(path + ": expected " + std::to_string(nnz) + " entries, file ended at line " +
                       std::to_string(lineno));
    ++lineno;
    if (line.empty()) {
      --k;
      continue;
    }
    std::istringstream ss(line);
    std::size_t r = 0, c = 0;
    double v = 0.0;
    if (!(ss >> r >> c >> v) || r == 0 || c == 0 || r > R || c > C)
      throw InputError(path + ": bad entry at line " + std::to_string(lineno));
    const std::size_t i = transpose ? r - 1 : c - 1;
    const std::size_t j = transpose ? c - 1 : r - 1;
    m.values[i * m.p + j] = v;
  }
  return m;
}

void check_counts(const DataMatrix& m) {
  if (m.kind != DataKind::count) return;
  for (std::size_t i = 0; i < m.n; ++i) {
    for (std::size_t j = 0; j < m.p; ++j) {
      const double x = m.at(i, j);
      if (x < 0.0 || std::floor(x) != x || !std::isfinite(x)) {
        const std::string name = m.feature_names.empty() ? std::to_string(j + 1)
                                                         : m.feature_names[j];
        throw InputError("non-count value " + format_double(x) + " at sample " +
                         std::to_string(i + 1) + ", feature " + name);
      }
    }
  }
}

// Writes content to path atomically (temp file in the same directory, then
// rename) so failed runs leave nothing behind.
void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open output file " + tmp.string());
    out << content;
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw std::runtime_error("failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot move " + tmp.string() + " to " + path);
  }
}

json config_echo(const RunConfig& cfg) {
  json j;
  switch (cfg.command) {
    case Command::screen: j["command"] = "screen"; break;
    case Command::simulate: j["command"] = "simulate"; break;
    case Command::bench: j["command"] = "bench"; break;
    case Command::null_calibrate: j["command"] = "null-calibrate"; break;
  }
  j["family"] = family_name(cfg.family);
  j["G"] = cfg.G;
  j["K"] = cfg.K;
  j["lambda"] = cfg.lambda;
  j["initials"] = cfg.initials;
  j["inner_starts"] = cfg.inner_starts;
  j["vartheta"] = cfg.vartheta;
  j["fdr"] = cfg.fdr;
  j["pvalue_method"] = cfg.pvalue_method == PvalueMethod::chisq ? "chisq" : "montecarlo";
  j["n_mc"] = cfg.n_mc;
  j["seed"] = cfg.seed;
  if (!cfg.input_path.empty()) j["input"] = cfg.input_path;
  if (cfg.command == Command::simulate || cfg.command == Command::bench) {
    j["case"] = cfg.case_id;
    j["p"] = cfg.p;
    j["n"] = cfg.n;
  }
  if (cfg.command == Command::bench) j["reps"] = cfg.reps;
  if (cfg.command == Command::null_calibrate) {
    j["features"] = cfg.features;
    j["n"] = cfg.n;
    j["theta0"] = cfg.theta0;
  }
  if (cfg.downsample >= 0) j["downsample"] = cfg.downsample;
  if (!cfg.batch_col.empty()) j["batch_col"] = cfg.batch_col;
  if (cfg.command == Command::screen) {
    j["format"] = cfg.format == InputFormat::csv ? "csv" : "mtx";
    j["transpose"] = cfg.transpose;
  }
  return j;
}

EmConfig make_em_config(const RunConfig& cfg) {
  EmConfig em;
  em.G = cfg.G;
  em.K = cfg.K;
  em.lambda = cfg.lambda;
  em.inner_starts = cfg.inner_starts;
  em.seed = cfg.seed;
  em.initials = default_initials(cfg.G, cfg.initials, cfg.seed);
  return em;
}

json report_to_json(const ScreenReport& report, const DataMatrix& data, const RunConfig& cfg) {
  json j;
  j["config"] = config_echo(cfg);
  j["config"]["t_n"] = report.t_n;
  json feats = json::array();
  for (std::size_t jdx = 0; jdx < report.per_feature.size(); ++jdx) {
    const FeatureResult& f = report.per_feature[jdx];
    json e;
    e["index"] = jdx + 1;
    e["name"] = data.feature_names.empty() ? "f" + std::to_string(jdx + 1)
                                           : data.feature_names[jdx];
    e["statistic"] = f.statistic;
    e["pvalue"] = f.pvalue;
    e["pvalue_adjusted"] = f.pvalue_adjusted;
    e["flag"] = f.boundary_flag;
    feats.push_back(e);
  }
  j["per_feature"] = feats;
  j["selected_threshold"] = report.selected_threshold;
  j["selected_fdr"] = report.selected_fdr;
  return j;
}

// Splits out the batch column and returns per-batch row index lists in
// ascending batch id order.
std::vector<std::vector<std::size_t>> batch_groups(const DataMatrix& data, std::size_t col) {
  std::map<long long, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < data.n; ++i) {
    const double v = data.at(i, col);
    if (std::floor(v) != v)
      throw InputError("batch column must hold integers; sample " + std::to_string(i + 1));
    groups[static_cast<long long>(v)].push_back(i);
  }
  std::vector<std::vector<std::size_t>> out;
  for (auto& [id, rows] : groups) out.push_back(std::move(rows));
  return out;
}

DataMatrix drop_column(const DataMatrix& data, std::size_t col) {
  DataMatrix out;
  out.n = data.n;
  out.p = data.p - 1;
  out.kind = data.kind;
  out.values.resize(out.n * out.p);
  for (std::size_t j = 0; j < data.p; ++j) {
    if (j == col) continue;
    const std::size_t jj = j < col ? j : j - 1;
    for (std::size_t i = 0; i < data.n; ++i) out.values[i * out.p + jj] = data.at(i, j);
    if (!data.feature_names.empty()) out.feature_names.push_back(data.feature_names[j]);
  }
  return out;
}

DataMatrix take_rows(const DataMatrix& data, const std::vector<std::size_t>& rows) {
  DataMatrix out;
  out.n = rows.size();
  out.p = data.p;
  out.kind = data.kind;
  out.feature_names = data.feature_names;
  out.values.resize(out.n * out.p);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < data.p; ++j) out.values[i * out.p + j] = data.at(rows[i], j);
  }
  return out;
}

int cmd_screen(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  DataMatrix data = ingest(cfg.input_path, cfg.format, cfg.transpose,
                           FamilySpec(cfg.family).is_count() ? DataKind::count
                                                             : DataKind::continuous);

  std::size_t batch_col_idx = data.p;
  if (!cfg.batch_col.empty()) {
    for (std::size_t j = 0; j < data.p; ++j) {
      if (!data.feature_names.empty() && data.feature_names[j] == cfg.batch_col) {
        batch_col_idx = j;
        break;
      }
    }
    if (batch_col_idx == data.p)
      throw InputError("batch column '" + cfg.batch_col + "' not found");
  }

  if (cfg.downsample >= 0) {
    DataMatrix counts_only = batch_col_idx < data.p ? drop_column(data, batch_col_idx) : data;
    DataMatrix thinned = downsample_counts(counts_only, cfg.downsample, cfg.seed);
    if (batch_col_idx < data.p) {
      // re-attach the batch column at its old position
      DataMatrix merged = data;
      for (std::size_t j = 0, jj = 0; j < data.p; ++j) {
        if (j == batch_col_idx) continue;
        for (std::size_t i = 0; i < data.n; ++i) merged.at(i, j) = thinned.at(i, jj);
        ++jj;
      }
      data = std::move(merged);
    } else {
      data = std::move(thinned);
    }
  }

  const FamilySpec family(cfg.family);
  const EmConfig em = make_em_config(cfg);
  const int threads = resolve_threads(cfg.threads);

  ScreenReport report;
  DataMatrix features = data;
  if (batch_col_idx < data.p) {
    const auto groups = batch_groups(data, batch_col_idx);
    features = drop_column(data, batch_col_idx);
    std::vector<std::vector<double>> pvalue_rows;
    std::vector<ScreenReport> parts;
    for (std::size_t b = 0; b < groups.size(); ++b) {
      DataMatrix sub = take_rows(features, groups[b]);
      EmConfig em_b = em;
      em_b.seed = Rng::mix(cfg.seed) ^ Rng::mix(0xBA7C4ULL + b);
      parts.push_back(screen(sub, family, em_b, cfg.vartheta, cfg.fdr, cfg.pvalue_method,
                             cfg.n_mc, threads));
      std::vector<double> ps(features.p);
      for (std::size_t j = 0; j < features.p; ++j) ps[j] = parts.back().per_feature[j].pvalue;
      pvalue_rows.push_back(std::move(ps));
    }
    report = parts.front();
    report.selected_threshold.clear();
    report.selected_fdr.clear();
    const std::vector<double> combined = combine_batches(pvalue_rows);
    const std::vector<double> adjusted = bh_adjust(combined);
    for (std::size_t j = 0; j < features.p; ++j) {
      double stat = 0.0;
      bool flag = false;
      for (const ScreenReport& part : parts) {
        stat = std::max(stat, part.per_feature[j].statistic);
        flag = flag || part.per_feature[j].boundary_flag;
      }
      report.per_feature[j].statistic = stat;
      report.per_feature[j].pvalue = combined[j];
      report.per_feature[j].pvalue_adjusted = adjusted[j];
      report.per_feature[j].boundary_flag = flag;
      if (stat >= report.t_n) report.selected_threshold.push_back(j + 1);
      if (adjusted[j] < cfg.fdr) report.selected_fdr.push_back(j + 1);
    }
  } else {
    report = screen(features, family, em, cfg.vartheta, cfg.fdr, cfg.pvalue_method,
                    cfg.n_mc, threads);
  }

  const json j = report_to_json(report, features, cfg);
  write_file_atomic(cfg.output_path, j.dump(2) + "\n");
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "screen: " << features.p << " features, " << features.n << " samples, "
            << report.selected_fdr.size() << " selected by FDR, "
            << report.selected_threshold.size() << " by threshold; wallclock " << secs
            << " s\n";
  return 0;
}

int cmd_simulate(const RunConfig& cfg) {
  const SimScenario sc = SimScenario::from_case_id(cfg.case_id, cfg.p, cfg.n, cfg.seed);
  const SimDataset ds = generate(sc);

  std::string data_csv;
  for (std::size_t j = 0; j < ds.data.p; ++j) {
    if (j) data_csv += ',';
    data_csv += ds.data.feature_names[j];
  }
  data_csv += '\n';
  for (std::size_t i = 0; i < ds.data.n; ++i) {
    for (std::size_t j = 0; j < ds.data.p; ++j) {
      if (j) data_csv += ',';
      data_csv += format_cell(ds.data.at(i, j), ds.data.kind);
    }
    data_csv += '\n';
  }

  std::string labels_csv = "label\n";
  for (int g : ds.labels) labels_csv += std::to_string(g) + "\n";

  json truth;
  truth["config"] = config_echo(cfg);
  truth["case"] = sc.case_id();
  truth["alpha"] = sc.alpha_true();
  truth["relevant"] = ds.relevant;
  json feats = json::array();
  for (std::size_t j = 0; j < ds.truth.size(); ++j) {
    const FeatureTruth& t = ds.truth[j];
    json e;
    e["index"] = j + 1;
    e[sc.family_kind == FamilyKind::normal ? "sigma" : "r"] = t.r_or_sigma;
    e["u"] = t.u;
    e["D"] = t.D;
    e["elevated"] = t.elevated;
    e["mu"] = t.mu;
    feats.push_back(e);
  }
  truth["features"] = feats;

  write_file_atomic(cfg.output_path + "_data.csv", data_csv);
  write_file_atomic(cfg.output_path + "_labels.csv", labels_csv);
  write_file_atomic(cfg.output_path + "_truth.json", truth.dump(2) + "\n");
  std::cout << "simulate: wrote " << cfg.output_path << "_{data,labels,truth}"
            << " (" << ds.data.n << " x " << ds.data.p << ")\n";
  return 0;
}

int cmd_bench(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const SimScenario sc = SimScenario::from_case_id(cfg.case_id, cfg.p, cfg.n, cfg.seed);
  EmConfig em = make_em_config(cfg);
  const BenchSummary summary =
      bench_case(sc, em, cfg.vartheta, cfg.fdr, cfg.reps, resolve_threads(cfg.threads));

  const auto& names = bench_metric_names();
  std::string csv = "metric,mean,sd\n";
  for (std::size_t k = 0; k < names.size(); ++k) {
    csv += names[k] + "," + format_double(summary.mean[k]) + "," +
           format_double(summary.sd[k]) + "\n";
  }
  json j;
  j["config"] = config_echo(cfg);
  json metrics;
  for (std::size_t k = 0; k < names.size(); ++k) {
    metrics[names[k]] = {{"mean", summary.mean[k]}, {"sd", summary.sd[k]}};
  }
  j["metrics"] = metrics;
  json rows = json::array();
  for (const BenchRow& row : summary.rows) {
    json e;
    for (std::size_t k = 0; k < names.size(); ++k) e[names[k]] = row[k];
    rows.push_back(e);
  }
  j["replications"] = rows;

  write_file_atomic(cfg.output_path + "_summary.csv", csv);
  write_file_atomic(cfg.output_path + "_summary.json", j.dump(2) + "\n");
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "bench " << cfg.case_id << ": " << cfg.reps << " replications; wallclock "
            << secs << " s\n";
  return 0;
}

int cmd_null_calibrate(const RunConfig& cfg) {
  const FamilySpec family(cfg.family);
  Theta theta0;
  if (cfg.theta0.size() != static_cast<std::size_t>(family.dim()))
    throw InputError("null-calibrate: theta0 must have " + std::to_string(family.dim()) +
                     " entries for family " + family_name(cfg.family));
  for (std::size_t h = 0; h < cfg.theta0.size(); ++h) theta0[h] = cfg.theta0[h];
  if (!family.in_bounds(theta0)) throw InputError("null-calibrate: theta0 outside the box");

  const EmConfig em = make_em_config(cfg);
  const int df = family.dim() * (family.dim() + 1) / 2;
  const int threads = resolve_threads(cfg.threads);

  std::vector<double> pvalues(cfg.features);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= cfg.features) break;
      Rng rng = Rng::stream(cfg.seed, 0x0CA1Bu + j);
      std::vector<double> xs(cfg.n);
      for (double& x : xs) {
        switch (family.kind()) {
          case FamilyKind::poisson: x = static_cast<double>(rng.poisson(theta0[0])); break;
          case FamilyKind::negbin: x = static_cast<double>(rng.negbin(theta0[0], theta0[1])); break;
          case FamilyKind::normal: x = theta0[0] + std::sqrt(theta0[1]) * rng.normal(); break;
        }
      }
      EmConfig em_j = em;
      em_j.seed = Rng::mix(cfg.seed) ^ Rng::mix(j);
      const EmTestResult res = em_test_statistic(family, xs, em_j);
      pvalues[j] = pvalue_chisq(res.statistic, df);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  json j;
  j["config"] = config_echo(cfg);
  json table;
  for (double level : {0.10, 0.05, 0.01}) {
    std::size_t hits = 0;
    for (double p : pvalues) {
      if (p < level) ++hits;
    }
    char key[16];
    std::snprintf(key, sizeof(key), "%.2f", level);
    table[key] = static_cast<double>(hits) / static_cast<double>(cfg.features);
  }
  j["rejection_rate"] = table;
  write_file_atomic(cfg.output_path, j.dump(2) + "\n");
  std::cout << "null-calibrate: " << cfg.features << " features done\n";
  return 0;
}

}  // namespace

void RunConfig::validate() const {
  if (output_path.empty()) throw InputError("missing --output path");
  if (command == Command::screen && input_path.empty())
    throw InputError("screen requires --input");
  if (!(vartheta > 0.0 && vartheta < 1.0)) throw InputError("--vartheta must be in (0, 1)");
  if (!(fdr > 0.0 && fdr < 1.0)) throw InputError("--fdr must be in (0, 1)");
  if (!(lambda > 0.0)) throw InputError("--lambda must be > 0");
  if (G < 2) throw InputError("--g must be >= 2");
  if (K < 1) throw InputError("--k must be >= 1");
  if (initials < 1) throw InputError("--initials must be >= 1");
  if (inner_starts < 1) throw InputError("--inner-starts must be >= 1");
  if (pvalue_method == PvalueMethod::montecarlo && n_mc < 1000)
    throw InputError("--n-mc must be >= 1000");
  if (pvalue_method == PvalueMethod::montecarlo && family == FamilyKind::normal)
    throw InputError("the normal family supports only --pvalue-method chisq");
  if (command == Command::simulate || command == Command::bench) {
    SimScenario::from_case_id(case_id, p, n, seed).validate();
  }
  if (command == Command::bench && reps < 1) throw InputError("--reps must be >= 1");
  if (command == Command::null_calibrate && features < 1)
    throw InputError("--features must be >= 1");
}

// `transpose` flips each format's default orientation: CSV rows are samples
// by default, MatrixMarket rows are features by default.
DataMatrix ingest(const std::string& path, InputFormat format, bool transpose, DataKind kind) {
  DataMatrix m = format == InputFormat::csv ? ingest_csv(path, transpose, kind)
                                            : ingest_mtx(path, transpose, kind);
  check_counts(m);
  return m;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("EMSCREEN_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

int run_command(const RunConfig& config) {
  try {
    config.validate();
    switch (config.command) {
      case Command::screen: return cmd_screen(config);
      case Command::simulate: return cmd_simulate(config);
      case Command::bench: return cmd_bench(config);
      case Command::null_calibrate: return cmd_null_calibrate(config);
    }
    return 3;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace emscreen
