#include "ccpd/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <map>
#include <sstream>

#include <omp.h>

#include "json.hpp"

namespace ccpd::bench {

using nlohmann::json;

Preset parse_preset(std::string_view name) {
  if (name == "case1") return Preset::case1;
  if (name == "case2") return Preset::case2;
  if (name == "custom") return Preset::custom;
  throw ConfigError("unknown preset '" + std::string(name) + "' (expected case1, case2 or custom)");
}

std::string_view to_string(Preset p) {
  switch (p) {
    case Preset::case1: return "case1";
    case Preset::case2: return "case2";
    case Preset::custom: return "custom";
  }
  return "custom";
}

void BenchConfig::validate() const {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (snr_grid.empty()) throw ConfigError("snr grid must be nonempty");
  for (double s : snr_grid) {
    if (std::isnan(s) || s == -std::numeric_limits<double>::infinity()) {
      throw ConfigError("snr values must be finite or +inf");
    }
  }
  if (receivers.empty()) throw ConfigError("at least one receive array is required");
  if (transmit.rows < 1 || transmit.cols < 1) throw ConfigError("transmit rows and cols must be >= 1");
  for (std::size_t m = 0; m < receivers.size(); ++m) {
    try {
      receivers[m].axis_x.validate();
      receivers[m].axis_y.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError("receivers[" + std::to_string(m) + "]: " + e.what());
    }
  }
  SceneConfig scene{box, targets, pulses, samples, seed};
  try {
    scene.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

BenchConfig preset_config(Preset p) {
  BenchConfig c;
  c.preset = p;
  const CoprimeAxisSpec axis{4, 7, 4, 4};
  c.transmit = {4, 4, Vec3(0, -8000, 0)};
  for (double x : {-8000.0, 0.0, 8000.0}) c.receivers.push_back({Vec3(x, 8000, 0), axis, axis});
  c.box = {Vec3(-7000, -7000, 4000), Vec3(7000, 7000, 8000)};
  c.targets = 10;
  c.pulses = 15;
  c.samples = 64;
  c.snr_grid = {-6, 0, 6, 12, 20};
  c.trials = 200;
  c.seed = 1;
  if (p == Preset::case2) {
    c.transmit.rows = c.transmit.cols = 7;
    c.targets = 25;
    c.pulses = 20;
  }
  return c;
}

namespace {

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
}

Vec3 read_vec3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(where + ": expected [x, y, z]");
  Vec3 v;
  for (int d = 0; d < 3; ++d) {
    if (!j[static_cast<std::size_t>(d)].is_number()) throw ConfigError(where + ": expected numbers");
    v[d] = j[static_cast<std::size_t>(d)].get<double>();
  }
  return v;
}

std::size_t read_count(const json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw ConfigError(where + ": expected a nonnegative integer");
  }
  return j.get<std::size_t>();
}

int read_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return j.get<int>();
}

CoprimeAxisSpec read_axis(const json& j, const std::string& where) {
  check_keys(j, {"pitch_a", "pitch_b", "len_a", "len_b"}, where);
  for (const char* key : {"pitch_a", "pitch_b", "len_a", "len_b"}) {
    if (!j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  }
  return {read_int(j["pitch_a"], where + ".pitch_a"), read_int(j["pitch_b"], where + ".pitch_b"),
          read_int(j["len_a"], where + ".len_a"), read_int(j["len_b"], where + ".len_b")};
}

double read_snr(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  }
  throw ConfigError(where + ": expected a number or \"inf\"");
}

std::string parse_error_location(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

BenchConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error at " + parse_error_location(text, e.byte) + ": " + e.what());
  }
  check_keys(doc, {"preset", "transmit", "receivers", "scene", "snr_db", "trials", "seed", "output"},
             "config");

  Preset preset = Preset::case1;
  if (doc.contains("preset")) {
    if (!doc["preset"].is_string()) throw ConfigError("preset: expected a string");
    preset = parse_preset(doc["preset"].get<std::string>());
  }
  if (preset == Preset::custom) {
    for (const char* key : {"transmit", "receivers", "scene"}) {
      if (!doc.contains(key)) throw ConfigError(std::string("custom preset requires '") + key + "'");
    }
  }
  BenchConfig c = preset_config(preset == Preset::custom ? Preset::case1 : preset);
  c.preset = preset;

  if (doc.contains("transmit")) {
    const json& t = doc["transmit"];
    check_keys(t, {"rows", "cols", "center"}, "transmit");
    if (t.contains("rows")) c.transmit.rows = read_int(t["rows"], "transmit.rows");
    if (t.contains("cols")) c.transmit.cols = read_int(t["cols"], "transmit.cols");
    if (t.contains("center")) c.transmit.center = read_vec3(t["center"], "transmit.center");
  }
  if (doc.contains("receivers")) {
    const json& rs = doc["receivers"];
    if (!rs.is_array()) throw ConfigError("receivers: expected an array");
    c.receivers.clear();
    for (std::size_t m = 0; m < rs.size(); ++m) {
      const std::string where = "receivers[" + std::to_string(m) + "]";
      check_keys(rs[m], {"center", "axis_x", "axis_y"}, where);
      for (const char* key : {"center", "axis_x", "axis_y"}) {
        if (!rs[m].contains(key)) throw ConfigError(where + ": missing '" + key + "'");
      }
      c.receivers.push_back({read_vec3(rs[m]["center"], where + ".center"),
                             read_axis(rs[m]["axis_x"], where + ".axis_x"),
                             read_axis(rs[m]["axis_y"], where + ".axis_y")});
    }
  }
  if (doc.contains("scene")) {
    const json& s = doc["scene"];
    check_keys(s, {"targets", "pulses", "samples", "box"}, "scene");
    if (preset == Preset::custom) {
      for (const char* key : {"targets", "pulses", "samples", "box"}) {
        if (!s.contains(key)) throw ConfigError(std::string("custom preset requires scene.") + key);
      }
    }
    if (s.contains("targets")) c.targets = read_count(s["targets"], "scene.targets");
    if (s.contains("pulses")) c.pulses = read_count(s["pulses"], "scene.pulses");
    if (s.contains("samples")) c.samples = read_count(s["samples"], "scene.samples");
    if (s.contains("box")) {
      check_keys(s["box"], {"min", "max"}, "scene.box");
      if (!s["box"].contains("min") || !s["box"].contains("max")) {
        throw ConfigError("scene.box: requires 'min' and 'max'");
      }
      c.box = {read_vec3(s["box"]["min"], "scene.box.min"), read_vec3(s["box"]["max"], "scene.box.max")};
    }
  }
  if (doc.contains("snr_db")) {
    const json& g = doc["snr_db"];
    if (!g.is_array()) throw ConfigError("snr_db: expected an array");
    c.snr_grid.clear();
    for (std::size_t i = 0; i < g.size(); ++i) c.snr_grid.push_back(read_snr(g[i], "snr_db[" + std::to_string(i) + "]"));
  }
  if (doc.contains("trials")) c.trials = read_count(doc["trials"], "trials");
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer()) throw ConfigError("seed: expected an integer");
    c.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("output")) {
    if (!doc["output"].is_string()) throw ConfigError("output: expected a string");
    c.output = doc["output"].get<std::string>();
  }
  c.validate();
  return c;
}

BenchConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::vector<double> parse_snr_list(std::string_view text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    std::string_view tok = text.substr(pos, comma - pos);
    while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
    if (tok.empty()) throw ConfigError("snr list: empty entry");
    double v = 0.0;
    if (tok == "inf" || tok == "+inf") {
      v = std::numeric_limits<double>::infinity();
    } else {
      if (tok.front() == '+') tok.remove_prefix(1);
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
        throw ConfigError("snr list: cannot parse '" + std::string(tok) + "'");
      }
    }
    out.push_back(v);
    pos = comma + 1;
  }
  return out;
}

std::uint64_t trial_seed(std::uint64_t master, std::size_t index) {
  return split_seed(master, static_cast<std::uint64_t>(index));
}

double compute_mae(const std::vector<std::vector<DoaEstimate>>& doas,
                   const std::vector<std::vector<Direction>>& truth, const Matching& matching) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t m = 0; m < doas.size(); ++m) {
    for (std::size_t r = 0; r < doas[m].size(); ++r) {
      const Vec3& est = doas[m][r].direction.vec();
      const Vec3& ref = truth.at(m).at(matching.truth_of.at(r)).vec();
      sum += std::atan2(est.cross(ref).norm(), est.dot(ref));
      ++count;
    }
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count) * 180.0 / kPi;
}

double compute_rmse(std::span<const Vec3> positions, std::span<const Vec3> truth,
                    const Matching& matching) {
  if (positions.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t r = 0; r < positions.size(); ++r) {
    sum += (positions[r] - truth[matching.truth_of.at(r)]).squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(positions.size()));
}

TrialRecord run_trial(const BenchConfig& config, double snr_db, std::uint64_t seed, long trial_index) {
  using Clock = std::chrono::steady_clock;
  TrialRecord rec;
  rec.snr_db = snr_db;
  rec.trial = trial_index;
  Clock::time_point start{};
  bool timing = false;
  try {
    RadarScene scene;
    scene.transmit = build_transmit_layout(config.transmit.rows, config.transmit.cols, config.transmit.center);
    std::vector<Vec3> anchors{scene.transmit.center};
    for (const ReceiverConfig& rc : config.receivers) {
      scene.receives.push_back(build_receive_layout(rc.axis_x, rc.axis_y, rc.center));
      anchors.push_back(rc.center);
    }

    Rng scene_rng(split_seed(seed, 1));
    scene.targets = sample_targets(config.box, config.targets, scene_rng, anchors);
    const CMatrix waveforms = sample_waveforms(config.samples, config.transmitters(), scene_rng);
    const auto rcs = sample_rcs(config.targets, config.pulses, scene.receives.size(), scene_rng);
    const ObservationSet clean = simulate(scene, waveforms, rcs);
    Rng noise_rng(split_seed(seed, 2));
    const ObservationSet obs = add_noise(clean, snr_db, noise_rng);
    Rng solver_rng(split_seed(seed, 3));

    start = Clock::now();
    timing = true;
    SolveOptions opts;
    opts.transmitters = config.transmitters();
    const SolveResult sr = solve(obs.tensors, scene.receives, config.targets, solver_rng, opts);
    rec.stages.solve = sr.diagnostics.times;
    rec.offdiag_residual = sr.diagnostics.offdiag_residual;
    rec.matrices_used = sr.diagnostics.used.size();

    auto t = Clock::now();
    std::vector<std::vector<DoaEstimate>> doas;
    std::vector<Vec3> centers;
    for (std::size_t m = 0; m < scene.receives.size(); ++m) {
      doas.push_back(doas_from_factors(sr.factors.A[m], scene.receives[m], m));
      centers.push_back(scene.receives[m].center);
    }
    rec.stages.doa_ms = std::chrono::duration<double, std::milli>(Clock::now() - t).count();

    t = Clock::now();
    const auto located = localize_all(doas, centers);
    const auto end = Clock::now();
    rec.stages.localize_ms = std::chrono::duration<double, std::milli>(end - t).count();
    rec.cpu_ms = std::chrono::duration<double, std::milli>(end - start).count();
    timing = false;

    std::vector<Vec3> positions;
    for (const LocalizationResult& l : located) positions.push_back(l.position);
    const Matching matching = match_targets(positions, scene.targets);

    std::vector<std::vector<Direction>> truth(scene.receives.size());
    for (std::size_t m = 0; m < scene.receives.size(); ++m) {
      for (const Vec3& target : scene.targets) truth[m].push_back(direction_between(centers[m], target));
    }
    rec.mae_deg = compute_mae(doas, truth, matching);
    rec.rmse_lambda = compute_rmse(positions, scene.targets, matching);
    if (!std::isfinite(rec.mae_deg) || !std::isfinite(rec.rmse_lambda)) {
      throw std::runtime_error("non-finite error metric");
    }
  } catch (const std::exception& e) {
    if (timing) rec.cpu_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    rec.failed = true;
    rec.failure_reason = e.what();
    rec.mae_deg = std::numeric_limits<double>::quiet_NaN();
    rec.rmse_lambda = std::numeric_limits<double>::quiet_NaN();
  }
  return rec;
}

std::vector<AggregateRow> aggregate(std::span<const TrialRecord> records) {
  std::map<double, std::vector<const TrialRecord*>> groups;
  for (const TrialRecord& r : records) groups[r.snr_db].push_back(&r);

  std::vector<AggregateRow> out;
  for (const auto& [snr, group] : groups) {
    AggregateRow row;
    row.snr_db = snr;
    double mae = 0.0, msq = 0.0, cpu = 0.0, res = 0.0;
    std::size_t failed = 0;
    for (const TrialRecord* r : group) {
      if (r->failed) {
        ++failed;
        continue;
      }
      mae += r->mae_deg;
      msq += r->rmse_lambda * r->rmse_lambda;
      cpu += r->cpu_ms;
      res += r->offdiag_residual;
    }
    row.completed = group.size() - failed;
    row.failure_rate = static_cast<double>(failed) / static_cast<double>(group.size());
    if (row.completed == 0) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.mae_deg = row.rmse_lambda = row.cpu_ms = row.offdiag_residual = nan;
    } else {
      const auto n = static_cast<double>(row.completed);
      row.mae_deg = mae / n;
      row.rmse_lambda = std::sqrt(msq / n);
      row.cpu_ms = cpu / n;
      row.offdiag_residual = res / n;
    }
    out.push_back(row);
  }
  return out;
}

SweepResult run_sweep(const BenchConfig& config, int threads) {
  config.validate();
  const std::size_t per_snr = config.trials;
  const std::size_t total = per_snr * config.snr_grid.size();
  SweepResult result;
  result.records.resize(total);
  const int nthreads = threads > 0 ? threads : omp_get_max_threads();

#pragma omp parallel for schedule(dynamic, 1) num_threads(nthreads)
  for (std::int64_t task = 0; task < static_cast<std::int64_t>(total); ++task) {
    const auto idx = static_cast<std::size_t>(task);
    const std::size_t s = idx / per_snr;
    const std::size_t trial = idx % per_snr;
    result.records[idx] = run_trial(config, config.snr_grid[s], trial_seed(config.seed, trial),
                                    static_cast<long>(trial));
  }

  std::stable_sort(result.records.begin(), result.records.end(),
                   [](const TrialRecord& a, const TrialRecord& b) {
                     return a.snr_db != b.snr_db ? a.snr_db < b.snr_db : a.trial < b.trial;
                   });
  result.aggregates = aggregate(result.records);
  return result;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::vector<CsvRow> to_csv_rows(std::span<const TrialRecord> records,
                                std::span<const AggregateRow> aggregates) {
  std::vector<CsvRow> rows;
  rows.reserve(records.size() + aggregates.size());
  for (const TrialRecord& r : records) {
    rows.push_back({"trial", r.snr_db, r.trial, r.mae_deg, r.rmse_lambda, r.cpu_ms, r.offdiag_residual,
                    r.failed ? 1.0 : 0.0});
  }
  for (const AggregateRow& a : aggregates) {
    rows.push_back({"agg", a.snr_db, -1, a.mae_deg, a.rmse_lambda, a.cpu_ms, a.offdiag_residual, a.failure_rate});
  }
  return rows;
}

std::string format_csv(std::span<const CsvRow> rows) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const CsvRow& r : rows) {
    out += r.kind;
    out += ',' + format_double(r.snr_db);
    out += ',' + std::to_string(r.trial);
    for (double v : {r.mae_deg, r.rmse_lambda, r.cpu_ms, r.offdiag_residual}) out += ',' + format_double(v);
    out += ',';
    out += r.kind == "trial" ? std::to_string(static_cast<int>(r.failed)) : format_double(r.failed);
    out += '\n';
  }
  return out;
}

namespace {

double parse_field(std::string_view tok, std::size_t line) {
  if (tok == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (tok == "inf") return std::numeric_limits<double>::infinity();
  if (tok == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw std::runtime_error("csv line " + std::to_string(line) + ": bad number '" + std::string(tok) + "'");
  }
  return v;
}

}  // namespace

std::vector<CsvRow> parse_csv(std::string_view text) {
  std::vector<CsvRow> rows;
  std::size_t pos = 0, line = 0;
  while (pos < text.size()) {
    const std::size_t nl = std::min(text.find('\n', pos), text.size());
    const std::string_view row = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line;
    if (line == 1) {
      if (row != kCsvHeader) throw std::runtime_error("csv line 1: unexpected header");
      continue;
    }
    std::vector<std::string_view> f;
    std::size_t p = 0;
    while (true) {
      const std::size_t c = std::min(row.find(',', p), row.size());
      f.push_back(row.substr(p, c - p));
      if (c == row.size()) break;
      p = c + 1;
    }
    if (f.size() != 8) throw std::runtime_error("csv line " + std::to_string(line) + ": expected 8 columns");
    CsvRow r;
    r.kind = std::string(f[0]);
    if (r.kind != "trial" && r.kind != "agg") {
      throw std::runtime_error("csv line " + std::to_string(line) + ": unknown kind '" + r.kind + "'");
    }
    r.snr_db = parse_field(f[1], line);
    r.trial = static_cast<long>(parse_field(f[2], line));
    r.mae_deg = parse_field(f[3], line);
    r.rmse_lambda = parse_field(f[4], line);
    r.cpu_ms = parse_field(f[5], line);
    r.offdiag_residual = parse_field(f[6], line);
    r.failed = parse_field(f[7], line);
    rows.push_back(std::move(r));
  }
  if (line == 0) throw std::runtime_error("csv: empty file");
  return rows;
}

void write_csv(std::span<const TrialRecord> records, std::span<const AggregateRow> aggregates,
               const std::filesystem::path& path) {
  const auto rows = to_csv_rows(records, aggregates);
  const std::string text = format_csv(rows);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::vector<CsvRow> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

}  // namespace ccpd::bench
