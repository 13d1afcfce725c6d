#include "cranaug/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "cranaug/config_json.hpp"
#include "cranaug/nrrd.hpp"
#include "cranaug/parallel.hpp"
#include "cranaug/volume_ops.hpp"

namespace cranaug {

using nlohmann::json;

namespace {

json parse_json_file(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const IoError& e) {
    throw ValidationError(e.what());
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": malformed JSON: " + e.what());
  }
}

fs::path resolve(const fs::path& root, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : root / path;
}

std::string sample_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sample_%06zu", index);
  return buf;
}

// Runs fn(i) for i in [0, n) on `workers` threads. Kernels inside run
// single-threaded when more than one worker is active.
template <typename Fn>
void run_workers(std::size_t n, int workers, Fn&& fn) {
  workers = std::max(1, std::min<int>(workers, static_cast<int>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      parallel::set_threads(1);
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

}  // namespace

DatasetManifest parse_manifest(const json& j, const fs::path& base) {
  try {
    if (!j.is_object() || !j.contains("cases") || !j["cases"].is_array()) {
      throw ValidationError("manifest must be an object with a 'cases' array");
    }
    DatasetManifest m;
    m.root = j.contains("root") ? resolve(base, j["root"].get<std::string>()) : base;
    std::set<std::string> ids;
    std::vector<std::string> missing;
    for (const json& c : j["cases"]) {
      ManifestCase mc;
      mc.id = c.at("id").get<std::string>();
      if (!ids.insert(mc.id).second) throw ValidationError("manifest: duplicate case_id '" + mc.id + "'");
      mc.defective_skull = resolve(m.root, c.at("defective_skull").get<std::string>());
      mc.defect = resolve(m.root, c.at("defect").get<std::string>());
      if (c.contains("complete_skull") && !c["complete_skull"].is_null()) {
        mc.complete_skull = resolve(m.root, c["complete_skull"].get<std::string>());
      }
      if (c.contains("provenance")) mc.provenance = c["provenance"];
      for (const fs::path* p : {&mc.defective_skull, &mc.defect}) {
        if (!fs::exists(*p)) missing.push_back(p->string());
      }
      if (mc.complete_skull && !fs::exists(*mc.complete_skull)) missing.push_back(mc.complete_skull->string());
      m.cases.push_back(std::move(mc));
    }
    if (!missing.empty()) {
      std::string msg = "manifest references " + std::to_string(missing.size()) + " missing file(s):";
      for (const auto& p : missing) msg += "\n  " + p;
      throw ValidationError(msg);
    }
    return m;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("manifest: ") + e.what());
  }
}

DatasetManifest load_manifest(const fs::path& path) {
  return parse_manifest(parse_json_file(path), path.parent_path());
}

json manifest_to_json(const DatasetManifest& m) {
  json cases = json::array();
  for (const ManifestCase& c : m.cases) {
    json e = {{"id", c.id}, {"defective_skull", c.defective_skull.string()}, {"defect", c.defect.string()}};
    if (c.complete_skull) e["complete_skull"] = c.complete_skull->string();
    if (!c.provenance.is_null()) e["provenance"] = c.provenance;
    cases.push_back(std::move(e));
  }
  return {{"cases", cases}};
}

CasePair load_case(const ManifestCase& c) {
  CasePair pair{load_nrrd_mask(c.defective_skull), load_nrrd_mask(c.defect)};
  check_case_pair(pair, c.id);
  return pair;
}

void JobConfig::validate() const {
  if (count < 1) throw ValidationError("job.count must be >= 1");
  if (parallelism < 1) throw ValidationError("job.parallelism must be >= 1");
  if (method == GenerationMethod::geo && !geo) throw ValidationError("geo method needs a 'geo' config");
  if (geo) geo->validate();
  reg.validate();
}

JobConfig job_config_from_json(const json& j) {
  try {
    if (!j.is_object()) throw ValidationError("job config must be an object");
    for (const auto& [key, _] : j.items()) {
      static const std::set<std::string> known = {"method", "count", "geo", "reg", "master_seed", "parallelism", "out_dir"};
      if (!known.count(key)) throw ValidationError("job config: unknown field '" + key + "'");
    }
    JobConfig job;
    if (j.contains("method")) {
      std::string m = j["method"].get<std::string>();
      if (m == "geo") {
        job.method = GenerationMethod::geo;
      } else if (m == "ir") {
        job.method = GenerationMethod::ir;
      } else {
        throw ValidationError("job.method must be 'geo' or 'ir', got '" + m + "'");
      }
    }
    if (j.contains("count")) {
      if (j["count"].is_number_integer() && j["count"].get<long long>() < 0) throw ValidationError("job.count must be >= 1");
      job.count = j["count"].get<std::size_t>();
    }
    if (j.contains("geo") && !j["geo"].is_null()) job.geo = geo_config_from_json(j["geo"]);
    if (j.contains("reg")) job.reg = reg_config_from_json(j["reg"]);
    if (j.contains("master_seed")) job.master_seed = j["master_seed"].get<std::uint64_t>();
    if (j.contains("parallelism")) job.parallelism = j["parallelism"].get<int>();
    if (j.contains("out_dir")) job.out_dir = j["out_dir"].get<std::string>();
    return job;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("job config: ") + e.what());
  }
}

json to_json(const JobConfig& job) {
  json j = {{"method", job.method == GenerationMethod::geo ? "geo" : "ir"},
            {"count", job.count},
            {"reg", to_json(job.reg)},
            {"master_seed", job.master_seed},
            {"parallelism", job.parallelism},
            {"out_dir", job.out_dir.string()}};
  j["geo"] = job.geo ? to_json(*job.geo) : json(nullptr);
  return j;
}

namespace {

// Hash over the fields that determine sample content.
std::string job_hash(const JobConfig& job) {
  json j = {{"method", job.method == GenerationMethod::geo ? "geo" : "ir"}, {"reg", to_json(job.reg)}};
  j["geo"] = job.geo ? to_json(*job.geo) : json(nullptr);
  return config_hash(j);
}

CasePair resample_pair(const CasePair& p, const Dims& dims) {
  if (p.defective_skull.dims() == dims) return p;
  return {resample(p.defective_skull, dims), resample(p.defect, dims)};
}

}  // namespace

json GenerationReport::to_json() const {
  json f = json::array();
  for (const auto& [index, message] : failures) f.push_back({{"sample", index}, {"error", message}});
  return {{"requested", requested}, {"written", written}, {"failures", f}, {"config_hash", config_hash}};
}

CasePair generate_sample(const DatasetManifest& manifest, const JobConfig& job, std::size_t index, json* provenance) {
  const std::uint64_t seed = child_seed(job.master_seed, index);
  Rng rng(seed);
  const std::size_t n = manifest.cases.size();
  json prov = {{"sample", index}, {"seed", seed}, {"config_hash", job_hash(job)}};
  CasePair out;
  if (job.method == GenerationMethod::geo) {
    const ManifestCase& c = manifest.cases[static_cast<std::size_t>(rng.below(n))];
    out = augment(load_case(c), *job.geo, rng);
    prov["method"] = "geo";
    prov["source_ids"] = {c.id};
  } else {
    if (n < 2) throw ValidationError("ir generation needs at least 2 cases");
    auto s = static_cast<std::size_t>(rng.below(n));
    auto t = static_cast<std::size_t>(rng.below(n - 1));
    if (t >= s) ++t;
    const ManifestCase& src = manifest.cases[s];
    const ManifestCase& tgt = manifest.cases[t];
    CasePair source = load_case(src);
    CasePair target = resample_pair(load_case(tgt), source.defective_skull.dims());
    RegResult reg;
    out = synthesize_pair(source, target, job.reg, &reg);
    if (job.geo) out = augment(out, *job.geo, rng);
    prov["method"] = "ir";
    prov["source_ids"] = {src.id, tgt.id};
    prov["folding_fraction"] = reg.folding_fraction;
  }
  if (provenance) *provenance = std::move(prov);
  return out;
}

GenerationReport generate_dataset(const DatasetManifest& manifest, const JobConfig& job) {
  job.validate();
  if (manifest.cases.empty()) throw ValidationError("generate: manifest has no cases");
  if (job.method == GenerationMethod::ir && manifest.cases.size() < 2) {
    throw ValidationError("generate: ir method needs at least 2 cases, manifest has " +
                          std::to_string(manifest.cases.size()));
  }
  if (job.out_dir.empty()) throw ValidationError("generate: out_dir is required");
  fs::create_directories(job.out_dir);

  GenerationReport report;
  report.requested = job.count;
  report.config_hash = job_hash(job);
  std::vector<bool> ok(job.count, false);
  std::mutex mu;

  run_workers(job.count, job.parallelism, [&](std::size_t i) {
    const std::string name = sample_name(i);
    try {
      json prov;
      CasePair pair = generate_sample(manifest, job, i, &prov);
      save_nrrd(pair.defective_skull, job.out_dir / (name + "_defective_skull.nrrd"), NrrdEncoding::gzip);
      save_nrrd(pair.defect, job.out_dir / (name + "_defect.nrrd"), NrrdEncoding::gzip);
      write_file_atomic(job.out_dir / (name + ".json"), prov.dump(2) + "\n");
      ok[i] = true;
    } catch (const std::exception& e) {
      std::lock_guard lock(mu);
      report.failures.emplace_back(i, e.what());
    }
  });
  std::sort(report.failures.begin(), report.failures.end());

  DatasetManifest out;
  out.root = job.out_dir;
  for (std::size_t i = 0; i < job.count; ++i) {
    if (!ok[i]) continue;
    const std::string name = sample_name(i);
    ManifestCase c;
    c.id = name;
    c.defective_skull = name + "_defective_skull.nrrd";
    c.defect = name + "_defect.nrrd";
    out.cases.push_back(std::move(c));
    ++report.written;
  }
  write_file_atomic(job.out_dir / "manifest.json", manifest_to_json(out).dump(2) + "\n");
  write_file_atomic(job.out_dir / "run_report.json", report.to_json().dump(2) + "\n");
  return report;
}

DatasetManifest combine_datasets(const std::vector<fs::path>& dirs, std::size_t count, std::uint64_t master_seed,
                                 const fs::path& out) {
  struct Entry {
    fs::path dir;
    ManifestCase c;
  };
  std::vector<Entry> pool;
  for (const fs::path& d : dirs) {
    DatasetManifest m = load_manifest(d / "manifest.json");
    for (ManifestCase& c : m.cases) pool.push_back({d, std::move(c)});
  }
  if (count > pool.size()) {
    throw CapacityError("combine: requested " + std::to_string(count) + " samples but only " +
                        std::to_string(pool.size()) + " are available");
  }
  Rng rng(master_seed);
  // Partial Fisher-Yates: the first `count` slots are the sample.
  for (std::size_t i = 0; i < count; ++i) {
    auto j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  DatasetManifest combined;
  combined.root = out.parent_path();
  for (std::size_t i = 0; i < count; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "combined_%06zu", i);
    ManifestCase c = pool[i].c;
    c.provenance = {{"source_dir", pool[i].dir.string()}, {"source_id", c.id}};
    if (!pool[i].c.provenance.is_null()) c.provenance["source_provenance"] = pool[i].c.provenance;
    c.id = id;
    c.defective_skull = fs::absolute(c.defective_skull);
    c.defect = fs::absolute(c.defect);
    if (c.complete_skull) c.complete_skull = fs::absolute(*c.complete_skull);
    combined.cases.push_back(std::move(c));
  }
  if (!out.empty()) {
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_file_atomic(out, manifest_to_json(combined).dump(2) + "\n");
  }
  return combined;
}

PredictionSet load_predictions(const fs::path& path) {
  json j = parse_json_file(path);
  try {
    if (!j.is_object() || !j.contains("cases") || !j["cases"].is_array()) {
      throw ValidationError("prediction set must be an object with a 'cases' array");
    }
    PredictionSet s;
    s.root = j.contains("root") ? resolve(path.parent_path(), j["root"].get<std::string>()) : path.parent_path();
    std::set<std::string> ids;
    std::vector<std::string> missing;
    for (const json& c : j["cases"]) {
      PredictionCase pc;
      pc.id = c.at("id").get<std::string>();
      if (!ids.insert(pc.id).second) throw ValidationError("prediction set: duplicate case_id '" + pc.id + "'");
      pc.prediction = resolve(s.root, c.at("prediction").get<std::string>());
      if (c.contains("translation") && !c["translation"].is_null()) {
        const json& t = c["translation"];
        if (!t.is_array() || t.size() != 3) throw ValidationError("prediction '" + pc.id + "': translation must be [x, y, z]");
        pc.translation = Translation{t[0].get<std::int64_t>(), t[1].get<std::int64_t>(), t[2].get<std::int64_t>()};
      }
      if (!fs::exists(pc.prediction)) missing.push_back(pc.prediction.string());
      s.cases.push_back(std::move(pc));
    }
    if (!missing.empty()) {
      std::string msg = "prediction set references " + std::to_string(missing.size()) + " missing file(s):";
      for (const auto& p : missing) msg += "\n  " + p;
      throw ValidationError(msg);
    }
    return s;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("prediction set: ") + e.what());
  }
}

MetricSummary summarize(const std::vector<double>& values) {
  std::vector<double> v;
  for (double x : values) {
    if (std::isfinite(x)) v.push_back(x);
  }
  MetricSummary s;
  s.n = v.size();
  if (v.empty()) {
    s.mean = s.std = s.min = s.max = s.median = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(v.size()));
  s.min = *std::min_element(v.begin(), v.end());
  s.max = *std::max_element(v.begin(), v.end());
  s.median = percentile(v, 50.0);
  return s;
}

MetricSummary DatasetEvaluation::summary(double MetricsReport::*field) const {
  std::vector<double> v;
  for (const CaseMetrics& c : cases) v.push_back(c.report.*field);
  return summarize(v);
}

std::string DatasetEvaluation::to_csv() const {
  std::ostringstream out;
  out << "case_id,dsc,sdsc,hd95,msd,bdsc\n";
  for (const CaseMetrics& c : cases) {
    out << c.case_id << ',' << format_number(c.report.dsc) << ',' << format_number(c.report.sdsc) << ','
        << format_number(c.report.hd95) << ',' << format_number(c.report.msd) << ',' << format_number(c.report.bdsc)
        << '\n';
  }
  return out.str();
}

json DatasetEvaluation::summary_json() const {
  auto num = [](double v) -> json { return std::isnan(v) ? json(nullptr) : json(v); };
  json metrics = json::object();
  const std::pair<const char*, double MetricsReport::*> fields[] = {
      {"dsc", &MetricsReport::dsc}, {"sdsc", &MetricsReport::sdsc}, {"hd95", &MetricsReport::hd95},
      {"msd", &MetricsReport::msd}, {"bdsc", &MetricsReport::bdsc}};
  for (const auto& [name, field] : fields) {
    MetricSummary s = summary(field);
    metrics[name] = {{"mean", num(s.mean)}, {"std", num(s.std)},       {"min", num(s.min)},
                     {"max", num(s.max)},   {"median", num(s.median)}, {"n", s.n}};
  }
  return {{"n_cases", cases.size()},
          {"metrics", metrics},
          {"unmatched_predictions", unmatched_predictions},
          {"unmatched_ground_truth", unmatched_ground_truth}};
}

DatasetEvaluation evaluate_dataset(const PredictionSet& preds, const DatasetManifest& gt, double tau, int parallelism) {
  std::map<std::string, const PredictionCase*> by_id;
  for (const PredictionCase& p : preds.cases) by_id[p.id] = &p;
  DatasetEvaluation result;
  std::vector<std::pair<const PredictionCase*, const ManifestCase*>> work;
  std::set<std::string> matched;
  for (const ManifestCase& g : gt.cases) {
    auto it = by_id.find(g.id);
    if (it == by_id.end()) {
      result.unmatched_ground_truth.push_back(g.id);
    } else {
      work.emplace_back(it->second, &g);
      matched.insert(g.id);
    }
  }
  for (const PredictionCase& p : preds.cases) {
    if (!matched.count(p.id)) result.unmatched_predictions.push_back(p.id);
  }
  if (work.empty()) {
    std::string msg = "evaluate: no case ids in common";
    if (!result.unmatched_predictions.empty()) {
      msg += "\n  unmatched predictions:";
      for (const auto& id : result.unmatched_predictions) msg += " " + id;
    }
    if (!result.unmatched_ground_truth.empty()) {
      msg += "\n  unmatched ground truth:";
      for (const auto& id : result.unmatched_ground_truth) msg += " " + id;
    }
    throw ValidationError(msg);
  }
  result.cases.resize(work.size());
  std::vector<std::string> errors(work.size());
  run_workers(work.size(), parallelism, [&](std::size_t i) {
    try {
      const auto& [p, g] = work[i];
      BinaryMask pred = load_nrrd_mask(p->prediction);
      BinaryMask truth = load_nrrd_mask(g->defect);
      result.cases[i] = {g->id, evaluate_case(pred, truth, truth.dims(), truth.spacing(), tau, p->translation)};
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) throw IoError("evaluate: case '" + work[i].second->id + "': " + errors[i]);
  }
  return result;
}

std::vector<std::pair<std::string, double>> read_metric_column(const fs::path& csv, const std::string& metric) {
  std::istringstream in(read_file(csv));
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(csv.string() + ": empty metric table");
  std::vector<std::string> header;
  {
    std::istringstream h(line);
    std::string cell;
    while (std::getline(h, cell, ',')) header.push_back(cell);
  }
  auto col = std::find(header.begin(), header.end(), metric);
  if (header.empty() || header[0] != "case_id") throw ValidationError(csv.string() + ": first column must be case_id");
  if (col == header.end()) throw ValidationError(csv.string() + ": no column '" + metric + "'");
  const auto idx = static_cast<std::size_t>(col - header.begin());
  std::vector<std::pair<std::string, double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream r(line);
    std::string cell;
    while (std::getline(r, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size()) throw ValidationError(csv.string() + ": ragged row '" + line + "'");
    double v = cells[idx] == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(cells[idx]);
    rows.emplace_back(cells[0], v);
  }
  return rows;
}

ComparisonResult compare_metric_tables(const fs::path& a, const fs::path& b, const std::string& metric) {
  auto ra = read_metric_column(a, metric);
  auto rb = read_metric_column(b, metric);
  std::map<std::string, double> mb(rb.begin(), rb.end());
  std::vector<double> x, y;
  for (const auto& [id, v] : ra) {
    auto it = mb.find(id);
    if (it == mb.end()) continue;
    if (std::isnan(v) || std::isnan(it->second)) continue;
    x.push_back(v);
    y.push_back(it->second);
  }
  if (x.empty()) throw ValidationError("compare: the two tables share no case ids with defined '" + metric + "'");
  return wilcoxon_signed_rank(x, y);
}

}  // namespace cranaug
