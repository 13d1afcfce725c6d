#pragma once

// Dataset-level orchestration: manifests, synthetic dataset generation,
// dataset mixing and evaluation.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cranaug/components.hpp"
#include "cranaug/geo_aug.hpp"
#include "cranaug/metrics.hpp"
#include "cranaug/registration.hpp"
#include "cranaug/stats.hpp"

namespace cranaug {

namespace fs = std::filesystem;

struct ManifestCase {
  std::string id;
  fs::path defective_skull;
  fs::path defect;
  std::optional<fs::path> complete_skull;
  // Free-form provenance carried through combine (source dir, source id...).
  nlohmann::json provenance;
};

// Manifest JSON:
//   { "root": "<dir, optional>",
//     "cases": [ { "id": "...", "defective_skull": "a.nrrd",
//                  "defect": "b.nrrd", "complete_skull": "c.nrrd" } ] }
// Relative paths resolve against root, which itself defaults to the manifest
// file's directory. Paths stored here are already resolved.
struct DatasetManifest {
  fs::path root;
  std::vector<ManifestCase> cases;
};

// ValidationError on malformed JSON, duplicate ids or missing files (all
// missing paths listed in one message).
DatasetManifest load_manifest(const fs::path& path);
DatasetManifest parse_manifest(const nlohmann::json& j, const fs::path& root);
nlohmann::json manifest_to_json(const DatasetManifest& m);

CasePair load_case(const ManifestCase& c);

enum class GenerationMethod { geo, ir };

struct JobConfig {
  GenerationMethod method = GenerationMethod::geo;
  std::size_t count = 1;
  // Required for geo; for ir it is applied after registration when present.
  std::optional<GeoAugConfig> geo;
  RegConfig reg;
  std::uint64_t master_seed = 0;
  int parallelism = 1;
  fs::path out_dir;

  void validate() const;  // ValidationError
};

JobConfig job_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const JobConfig& job);

struct GenerationReport {
  std::size_t requested = 0;
  std::size_t written = 0;
  std::vector<std::pair<std::size_t, std::string>> failures;  // (sample index, message)
  std::string config_hash;
  nlohmann::json to_json() const;
};

// Writes sample_NNNNNN_defective_skull.nrrd, sample_NNNNNN_defect.nrrd and
// sample_NNNNNN.json (provenance) for each sample, then manifest.json and
// run_report.json. Sample i uses child_seed(master_seed, i) only, so output
// does not depend on parallelism or scheduling.
GenerationReport generate_dataset(const DatasetManifest& manifest, const JobConfig& job);

// One sample, exactly as generate_dataset would produce it.
CasePair generate_sample(const DatasetManifest& manifest, const JobConfig& job, std::size_t index,
                         nlohmann::json* provenance = nullptr);

// Uniform sample without replacement over the manifests found in `dirs`
// (each dir holds manifest.json). Writes the combined manifest to out.
// CapacityError when fewer than count samples are available.
DatasetManifest combine_datasets(const std::vector<fs::path>& dirs, std::size_t count,
                                 std::uint64_t master_seed, const fs::path& out);

// Prediction set JSON:
//   { "root": "<optional>",
//     "cases": [ { "id": "...", "prediction": "p.nrrd",
//                  "translation": [tx, ty, tz] } ] }
// translation is the centering shift recorded by preprocess (optional).
struct PredictionCase {
  std::string id;
  fs::path prediction;
  std::optional<Translation> translation;
};

struct PredictionSet {
  fs::path root;
  std::vector<PredictionCase> cases;
};

PredictionSet load_predictions(const fs::path& path);

struct CaseMetrics {
  std::string case_id;
  MetricsReport report;
};

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  double max = 0.0;
  double median = 0.0;
  std::size_t n = 0;  // finite values aggregated
};

struct DatasetEvaluation {
  std::vector<CaseMetrics> cases;
  std::vector<std::string> unmatched_predictions;
  std::vector<std::string> unmatched_ground_truth;

  MetricSummary summary(double MetricsReport::*field) const;
  std::string to_csv() const;
  nlohmann::json summary_json() const;
};

// Undefined distances (NaN) are skipped in aggregates and counted out of n.
MetricSummary summarize(const std::vector<double>& values);

// Evaluates on the intersection of ids; ValidationError if it is empty.
DatasetEvaluation evaluate_dataset(const PredictionSet& preds, const DatasetManifest& gt,
                                   double tau = kDefaultSurfaceTolerance, int parallelism = 1);

// Reads a per-case CSV as written by DatasetEvaluation::to_csv and returns
// (case_id, value of `metric`) rows.
std::vector<std::pair<std::string, double>> read_metric_column(const fs::path& csv,
                                                               const std::string& metric);

// Pairs two metric tables by case_id and runs the signed-rank test.
ComparisonResult compare_metric_tables(const fs::path& a, const fs::path& b,
                                       const std::string& metric);

}  // namespace cranaug
