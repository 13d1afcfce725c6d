// cranaug: command-line front end for the augmentation, registration,
// evaluation and comparison pipeline.
//
// Exit codes: 0 success, 1 validation / usage error, 2 runtime error.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cranaug/components.hpp"
#include "cranaug/config_json.hpp"
#include "cranaug/latent.hpp"
#include "cranaug/nrrd.hpp"
#include "cranaug/pipeline.hpp"
#include "cranaug/volume_ops.hpp"

using namespace cranaug;
using nlohmann::json;

namespace {

struct Globals {
  std::string config_path;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out = "out";
};

json read_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::string text;
  try {
    text = read_file(path);
  } catch (const IoError& e) {
    throw ValidationError(e.what());
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": malformed JSON: " + e.what());
  }
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& what) {
  if (!j.is_object()) throw ValidationError(what + " config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ValidationError(what + " config: unknown field '" + key + "'");
  }
}

template <typename T>
T config_value(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config field '") + key + "': " + e.what());
  }
}

bool given(const CLI::Option* o) { return o->count() > 0; }

// Run report written next to a command's outputs. No timings, so repeated
// runs leave identical trees.
void write_report(const fs::path& dir, const std::string& command, json details) {
  fs::create_directories(dir);
  json report = {{"command", command}, {"status", "ok"}};
  for (auto& [k, v] : details.items()) report[k] = v;
  write_file_atomic(dir / (command + "_report.json"), report.dump(2) + "\n");
}

json dims_json(const Dims& d) { return json::array({d.x, d.y, d.z}); }
json translation_json(const Translation& t) { return json::array({t.x, t.y, t.z}); }

Connectivity parse_connectivity(int c) {
  if (c == 6) return Connectivity::six;
  if (c == 26) return Connectivity::twenty_six;
  throw ValidationError("connectivity must be 6 or 26, got " + std::to_string(c));
}

RemovalRule parse_rule(const std::string& r) {
  if (r == "or") return RemovalRule::small_or_overlapping;
  if (r == "and") return RemovalRule::small_and_overlapping;
  throw ValidationError("rule must be 'or' or 'and', got '" + r + "'");
}

const ManifestCase& find_case(const DatasetManifest& m, const std::string& id) {
  for (const ManifestCase& c : m.cases) {
    if (c.id == id) return c;
  }
  throw ValidationError("case '" + id + "' not in manifest");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cranial defect data augmentation, registration and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "JSON config for the subcommand");
  auto* seed_opt = app.add_option("--seed", g.seed, "Master seed");
  auto* jobs_opt = app.add_option("--jobs", g.jobs, "Worker count")->check(CLI::PositiveNumber);
  auto* out_opt = app.add_option("--out", g.out, "Output directory");

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "Center cases on their bounding box and resample to model resolution");
  std::string pre_manifest;
  std::int64_t pre_size = 0, pre_offset = 16;
  pre->add_option("--manifest", pre_manifest, "Dataset manifest")->required();
  auto* pre_size_opt = pre->add_option("--size", pre_size, "Output grid edge length (default: keep native dims)");
  auto* pre_offset_opt = pre->add_option("--offset", pre_offset, "Minimum margin around the bounding box (voxels)");

  // augment
  auto* aug = app.add_subcommand("augment", "Apply one random geometric augmentation to every case");
  std::string aug_manifest, aug_preset;
  aug->add_option("--manifest", aug_manifest, "Dataset manifest")->required();
  auto* aug_preset_opt = aug->add_option("--preset", aug_preset, "basic | heavy | extreme");

  // register
  auto* reg = app.add_subcommand("register", "Register one case onto another and warp both channels");
  std::string reg_manifest, reg_source, reg_target;
  double reg_alpha = 0.0, reg_step = 0.0;
  int reg_iters = 0, reg_levels = 0;
  reg->add_option("--manifest", reg_manifest, "Dataset manifest")->required();
  reg->add_option("--source", reg_source, "Source case id")->required();
  reg->add_option("--target", reg_target, "Target case id")->required();
  auto* reg_alpha_opt = reg->add_option("--alpha", reg_alpha, "Regularization coefficient");
  auto* reg_step_opt = reg->add_option("--step", reg_step, "Gradient step size");
  auto* reg_iters_opt = reg->add_option("--iterations", reg_iters, "Iterations per level");
  auto* reg_levels_opt = reg->add_option("--levels", reg_levels, "Pyramid levels");

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a synthetic dataset");
  std::string gen_manifest, gen_method, gen_preset;
  std::size_t gen_count = 0;
  gen->add_option("--manifest", gen_manifest, "Dataset manifest")->required();
  auto* gen_method_opt = gen->add_option("--method", gen_method, "geo | ir");
  auto* gen_count_opt = gen->add_option("--count", gen_count, "Samples to generate");
  auto* gen_preset_opt = gen->add_option("--preset", gen_preset, "Geometric preset");

  // combine
  auto* comb = app.add_subcommand("combine", "Sample uniformly without replacement from generated datasets");
  std::vector<std::string> comb_dirs;
  std::size_t comb_count = 0;
  comb->add_option("dirs", comb_dirs, "Dataset directories holding manifest.json")->required();
  comb->add_option("--count", comb_count, "Samples in the combined dataset")->required();

  // postprocess
  auto* post = app.add_subcommand("postprocess", "Remove small or skull-overlapping components from a prediction");
  std::string post_pred, post_skull, post_rule = "or";
  std::size_t post_min = 100;
  int post_conn = 26;
  post->add_option("--pred", post_pred, "Predicted defect (NRRD)")->required();
  post->add_option("--skull", post_skull, "Defective skull (NRRD)")->required();
  auto* post_min_opt = post->add_option("--min-volume", post_min, "Minimum component size (voxels)");
  auto* post_conn_opt = post->add_option("--connectivity", post_conn, "6 or 26");
  auto* post_rule_opt = post->add_option("--rule", post_rule, "or: small OR overlapping; and: small AND overlapping");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Score predictions against ground truth");
  std::string eval_pred, eval_gt;
  double eval_tau = kDefaultSurfaceTolerance;
  eval->add_option("--pred", eval_pred, "Prediction set JSON")->required();
  eval->add_option("--gt", eval_gt, "Ground-truth manifest")->required();
  auto* eval_tau_opt = eval->add_option("--tau", eval_tau, "Surface tolerance (mm)");

  // compare
  auto* cmp = app.add_subcommand("compare", "Paired Wilcoxon signed-rank test of two metric tables");
  std::string cmp_metric = "dsc";
  std::vector<std::string> cmp_tables;
  cmp->add_option("--metric", cmp_metric, "Metric column");
  cmp->add_option("tables", cmp_tables, "Two per-case CSV tables")->required()->expected(2);

  // sample
  auto* smp = app.add_subcommand("sample", "Draw latent vectors");
  std::string smp_strategy = "uds";
  std::size_t smp_dim = 16, smp_count = 1024;
  auto* smp_strategy_opt = smp->add_option("--strategy", smp_strategy, "sd | ud | uds");
  auto* smp_dim_opt = smp->add_option("--dim", smp_dim, "Latent dimension");
  auto* smp_count_opt = smp->add_option("--count", smp_count, "Number of vectors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    json cfg = read_config(g.config_path);
    const fs::path out(g.out);

    if (*pre) {
      reject_unknown(cfg, {"size", "offset"}, "preprocess");
      if (!given(pre_size_opt)) pre_size = config_value<std::int64_t>(cfg, "size", 0);
      if (!given(pre_offset_opt)) pre_offset = config_value<std::int64_t>(cfg, "offset", 16);
      if (pre_size < 0 || pre_offset < 0) throw ValidationError("size and offset must be non-negative");
      DatasetManifest m = load_manifest(pre_manifest);
      fs::create_directories(out);
      DatasetManifest result;
      result.root = out;
      for (const ManifestCase& c : m.cases) {
        CasePair pair = load_case(c);
        auto [skull, t] = center_with_offset(pair.defective_skull, pre_offset);
        BinaryMask defect = translate(pair.defect, t);
        std::optional<BinaryMask> complete;
        if (c.complete_skull) complete = translate(load_nrrd_mask(*c.complete_skull), t);
        const Dims native = skull.dims();
        if (pre_size > 0) {
          Dims target{pre_size, pre_size, pre_size};
          skull = resample(skull, target);
          defect = resample(defect, target);
          if (complete) complete = resample(*complete, target);
        }
        ManifestCase oc;
        oc.id = c.id;
        oc.defective_skull = c.id + "_defective_skull.nrrd";
        oc.defect = c.id + "_defect.nrrd";
        save_nrrd(skull, out / oc.defective_skull, NrrdEncoding::gzip);
        save_nrrd(defect, out / oc.defect, NrrdEncoding::gzip);
        if (complete) {
          oc.complete_skull = c.id + "_complete_skull.nrrd";
          save_nrrd(*complete, out / *oc.complete_skull, NrrdEncoding::gzip);
        }
        oc.provenance = {{"translation", translation_json(t)},
                         {"native_dims", dims_json(native)},
                         {"native_spacing", {pair.defective_skull.spacing().x, pair.defective_skull.spacing().y,
                                             pair.defective_skull.spacing().z}}};
        result.cases.push_back(std::move(oc));
      }
      write_file_atomic(out / "manifest.json", manifest_to_json(result).dump(2) + "\n");
      write_report(out, "preprocess", {{"cases", result.cases.size()}, {"size", pre_size}, {"offset", pre_offset}});
      std::cout << "preprocessed " << result.cases.size() << " case(s) into " << out.string() << "\n";
      return 0;
    }

    if (*aug) {
      GeoAugConfig geo = given(aug_preset_opt) ? geo_config_from_json(json(aug_preset))
                         : cfg.empty()         ? preset(Preset::basic)
                                               : geo_config_from_json(cfg);
      DatasetManifest m = load_manifest(aug_manifest);
      fs::create_directories(out);
      DatasetManifest result;
      result.root = out;
      for (std::size_t i = 0; i < m.cases.size(); ++i) {
        const ManifestCase& c = m.cases[i];
        Rng rng(child_seed(g.seed, i));
        AugmentLog log;
        CasePair pair = augment(load_case(c), geo, rng, &log);
        ManifestCase oc;
        oc.id = c.id;
        oc.defective_skull = c.id + "_defective_skull.nrrd";
        oc.defect = c.id + "_defect.nrrd";
        save_nrrd(pair.defective_skull, out / oc.defective_skull, NrrdEncoding::gzip);
        save_nrrd(pair.defect, out / oc.defect, NrrdEncoding::gzip);
        json applied = json::array();
        for (GeoTransform t : log.applied) {
          static const char* names[] = {"flip", "crop", "affine", "noise"};
          applied.push_back(names[static_cast<int>(t)]);
        }
        oc.provenance = {{"source_id", c.id}, {"seed", rng.seed()}, {"applied", applied}};
        result.cases.push_back(std::move(oc));
      }
      write_file_atomic(out / "manifest.json", manifest_to_json(result).dump(2) + "\n");
      write_report(out, "augment", {{"cases", result.cases.size()}, {"seed", g.seed}, {"geo", to_json(geo)}});
      std::cout << "augmented " << result.cases.size() << " case(s) into " << out.string() << "\n";
      return 0;
    }

    if (*reg) {
      RegConfig rc = reg_config_from_json(cfg);
      if (given(reg_alpha_opt)) rc.alpha = reg_alpha;
      if (given(reg_step_opt)) rc.step_size = reg_step;
      if (given(reg_iters_opt)) rc.iterations_per_level = reg_iters;
      if (given(reg_levels_opt)) rc.levels = reg_levels;
      rc.validate();
      DatasetManifest m = load_manifest(reg_manifest);
      CasePair source = load_case(find_case(m, reg_source));
      CasePair target = load_case(find_case(m, reg_target));
      if (target.defective_skull.dims() != source.defective_skull.dims()) {
        target = {resample(target.defective_skull, source.defective_skull.dims()),
                  resample(target.defect, source.defective_skull.dims())};
      }
      RegResult r;
      CasePair warped = synthesize_pair(source, target, rc, &r);
      fs::create_directories(out);
      save_nrrd(warped.defective_skull, out / "warped_defective_skull.nrrd", NrrdEncoding::gzip);
      save_nrrd(warped.defect, out / "warped_defect.nrrd", NrrdEncoding::gzip);
      write_file_atomic(out / "trace.csv", trace_to_csv(r.objective_trace));
      // Full-resolution objective at the zero field, comparable with the last
      // trace entry.
      const double initial = objective(source.defective_skull.to_volume(), target.defective_skull.to_volume(),
                                       DisplacementField(source.defective_skull.dims()), rc.alpha_voxel())
                                 .total;
      const double d0 = dsc(source.defective_skull, target.defective_skull);
      const double d1 = dsc(warped.defective_skull, target.defective_skull);
      write_report(out, "register",
                   {{"source", reg_source},
                    {"target", reg_target},
                    {"reg", to_json(rc)},
                    {"folding_fraction", r.folding_fraction},
                    {"initial_objective", initial},
                    {"final_objective", r.objective_trace.back().total},
                    {"dsc_before", d0},
                    {"dsc_after", d1}});
      std::printf("dsc %.4f -> %.4f, folding fraction %.6f\n", d0, d1, r.folding_fraction);
      return 0;
    }

    if (*gen) {
      JobConfig job = job_config_from_json(cfg);
      if (given(gen_method_opt)) {
        if (gen_method != "geo" && gen_method != "ir") throw ValidationError("--method must be geo or ir");
        job.method = gen_method == "geo" ? GenerationMethod::geo : GenerationMethod::ir;
      }
      if (given(gen_count_opt)) job.count = gen_count;
      if (given(gen_preset_opt)) job.geo = geo_config_from_json(json(gen_preset));
      if (given(seed_opt)) job.master_seed = g.seed;
      if (given(jobs_opt)) job.parallelism = g.jobs;
      if (given(out_opt) || job.out_dir.empty()) job.out_dir = out;
      DatasetManifest m = load_manifest(gen_manifest);
      GenerationReport report = generate_dataset(m, job);
      for (const auto& [index, message] : report.failures) {
        std::cerr << "sample " << index << " failed: " << message << "\n";
      }
      std::cout << "wrote " << report.written << " of " << report.requested << " sample(s) to "
                << job.out_dir.string() << "\n";
      return report.failures.empty() ? 0 : 2;
    }

    if (*comb) {
      std::vector<fs::path> dirs(comb_dirs.begin(), comb_dirs.end());
      DatasetManifest m = combine_datasets(dirs, comb_count, g.seed, out / "manifest.json");
      write_report(out, "combine", {{"sources", comb_dirs}, {"count", m.cases.size()}, {"seed", g.seed}});
      std::cout << "combined " << m.cases.size() << " sample(s) into " << (out / "manifest.json").string() << "\n";
      return 0;
    }

    if (*post) {
      reject_unknown(cfg, {"min_volume", "connectivity", "rule"}, "postprocess");
      if (!given(post_min_opt)) post_min = config_value<std::size_t>(cfg, "min_volume", post_min);
      if (!given(post_conn_opt)) post_conn = config_value<int>(cfg, "connectivity", post_conn);
      if (!given(post_rule_opt)) post_rule = config_value<std::string>(cfg, "rule", post_rule);
      Connectivity conn = parse_connectivity(post_conn);
      RemovalRule rule = parse_rule(post_rule);
      BinaryMask pred = load_nrrd_mask(post_pred);
      BinaryMask skull = load_nrrd_mask(post_skull);
      BinaryMask cleaned = postprocess(pred, skull, post_min, conn, rule);
      fs::create_directories(out);
      fs::path dest = out / fs::path(post_pred).filename();
      save_nrrd(cleaned, dest, NrrdEncoding::gzip);
      write_report(out, "postprocess",
                   {{"prediction", post_pred},
                    {"output", dest.string()},
                    {"min_volume", post_min},
                    {"connectivity", post_conn},
                    {"rule", post_rule},
                    {"voxels_before", pred.count()},
                    {"voxels_after", cleaned.count()}});
      std::cout << "kept " << cleaned.count() << " of " << pred.count() << " voxel(s)\n";
      return 0;
    }

    if (*eval) {
      reject_unknown(cfg, {"tau"}, "evaluate");
      if (!given(eval_tau_opt)) eval_tau = config_value<double>(cfg, "tau", eval_tau);
      if (!(eval_tau >= 0.0)) throw ValidationError("tau must be >= 0");
      PredictionSet preds = load_predictions(eval_pred);
      DatasetManifest gt = load_manifest(eval_gt);
      DatasetEvaluation ev = evaluate_dataset(preds, gt, eval_tau, g.jobs);
      for (const auto& id : ev.unmatched_predictions) std::cerr << "warning: prediction '" << id << "' has no ground truth\n";
      for (const auto& id : ev.unmatched_ground_truth) std::cerr << "warning: ground truth '" << id << "' has no prediction\n";
      fs::create_directories(out);
      write_file_atomic(out / "metrics.csv", ev.to_csv());
      json summary = ev.summary_json();
      write_file_atomic(out / "summary.json", summary.dump(2) + "\n");
      write_report(out, "evaluate", {{"cases", ev.cases.size()}, {"tau", eval_tau}});
      std::cout << summary["metrics"].dump(2) << "\n";
      return 0;
    }

    if (*cmp) {
      ComparisonResult r = compare_metric_tables(cmp_tables[0], cmp_tables[1], cmp_metric);
      std::printf("metric=%s n=%zu W+=%g W-=%g p=%.6g%s\n", cmp_metric.c_str(), r.n_effective, r.statistic, r.w_minus,
                  r.p_value, r.exact ? " (exact)" : " (normal approximation)");
      if (given(out_opt)) {
        write_report(out, "compare",
                     {{"tables", cmp_tables},
                      {"metric", cmp_metric},
                      {"statistic", r.statistic},
                      {"w_minus", r.w_minus},
                      {"p_value", r.p_value},
                      {"n_effective", r.n_effective},
                      {"exact", r.exact}});
      }
      return 0;
    }

    if (*smp) {
      reject_unknown(cfg, {"strategy", "dim", "count"}, "sample");
      if (!given(smp_strategy_opt)) smp_strategy = config_value<std::string>(cfg, "strategy", smp_strategy);
      if (!given(smp_dim_opt)) smp_dim = config_value<std::size_t>(cfg, "dim", smp_dim);
      if (!given(smp_count_opt)) smp_count = config_value<std::size_t>(cfg, "count", smp_count);
      if (smp_dim < 1 || smp_count < 1) throw ValidationError("dim and count must be >= 1");
      Rng rng(g.seed);
      std::optional<LatentBatch> batch;
      if (smp_strategy == "sd") {
        batch = sample_standard(smp_dim, smp_count, rng);
      } else if (smp_strategy == "ud") {
        batch = sample_uniform(smp_dim, smp_count, rng);
      } else if (smp_strategy == "uds") {
        batch = sample_uds(smp_dim, smp_count);
      } else {
        throw ValidationError("strategy must be sd, ud or uds, got '" + smp_strategy + "'");
      }
      fs::create_directories(out);
      write_file_atomic(out / "latent.csv", batch_to_csv(*batch));
      json details = {{"strategy", smp_strategy}, {"dim", smp_dim}, {"count", smp_count}};
      if (smp_strategy != "uds") details["seed"] = g.seed;
      if (smp_count >= 2) details["min_pairwise_distance"] = min_pairwise_distance(*batch);
      write_report(out, "sample", details);
      std::cout << "wrote " << smp_count << " vector(s) to " << (out / "latent.csv").string() << "\n";
      return 0;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
