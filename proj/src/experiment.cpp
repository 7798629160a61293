#include "plain/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "plain/graph.hpp"
#include "plain/propagation.hpp"

namespace plain {

namespace {

using nlohmann::json;
using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point start) {
  return std::chrono::duration<double>(clock_type::now() - start).count();
}

bool in_grid(double v, std::initializer_list<double> grid) {
  for (double g : grid)
    if (std::abs(v - g) <= 1e-12 * std::max(1.0, std::abs(g))) return true;
  return false;
}

json report_to_json(const EvalReport& r) {
  return json{{"ranking_loss", r.ranking_loss},
              {"average_precision", r.average_precision},
              {"hamming_loss", r.hamming_loss},
              {"n_evaluated", r.n_evaluated},
              {"n_skipped", r.n_skipped}};
}

json config_to_json(const ExperimentConfig& c) {
  return json{{"data_path", c.data_path},
              {"variant", to_string(c.variant)},
              {"k", c.k},
              {"rho", c.rho},
              {"label_graph_self_loops", c.label_graph_self_loops},
              {"alpha", c.alpha},
              {"beta", c.beta},
              {"eta", c.eta},
              {"gamma", c.gamma},
              {"steps", c.steps},
              {"normalize", c.normalize},
              {"loss", c.loss},
              {"learning_rate", c.learning_rate},
              {"weight_decay", c.weight_decay},
              {"batch_size", c.batch_size},
              {"epochs", c.epochs},
              {"mse_on_logits", c.mse_on_logits},
              {"propagate_on_logits", c.propagate_on_logits},
              {"full_batch", c.full_batch},
              {"folds", c.folds},
              {"seed", c.seed},
              {"r", c.r},
              {"resample_per_fold", c.resample_per_fold},
              {"jobs", c.jobs},
              {"track_metrics", c.track_metrics},
              {"dump_graphs", c.dump_graphs},
              {"allow_off_grid", c.allow_off_grid},
              {"out_dir", c.out_dir}};
}

struct CurveRow {
  int fold = 0, epoch = 0;
  double deep_loss = 0.0, prop_start = 0.0, prop_end = 0.0;
  bool has_metrics = false;
  EvalReport test;
};

void write_curves(const std::filesystem::path& path, const std::vector<CurveRow>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "fold,epoch,deep_loss,prop_objective_start,prop_objective_end,"
         "test_ranking_loss,test_average_precision,test_hamming_loss\n";
  for (const auto& r : rows) {
    out << r.fold << ',' << r.epoch << ',' << r.deep_loss << ',' << r.prop_start
        << ',' << r.prop_end << ',';
    if (r.has_metrics)
      out << r.test.ranking_loss << ',' << r.test.average_precision << ','
          << r.test.hamming_loss;
    else
      out << ",,";
    out << '\n';
  }
}

Dataset prepare_dataset(const ExperimentConfig& cfg) {
  Dataset ds = load_dataset(cfg.data_path, /*normalize=*/true);
  if (cfg.r > 0 && !cfg.resample_per_fold)
    ds = synthesize_pml(ds, {cfg.r, mix_seed(cfg.seed, 0x717)});
  return ds;
}

struct FoldOutput {
  FoldResult result;
  std::vector<CurveRow> curves;
  StageTimings timings;
  NetworkParams params;
};

TrainConfig make_train_config(const ExperimentConfig& cfg, Index n_train,
                              std::uint64_t fold_seed) {
  TrainConfig tc;
  tc.prop.eta = cfg.eta;
  tc.prop.alpha = cfg.alpha;
  tc.prop.beta = cfg.beta;
  tc.prop.gamma = cfg.gamma;
  tc.prop.steps = cfg.resolved_steps(n_train);
  tc.prop.normalize = cfg.normalize;
  tc.opt.learning_rate = cfg.learning_rate;
  tc.opt.weight_decay = cfg.weight_decay;
  tc.opt.batch_size = cfg.batch_size;
  tc.opt.seed = fold_seed;
  tc.loss = loss_kind_from_string(cfg.loss);
  tc.loss_opts.mse_on_logits = cfg.mse_on_logits;
  tc.epochs = cfg.epochs;
  tc.full_batch = cfg.full_batch;
  tc.propagate_on_logits = cfg.propagate_on_logits;
  tc.seed = fold_seed;
  return tc;
}

FoldOutput run_fold(const Dataset& base, const ExperimentConfig& cfg,
                    const FoldPlan& plan, int fold, VariantKind variant) {
  Dataset data = base;
  if (cfg.r > 0 && cfg.resample_per_fold)
    data = synthesize_pml(data, {cfg.r, mix_seed(cfg.seed, 0x717 + fold)});

  Dataset train_set = select_rows(data, plan.train_indices(fold));
  Dataset test_set = select_rows(data, plan.test_indices(fold));
  if (!test_set.has_truth())
    throw DataError("evaluation requires ground-truth labels in the data file");

  FoldOutput out;
  out.result.fold = fold;

  GraphConfig gc{cfg.k, cfg.rho, cfg.label_graph_self_loops};
  const auto t_graph = clock_type::now();
  SparseSym ax = build_instance_graph(train_set.features, gc);
  SparseSym ay = build_label_graph(train_set.candidates, gc);
  NormalizedLaplacian lx(ax), ly(ay);
  out.timings.graph_build_s = seconds_since(t_graph);

  if (cfg.dump_graphs) {
    std::filesystem::path dir(cfg.out_dir);
    ax.dump(dir / ("instance_graph_fold" + std::to_string(fold) + ".txt"));
    ay.dump(dir / ("label_graph_fold" + std::to_string(fold) + ".txt"));
  }

  TrainConfig tc = make_train_config(cfg, train_set.meta.n,
                                     mix_seed(cfg.seed, 0xF01D + fold));

  EpochCallback on_epoch = nullptr;
  if (cfg.track_metrics) {
    on_epoch = [&](const TrainState& state) {
      CurveRow row;
      row.fold = fold;
      row.epoch = state.epoch;
      row.deep_loss = state.history.back().deep_loss;
      row.prop_start = state.history.back().prop_objective_start;
      row.prop_end = state.history.back().prop_objective_end;
      row.has_metrics = true;
      row.test = evaluate(predict(state.params, test_set.features), *test_set.truth);
      out.curves.push_back(row);
    };
  }

  TrainState state = train(train_set, lx, ly, tc, variant, on_epoch);
  if (!cfg.track_metrics)
    for (const auto& rec : state.history) {
      CurveRow row;
      row.fold = fold;
      row.epoch = rec.epoch;
      row.deep_loss = rec.deep_loss;
      row.prop_start = rec.prop_objective_start;
      row.prop_end = rec.prop_objective_end;
      out.curves.push_back(row);
    }

  out.timings.training_total_s = state.training_seconds;
  out.timings.propagation_total_s = state.propagation_seconds;
  out.result.report = evaluate(predict(state.params, test_set.features), *test_set.truth);
  out.params = std::move(state.params);
  return out;
}

RunResult run_cv_variant(const Dataset& base, const ExperimentConfig& cfg,
                         const FoldPlan& plan, VariantKind variant,
                         std::vector<CurveRow>* all_curves,
                         const std::filesystem::path* results_path) {
  const int folds = plan.fold_count;
  std::vector<FoldOutput> outputs(folds);
  std::vector<std::string> errors(folds);
  std::vector<bool> done(folds, false);

  auto worker = [&](int fold) {
    try {
      outputs[fold] = run_fold(base, cfg, plan, fold, variant);
      done[fold] = true;
    } catch (const std::exception& e) {
      errors[fold] = e.what();
    }
  };

  if (cfg.jobs <= 1) {
    for (int f = 0; f < folds; ++f) worker(f);
  } else {
    std::vector<std::thread> pool;
    std::mutex next_mutex;
    int next = 0;
    auto drain = [&] {
      for (;;) {
        int f;
        {
          std::lock_guard<std::mutex> lock(next_mutex);
          if (next >= folds) return;
          f = next++;
        }
        worker(f);
      }
    };
    for (int t = 0; t < std::min(cfg.jobs, folds); ++t) pool.emplace_back(drain);
    for (auto& t : pool) t.join();
  }

  RunResult result;
  std::string first_error;
  for (int f = 0; f < folds; ++f) {
    if (!done[f]) {
      if (first_error.empty()) first_error = errors[f];
      continue;
    }
    result.per_fold.push_back(outputs[f].result);
    result.timings.graph_build_s += outputs[f].timings.graph_build_s;
    result.timings.propagation_total_s += outputs[f].timings.propagation_total_s;
    result.timings.training_total_s += outputs[f].timings.training_total_s;
    if (all_curves)
      all_curves->insert(all_curves->end(), outputs[f].curves.begin(),
                         outputs[f].curves.end());
  }

  if (!first_error.empty()) {
    // keep whatever completed, mark the output as truncated, then rethrow
    if (results_path) {
      RunResult partial = result;
      if (!partial.per_fold.empty()) {
        RunResult agg = aggregate(partial.per_fold);
        partial.mean = agg.mean;
        partial.stddev = agg.stddev;
      }
      json doc;
      doc["config"] = config_to_json(cfg);
      doc["complete"] = false;
      doc["error"] = first_error;
      doc["folds"] = json::array();
      for (const auto& fr : partial.per_fold) {
        json j = report_to_json(fr.report);
        j["fold"] = fr.fold;
        doc["folds"].push_back(j);
      }
      doc["aggregate"] = {{"mean", report_to_json(partial.mean)},
                          {"std", report_to_json(partial.stddev)}};
      std::ofstream out(*results_path);
      out << doc.dump(2) << '\n';
    }
    throw NumericalError("fold failed: " + first_error);
  }

  RunResult agg = aggregate(result.per_fold);
  result.mean = agg.mean;
  result.stddev = agg.stddev;
  return result;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (k < 1) throw DataError("k must be at least 1");
  if (rho <= 0.0) throw DataError("rho must be positive");
  if (gamma <= 0.0) throw DataError("gamma must be positive");
  if (eta < 0.0 || alpha < 0.0 || beta < 0.0)
    throw DataError("eta, alpha and beta must be non-negative");
  if (learning_rate <= 0.0) throw DataError("learning rate must be positive");
  if (weight_decay < 0.0) throw DataError("weight decay must be non-negative");
  if (batch_size < 1) throw DataError("batch size must be at least 1");
  if (epochs < 0) throw DataError("epochs must be non-negative");
  if (folds < 2) throw DataError("folds must be at least 2");
  if (r < 0) throw DataError("r must be non-negative");
  if (jobs < 1) throw DataError("jobs must be at least 1");
  loss_kind_from_string(loss);
  if (!allow_off_grid) {
    if (!in_grid(alpha, {0.001, 0.01, 0.1}))
      throw DataError("alpha outside {0.001, 0.01, 0.1}; pass --allow-off-grid to override");
    if (!in_grid(beta, {0.001, 0.01, 0.1}))
      throw DataError("beta outside {0.001, 0.01, 0.1}; pass --allow-off-grid to override");
    if (!in_grid(eta, {0.1, 1.0, 10.0}))
      throw DataError("eta outside {0.1, 1, 10}; pass --allow-off-grid to override");
  }
}

int ExperimentConfig::resolved_steps(Index n) const {
  if (steps >= 0) return steps;
  return n >= 50000 ? 50 : 200;
}

RunResult aggregate(const std::vector<FoldResult>& folds) {
  RunResult result;
  result.per_fold = folds;
  const int n = static_cast<int>(folds.size());
  if (n == 0) return result;

  auto accumulate = [&](auto getter) {
    double mean = 0.0;
    for (const auto& f : folds) mean += getter(f.report);
    mean /= n;
    double var = 0.0;
    for (const auto& f : folds) {
      double d = getter(f.report) - mean;
      var += d * d;
    }
    double sd = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
    return std::pair<double, double>(mean, sd);
  };

  auto [rl_m, rl_s] = accumulate([](const EvalReport& r) { return r.ranking_loss; });
  auto [ap_m, ap_s] = accumulate([](const EvalReport& r) { return r.average_precision; });
  auto [hl_m, hl_s] = accumulate([](const EvalReport& r) { return r.hamming_loss; });
  result.mean.ranking_loss = rl_m;
  result.mean.average_precision = ap_m;
  result.mean.hamming_loss = hl_m;
  result.stddev.ranking_loss = rl_s;
  result.stddev.average_precision = ap_s;
  result.stddev.hamming_loss = hl_s;
  for (const auto& f : folds) {
    result.mean.n_evaluated += f.report.n_evaluated;
    result.mean.n_skipped += f.report.n_skipped;
  }
  return result;
}

void cmd_synth(const std::filesystem::path& in_path,
               const std::filesystem::path& out_path, int r, std::uint64_t seed) {
  Dataset clean = load_dataset(in_path, /*normalize=*/false);
  Dataset pml = synthesize_pml(clean, {r, seed});
  save_dataset(pml, out_path);

  double before = clean.candidates.sum() / static_cast<double>(clean.meta.n);
  double after = pml.candidates.sum() / static_cast<double>(pml.meta.n);
  int fallback = 0;
  for (Index i = 0; i < clean.meta.n; ++i)
    if (clean.meta.L - clean.truth->row(i).sum() < r) ++fallback;
  std::cout << "wrote " << out_path.string() << "\n"
            << "examples: " << pml.meta.n << ", labels: " << pml.meta.L << "\n"
            << "mean candidate cardinality: " << before << " -> " << after
            << " (injected " << r << " per example, " << fallback
            << " fallback rows)\n";
}

RunResult cmd_cv(const ExperimentConfig& cfg) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out_dir);
  const std::filesystem::path results_path =
      std::filesystem::path(cfg.out_dir) / "results.json";

  Dataset base = prepare_dataset(cfg);
  FoldPlan plan = make_folds(base.meta, cfg.folds, mix_seed(cfg.seed, 0xF01D5));

  std::vector<CurveRow> curves;
  RunResult result =
      run_cv_variant(base, cfg, plan, cfg.variant, &curves, &results_path);

  json doc;
  doc["config"] = config_to_json(cfg);
  doc["complete"] = true;
  doc["folds"] = json::array();
  for (const auto& fr : result.per_fold) {
    json j = report_to_json(fr.report);
    j["fold"] = fr.fold;
    doc["folds"].push_back(j);
  }
  doc["aggregate"] = {{"mean", report_to_json(result.mean)},
                      {"std", report_to_json(result.stddev)}};
  doc["timings"] = {{"graph_build_s", result.timings.graph_build_s},
                    {"propagation_total_s", result.timings.propagation_total_s},
                    {"training_total_s", result.timings.training_total_s}};
  std::ofstream out(results_path);
  if (!out) throw DataError("cannot write " + results_path.string());
  out << doc.dump(2) << '\n';

  write_curves(std::filesystem::path(cfg.out_dir) / "curves.csv", curves);
  return result;
}

AblationResult cmd_ablate(const ExperimentConfig& cfg) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out_dir);

  Dataset base = prepare_dataset(cfg);
  FoldPlan plan = make_folds(base.meta, cfg.folds, mix_seed(cfg.seed, 0xF01D5));

  AblationResult result;
  const VariantKind variants[] = {VariantKind::PLAIN, VariantKind::DNN_ONLY,
                                  VariantKind::NO_LABEL_SIM,
                                  VariantKind::NO_INSTANCE_SIM};
  for (VariantKind v : variants)
    result.runs.emplace_back(v, run_cv_variant(base, cfg, plan, v, nullptr, nullptr));

  json doc;
  doc["config"] = config_to_json(cfg);
  doc["variants"] = json::array();
  std::ostringstream table;
  table << "variant,ranking_loss,average_precision,hamming_loss\n";
  for (const auto& [v, run] : result.runs) {
    json j;
    j["variant"] = to_string(v);
    j["aggregate"] = {{"mean", report_to_json(run.mean)},
                      {"std", report_to_json(run.stddev)}};
    j["folds"] = json::array();
    for (const auto& fr : run.per_fold) {
      json jf = report_to_json(fr.report);
      jf["fold"] = fr.fold;
      j["folds"].push_back(jf);
    }
    doc["variants"].push_back(j);
    table << to_string(v) << ',' << run.mean.ranking_loss << ','
          << run.mean.average_precision << ',' << run.mean.hamming_loss << '\n';
  }
  std::ofstream out(std::filesystem::path(cfg.out_dir) / "ablation.json");
  out << doc.dump(2) << '\n';
  std::ofstream csv(std::filesystem::path(cfg.out_dir) / "ablation.csv");
  csv << table.str();
  std::cout << table.str();
  return result;
}

TimingRow cmd_timing(const ExperimentConfig& cfg) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out_dir);

  Dataset data = prepare_dataset(cfg);
  TimingRow row;
  row.dataset = std::filesystem::path(cfg.data_path).stem().string();
  row.n = data.meta.n;
  row.d = data.meta.d;
  row.L = data.meta.L;

  GraphConfig gc{cfg.k, cfg.rho, cfg.label_graph_self_loops};
  auto t0 = clock_type::now();
  SparseSym ax = build_instance_graph(data.features, gc);
  SparseSym ay = build_label_graph(data.candidates, gc);
  NormalizedLaplacian lx(ax), ly(ay);
  row.graph_build_s = seconds_since(t0);

  TrainConfig tc = make_train_config(cfg, data.meta.n, mix_seed(cfg.seed, 0x7133));
  tc.epochs = 1;
  TrainState state = train(data, lx, ly, tc, VariantKind::PLAIN);
  row.training_epoch_s = state.training_seconds;
  row.propagation_epoch_s = state.propagation_seconds;

  std::ofstream csv(std::filesystem::path(cfg.out_dir) / "timing.csv");
  csv << "dataset,n,d,L,graph_build_s,propagation_epoch_s,training_epoch_s\n"
      << row.dataset << ',' << row.n << ',' << row.d << ',' << row.L << ','
      << row.graph_build_s << ',' << row.propagation_epoch_s << ','
      << row.training_epoch_s << '\n';
  std::cout << "graph build: " << row.graph_build_s
            << " s, propagation epoch: " << row.propagation_epoch_s
            << " s, training epoch: " << row.training_epoch_s << " s\n";
  return row;
}

GridResult cmd_grid(const ExperimentConfig& cfg) {
  cfg.validate();
  Dataset base = prepare_dataset(cfg);

  // inner validation split: one fold of an 80/20 plan held out
  FoldPlan plan = make_folds(base.meta, 5, mix_seed(cfg.seed, 0x96D));
  Dataset train_set = select_rows(base, plan.train_indices(0));
  Dataset val_set = select_rows(base, plan.test_indices(0));
  if (!val_set.has_truth())
    throw DataError("grid search requires ground-truth labels for validation");

  GraphConfig gc{cfg.k, cfg.rho, cfg.label_graph_self_loops};
  SparseSym ax = build_instance_graph(train_set.features, gc);
  SparseSym ay = build_label_graph(train_set.candidates, gc);
  NormalizedLaplacian lx(ax), ly(ay);

  GridResult best;
  best.validation_ap = -1.0;
  for (double alpha : {0.001, 0.01, 0.1})
    for (double beta : {0.001, 0.01, 0.1})
      for (double eta : {0.1, 1.0, 10.0}) {
        ExperimentConfig trial = cfg;
        trial.alpha = alpha;
        trial.beta = beta;
        trial.eta = eta;
        TrainConfig tc = make_train_config(trial, train_set.meta.n,
                                           mix_seed(cfg.seed, 0x9614));
        TrainState state = train(train_set, lx, ly, tc, cfg.variant);
        double ap = average_precision(predict(state.params, val_set.features),
                                      *val_set.truth);
        best.table.emplace_back(alpha, beta, eta, ap);
        std::cout << "alpha=" << alpha << " beta=" << beta << " eta=" << eta
                  << " -> val AP " << ap << '\n';
        if (ap > best.validation_ap) {
          best.validation_ap = ap;
          best.alpha = alpha;
          best.beta = beta;
          best.eta = eta;
        }
      }
  std::cout << "best: alpha=" << best.alpha << " beta=" << best.beta
            << " eta=" << best.eta << " (val AP " << best.validation_ap << ")\n";
  return best;
}

EvalReport cmd_train(const ExperimentConfig& cfg, int holdout_fold) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out_dir);

  Dataset base = prepare_dataset(cfg);
  FoldPlan plan = make_folds(base.meta, cfg.folds, mix_seed(cfg.seed, 0xF01D5));
  if (holdout_fold < 0 || holdout_fold >= cfg.folds)
    throw DataError("holdout fold out of range");

  FoldOutput out = run_fold(base, cfg, plan, holdout_fold, cfg.variant);

  write_curves(std::filesystem::path(cfg.out_dir) / "curves.csv", out.curves);
  save_params(out.params, std::filesystem::path(cfg.out_dir) / "checkpoint.txt");

  json doc;
  doc["config"] = config_to_json(cfg);
  doc["holdout_fold"] = holdout_fold;
  doc["report"] = report_to_json(out.result.report);
  std::ofstream js(std::filesystem::path(cfg.out_dir) / "results.json");
  js << doc.dump(2) << '\n';

  std::cout << "ranking_loss=" << out.result.report.ranking_loss
            << " average_precision=" << out.result.report.average_precision
            << " hamming_loss=" << out.result.report.hamming_loss << '\n';
  return out.result.report;
}

}  // namespace plain
