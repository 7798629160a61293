#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "plain/experiment.hpp"

namespace {

struct CliState {
  plain::ExperimentConfig cfg;
  std::string variant = "plain";
  int holdout_fold = 0;
};

void add_experiment_options(CLI::App* cmd, CliState& state) {
  auto& cfg = state.cfg;
  cmd->set_config("--config", "", "flat key=value config file; flags override");
  cmd->add_option("--data", cfg.data_path, "dataset file in the sparse text format")
      ->required();
  cmd->add_option("--variant", state.variant,
                  "plain | dnn | no-label-sim | no-instance-sim | two-stage");
  cmd->add_option("--k", cfg.k, "neighbors per node");
  cmd->add_option("--rho", cfg.rho, "monomial kernel exponent");
  cmd->add_option("--alpha", cfg.alpha, "instance regularizer weight");
  cmd->add_option("--beta", cfg.beta, "label regularizer weight");
  cmd->add_option("--eta", cfg.eta, "candidate consistency weight");
  cmd->add_option("--gamma", cfg.gamma, "propagation step size");
  cmd->add_option("--steps", cfg.steps,
                  "propagation steps per epoch; -1 picks 200 (or 50 at scale)");
  cmd->add_flag("--normalize,!--no-normalize", cfg.normalize,
                "column-wise min-max rescale of the pseudo-labels");
  cmd->add_option("--loss", cfg.loss, "mse | mae | bce | pmse");
  cmd->add_option("--learning-rate", cfg.learning_rate, "SGD learning rate");
  cmd->add_option("--weight-decay", cfg.weight_decay, "L2 decay on weights");
  cmd->add_option("--batch-size", cfg.batch_size, "mini-batch size");
  cmd->add_option("--epochs", cfg.epochs, "training epochs");
  cmd->add_flag("--mse-on-logits,!--no-mse-on-logits", cfg.mse_on_logits,
                "evaluate MSE/MAE on raw logits instead of sigmoid outputs");
  cmd->add_flag("--propagate-on-logits", cfg.propagate_on_logits,
                "feed raw logits to propagation");
  cmd->add_flag("--full-batch", cfg.full_batch,
                "one whole-dataset gradient step per epoch");
  cmd->add_flag("--label-graph-self-loops", cfg.label_graph_self_loops,
                "keep the 0.5 diagonal of the label co-occurrence graph");
  cmd->add_option("--folds", cfg.folds, "cross-validation folds");
  cmd->add_option("--seed", cfg.seed, "root RNG seed");
  cmd->add_option("--r", cfg.r,
                  "false positives to inject per example; 0 uses the file as-is");
  cmd->add_flag("--resample-per-fold", cfg.resample_per_fold,
                "re-draw the synthetic corruption inside every fold");
  cmd->add_option("--jobs", cfg.jobs, "folds to run concurrently");
  cmd->add_flag("--track-metrics", cfg.track_metrics,
                "record test metrics per epoch in curves.csv");
  cmd->add_flag("--dump-graphs", cfg.dump_graphs,
                "write coordinate-list dumps of the affinity graphs");
  cmd->add_flag("--allow-off-grid", cfg.allow_off_grid,
                "accept alpha/beta/eta outside the default search grids");
  cmd->add_option("--out-dir", cfg.out_dir, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partial multi-label learning by alternating graph label "
               "propagation and deep model training"};
  app.require_subcommand(1);

  std::string synth_in, synth_out;
  int synth_r = 3;
  std::uint64_t synth_seed = 1;
  CLI::App* synth = app.add_subcommand(
      "synth", "inject false-positive labels into a clean multi-label file");
  synth->add_option("--in", synth_in, "clean multi-label input file")->required();
  synth->add_option("--out", synth_out, "corrupted output file")->required();
  synth->add_option("--r", synth_r, "false positives per example");
  synth->add_option("--seed", synth_seed, "RNG seed");

  CliState cv_state;
  CLI::App* cv = app.add_subcommand("cv", "k-fold cross-validation");
  add_experiment_options(cv, cv_state);

  CliState train_state;
  CLI::App* train = app.add_subcommand("train", "single train/test run");
  add_experiment_options(train, train_state);
  train->add_option("--holdout-fold", train_state.holdout_fold,
                    "fold id held out for testing");

  CliState ablate_state;
  CLI::App* ablate = app.add_subcommand(
      "ablate", "compare plain with the dnn / no-label-sim / no-instance-sim variants");
  add_experiment_options(ablate, ablate_state);

  CliState timing_state;
  CLI::App* timing = app.add_subcommand(
      "timing", "measure graph build, one propagation epoch and one training epoch");
  add_experiment_options(timing, timing_state);

  CliState grid_state;
  CLI::App* grid = app.add_subcommand(
      "grid", "search alpha/beta/eta on an inner validation split");
  add_experiment_options(grid, grid_state);

  try {
    app.parse(argc, argv);

    if (synth->parsed()) {
      plain::cmd_synth(synth_in, synth_out, synth_r, synth_seed);
    } else if (cv->parsed()) {
      cv_state.cfg.variant = plain::variant_from_string(cv_state.variant);
      plain::RunResult result = plain::cmd_cv(cv_state.cfg);
      std::cout << "ranking_loss " << result.mean.ranking_loss << " +- "
                << result.stddev.ranking_loss << "\naverage_precision "
                << result.mean.average_precision << " +- "
                << result.stddev.average_precision << "\nhamming_loss "
                << result.mean.hamming_loss << " +- " << result.stddev.hamming_loss
                << "\n";
    } else if (train->parsed()) {
      train_state.cfg.variant = plain::variant_from_string(train_state.variant);
      plain::cmd_train(train_state.cfg, train_state.holdout_fold);
    } else if (ablate->parsed()) {
      ablate_state.cfg.variant = plain::variant_from_string(ablate_state.variant);
      plain::cmd_ablate(ablate_state.cfg);
    } else if (timing->parsed()) {
      timing_state.cfg.variant = plain::variant_from_string(timing_state.variant);
      plain::cmd_timing(timing_state.cfg);
    } else if (grid->parsed()) {
      grid_state.cfg.variant = plain::variant_from_string(grid_state.variant);
      plain::cmd_grid(grid_state.cfg);
    }
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const plain::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const plain::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
