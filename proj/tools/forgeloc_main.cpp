// forgeloc: evaluation and post-processing for video forgery localization.
//
//   forgeloc eval-cls  --scores S --gt G [--out report.json]
//   forgeloc localize  --scores S [--gt G] --strategy rules --out proposals.jsonl
//   forgeloc simulate  --videos 200 --sigma 0.3 --seed 42 --strategy rules --out report.json
//   forgeloc toy-train --steps 200 --lr 0.1 --seed 7 --out trajectory.tsv

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "forgeloc/commands.hpp"

namespace {

struct DecoderFlags {
  std::string strategy = "rules";
  std::optional<double> threshold;
  std::vector<double> thresholds = forgeloc::DecoderConfig{}.thresholds;
  long long stride = 0;
  std::size_t window = forgeloc::DecoderConfig{}.window_len;
  std::size_t min_real_run = forgeloc::DecoderConfig{}.min_real_run;
  std::size_t min_len = forgeloc::DecoderConfig{}.min_proposal_len;
  std::size_t top_k = forgeloc::DecoderConfig{}.max_proposals;
  double nms_tiou = forgeloc::DecoderConfig{}.nms_tiou;
  std::string tiou_grid = "0.5:0.05:0.95";

  void attach(CLI::App* app) {
    app->add_option("--strategy", strategy, "Decoder: stride, sliding or rules")
        ->check(CLI::IsMember({"stride", "sliding", "rules"}))
        ->capture_default_str();
    app->add_option("--threshold", threshold, "Frame threshold for the stride/sliding decoders (default 0.5)");
    app->add_option("--thresholds", thresholds, "Rule-decoder thresholds, ascending")
        ->delimiter(',')
        ->capture_default_str();
    app->add_option("--stride", stride, "Sample spacing in frames for the stride decoder (0 = infer)")
        ->capture_default_str();
    app->add_option("--window", window, "Sliding window length in sampled frames")->capture_default_str();
    app->add_option("--min-real-run", min_real_run, "Real runs shorter than this become fake")
        ->capture_default_str();
    app->add_option("--min-len", min_len, "Fake runs must be longer than this to become proposals")
        ->capture_default_str();
    app->add_option("--top-k", top_k, "Proposals kept per threshold")->capture_default_str();
    app->add_option("--nms-tiou", nms_tiou, "NMS suppression tIoU")->capture_default_str();
    app->add_option("--tiou-grid", tiou_grid, "start:step:stop or comma list")->capture_default_str();
  }

  forgeloc::DecoderConfig decoder() const {
    forgeloc::DecoderConfig cfg;
    cfg.strategy = forgeloc::parse_strategy(strategy);
    if (cfg.strategy == forgeloc::DecodeStrategy::RuleBased) {
      cfg.thresholds = thresholds;
    } else {
      cfg.thresholds = {threshold.value_or(0.5)};
    }
    cfg.stride = stride;
    cfg.window_len = window;
    cfg.min_real_run = min_real_run;
    cfg.min_proposal_len = min_len;
    cfg.max_proposals = top_k;
    cfg.nms_tiou = nms_tiou;
    forgeloc::validate(cfg);
    return cfg;
  }

  forgeloc::LocalizationEvalConfig eval() const {
    forgeloc::LocalizationEvalConfig cfg;
    cfg.tiou_grid = forgeloc::parse_tiou_grid(tiou_grid);
    return cfg;
  }
};

// Flag values are validated before any command starts; violations are usage errors.
template <typename Fn>
int with_validated_config(Fn&& build) {
  try {
    build();
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evaluation and post-processing for video face-forgery localization"};
  app.require_subcommand(1);

  forgeloc::EvalClsOptions eval_cls;
  int eval_track = 2;
  auto* eval_cmd = app.add_subcommand("eval-cls", "ROC AUC for image/video classification (tracks 1-2)");
  eval_cmd->add_option("--scores", eval_cls.scores_path, "Frame-score file")->required();
  eval_cmd->add_option("--gt", eval_cls.gt_path, "Ground-truth file")->required();
  eval_cmd->add_option("--out", eval_cls.out_path, "Report file");
  eval_cmd->add_option("--threshold", eval_cls.threshold, "Fake-frame threshold for video scores")
      ->capture_default_str();
  eval_cmd->add_option("--track", eval_track, "1 or 2")->check(CLI::IsMember({1, 2}))->capture_default_str();

  forgeloc::LocalizeOptions localize;
  DecoderFlags localize_flags;
  std::string localize_gt;
  auto* localize_cmd = app.add_subcommand("localize", "Decode frame scores into temporal proposals");
  localize_cmd->add_option("--scores", localize.scores_path, "Frame-score file")->required();
  localize_cmd->add_option("--gt", localize_gt, "Ground-truth file; enables evaluation");
  localize_cmd->add_option("--out", localize.out_path, "Proposal file")->required();
  localize_cmd->add_option("--report", localize.report_path, "Report file (with --gt)");
  localize_cmd->add_option("--workers", localize.workers, "Worker threads")
      ->default_val(forgeloc::default_workers());
  localize_flags.attach(localize_cmd);

  forgeloc::SimulateOptions simulate;
  DecoderFlags simulate_flags;
  auto* simulate_cmd = app.add_subcommand("simulate", "Synthetic ground truth, scores, decoding and evaluation");
  simulate_cmd->add_option("--videos", simulate.sim.n_videos, "Number of videos")->capture_default_str();
  simulate_cmd->add_option("--frames", simulate.sim.frames_per_video, "Frames per video")->capture_default_str();
  simulate_cmd->add_option("--sigma", simulate.sim.sigma, "Score noise std")->capture_default_str();
  simulate_cmd->add_option("--flip-prob", simulate.sim.flip_prob, "Score flip probability")->capture_default_str();
  simulate_cmd->add_option("--seed", simulate.sim.seed, "Random seed")->capture_default_str();
  simulate_cmd->add_option("--workers", simulate.sim.workers, "Worker threads")
      ->default_val(forgeloc::default_workers());
  simulate_cmd->add_option("--out", simulate.out_path, "Report file");
  simulate_cmd->add_option("--proposals-out", simulate.proposals_path, "Write decoded proposals");
  simulate_cmd->add_option("--gt-out", simulate.gt_path, "Write generated ground truth");
  simulate_cmd->add_option("--scores-out", simulate.scores_path, "Write generated frame scores");
  simulate_flags.attach(simulate_cmd);

  forgeloc::ToyTrainOptions toy;
  auto* toy_cmd = app.add_subcommand("toy-train", "Toy feature-queue / positive-center training run");
  toy_cmd->add_option("--steps", toy.steps, "Gradient steps")->check(CLI::PositiveNumber)->capture_default_str();
  toy_cmd->add_option("--lr", toy.lr, "Learning rate")->check(CLI::NonNegativeNumber)->capture_default_str();
  toy_cmd->add_option("--dim", toy.toy.dim, "Feature dimension")->capture_default_str();
  toy_cmd->add_option("--reals", toy.toy.reals, "Real features in the batch")->capture_default_str();
  toy_cmd->add_option("--fakes", toy.toy.fakes, "Fake features in the batch")->capture_default_str();
  toy_cmd->add_option("--queue", toy.toy.queue_capacity, "Queue capacity")->capture_default_str();
  toy_cmd->add_option("--lambda", toy.toy.lambda, "Positive-center loss weight")->capture_default_str();
  toy_cmd->add_option("--seed", toy.toy.seed, "Random seed")->capture_default_str();
  toy_cmd->add_option("--out", toy.out_path, "Trajectory file (TSV)");

  CLI11_PARSE(app, argc, argv);

  if (*eval_cmd) {
    eval_cls.track = static_cast<forgeloc::Track>(eval_track);
    return forgeloc::cmd_eval_cls(eval_cls, std::cout, std::cerr);
  }
  if (*localize_cmd) {
    if (int rc = with_validated_config([&] {
          localize.decoder = localize_flags.decoder();
          localize.eval = localize_flags.eval();
          if (!localize_gt.empty()) localize.gt_path = localize_gt;
        })) {
      return rc;
    }
    return forgeloc::cmd_localize(localize, std::cout, std::cerr);
  }
  if (*simulate_cmd) {
    if (int rc = with_validated_config([&] {
          simulate.sim.decoder = simulate_flags.decoder();
          simulate.sim.eval = simulate_flags.eval();
          forgeloc::validate(simulate.sim);
        })) {
      return rc;
    }
    return forgeloc::cmd_simulate(simulate, std::cout, std::cerr);
  }
  return forgeloc::cmd_toy_train(toy, std::cout, std::cerr);
}
