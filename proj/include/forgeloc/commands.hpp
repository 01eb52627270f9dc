// Command implementations behind the forgeloc CLI. Each returns a process
// exit code, writes data to files or `out`, and diagnostics to `err`.

#ifndef FORGELOC_COMMANDS_HPP_
#define FORGELOC_COMMANDS_HPP_

#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>

#include "forgeloc/io.hpp"
#include "forgeloc/learning.hpp"
#include "forgeloc/localization.hpp"
#include "forgeloc/metrics.hpp"
#include "forgeloc/pipeline.hpp"

namespace forgeloc {

struct EvalClsOptions {
  std::string scores_path;
  std::string gt_path;
  std::string out_path;  // report; empty to skip
  double threshold = kVideoScoreThreshold;
  Track track = Track::VideoClassification;
};

struct LocalizeOptions {
  std::string scores_path;
  std::optional<std::string> gt_path;
  std::string out_path;  // proposals
  std::string report_path;  // empty to skip
  DecoderConfig decoder;
  LocalizationEvalConfig eval;
  std::size_t workers = 1;
};

struct SimulateOptions {
  SimulationConfig sim;
  std::string out_path;  // report; empty to skip
  std::string proposals_path;
  std::string gt_path;
  std::string scores_path;
};

struct ToyTrainOptions {
  ToyConfig toy;
  std::size_t steps = 200;
  double lr = 0.1;
  std::string out_path;  // trajectory
};

namespace detail {

template <typename Fn>
int run_guarded(std::ostream& err, Fn&& fn) {
  try {
    fn();
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace detail

inline DecodeStrategy parse_strategy(const std::string& name) {
  if (name == "stride") return DecodeStrategy::StrideSegments;
  if (name == "sliding") return DecodeStrategy::SlidingWindow;
  if (name == "rules") return DecodeStrategy::RuleBased;
  throw std::invalid_argument("unknown strategy '" + name + "' (expected stride, sliding or rules)");
}

/// "start:step:stop" (inclusive) or a comma-separated list.
inline std::vector<double> parse_tiou_grid(const std::string& text) {
  std::vector<double> grid;
  auto number = [&text](const std::string& token) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != token.size()) throw std::invalid_argument("bad tIoU grid '" + text + "'");
    return v;
  };
  const auto first_colon = text.find(':');
  if (first_colon != std::string::npos) {
    const auto second_colon = text.find(':', first_colon + 1);
    if (second_colon == std::string::npos) throw std::invalid_argument("bad tIoU grid '" + text + "'");
    const double start = number(text.substr(0, first_colon));
    const double step = number(text.substr(first_colon + 1, second_colon - first_colon - 1));
    const double stop = number(text.substr(second_colon + 1));
    if (!(step > 0.0) || stop < start) throw std::invalid_argument("bad tIoU grid '" + text + "'");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) {
      grid.push_back(std::round((start + static_cast<double>(i) * step) * 1e9) / 1e9);
    }
  } else {
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto comma = text.find(',', pos);
      grid.push_back(number(text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos)));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  for (double t : grid) {
    if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("tIoU grid values must lie in (0, 1]");
  }
  return grid;
}

/// Per-video scores (first-place aggregation over frame scores) -> ROC AUC.
inline int cmd_eval_cls(const EvalClsOptions& opt, std::ostream& out, std::ostream& err) {
  return detail::run_guarded(err, [&] {
    if (opt.track == Track::TemporalLocalization) throw std::invalid_argument("eval-cls handles tracks 1 and 2");
    const auto gt = parse_ground_truth(opt.gt_path);
    const auto scores = parse_frame_scores(opt.scores_path);
    const auto report = evaluate_track(opt.track, aggregate_video_scores(scores, opt.threshold), gt);
    print_report(out, report);
    if (!opt.out_path.empty()) write_report(opt.out_path, report);
  });
}

inline int cmd_localize(const LocalizeOptions& opt, std::ostream& out, std::ostream& err) {
  return detail::run_guarded(err, [&] {
    validate(opt.decoder);
    if (opt.workers == 0) throw std::invalid_argument("--workers must be >= 1");
    std::optional<std::vector<GroundTruthRecord>> gt;
    auto scores = parse_frame_scores(opt.scores_path);
    if (opt.gt_path) {
      gt = parse_ground_truth(*opt.gt_path);
      scores = align_to_ground_truth(scores, *gt);
    }
    const auto proposals = localize_all(scores, opt.decoder, opt.workers);
    write_proposals(opt.out_path, proposals);
    std::size_t count = 0;
    for (const auto& entry : proposals) count += entry.second.size();
    out << "proposals=" << count << " videos=" << scores.size() << '\n';
    if (gt) {
      const auto report = evaluate_track(Track::TemporalLocalization, proposals, *gt, opt.eval);
      print_report(out, report);
      if (!opt.report_path.empty()) write_report(opt.report_path, report);
    }
  });
}

inline int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err) {
  return detail::run_guarded(err, [&] {
    const auto result = simulate(opt.sim);
    print_report(out, result.report);
    if (!opt.out_path.empty()) write_report(opt.out_path, result.report);
    if (!opt.proposals_path.empty()) write_proposals(opt.proposals_path, result.proposals);
    if (!opt.gt_path.empty()) write_ground_truth(opt.gt_path, result.ground_truth);
    if (!opt.scores_path.empty()) write_frame_scores(opt.scores_path, result.scores);
  });
}

inline int cmd_toy_train(const ToyTrainOptions& opt, std::ostream& out, std::ostream& err) {
  return detail::run_guarded(err, [&] {
    const auto trajectory = train_toy(make_toy_state(opt.toy), opt.steps, opt.lr, opt.toy.lambda);
    if (!opt.out_path.empty()) {
      auto file = detail::open_output(opt.out_path);
      write_trajectory(file, trajectory);
      detail::finish_output(file, opt.out_path);
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "final_loss=%.9f\nfinal_mean_cosine=%.9f\n", trajectory.back().loss,
                  trajectory.back().mean_cosine);
    out << buf;
  });
}

}  // namespace forgeloc

#endif  // FORGELOC_COMMANDS_HPP_
