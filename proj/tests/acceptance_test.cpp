// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.
//
//   acceptance_test <path-to-forgeloc-binary>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "forgeloc/forgeloc.hpp"
#include "generators.hpp"
#include "gradient_check.hpp"
#include "oracles.hpp"
#include "scratch.hpp"

namespace {

using namespace forgeloc;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

Outcome auc_oracle() {
  Outcome o;
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> size(2, 50), level(0, 7);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> scores;
    std::vector<BinaryLabel> labels;
    const int n = size(rng);
    for (int i = 0; i < n; ++i) {
      scores.push_back(trial % 2 ? level(rng) / 7.0 : std::uniform_real_distribution<double>()(rng));
      labels.push_back(i == 0 ? BinaryLabel::Fake : i == 1 ? BinaryLabel::Real
                                                           : (rng() % 2 ? BinaryLabel::Fake : BinaryLabel::Real));
    }
    worst = std::max(worst, std::abs(roc_auc(scores, labels) - oracle::concordant_pair_auc(scores, labels)));
  }
  o.require(worst <= 1e-9, "max |auc - pairs| = " + std::to_string(worst));
  o.detail = o.pass ? "200 instances, max deviation " + std::to_string(worst) : o.detail;
  return o;
}

Outcome tiou_exhaustive() {
  Outcome o;
  std::size_t pairs = 0;
  for (FrameIndex a0 = 0; a0 < 20; ++a0)
    for (FrameIndex a1 = a0 + 1; a1 <= 20; ++a1)
      for (FrameIndex b0 = 0; b0 < 20; ++b0)
        for (FrameIndex b1 = b0 + 1; b1 <= 20; ++b1) {
          ++pairs;
          const TemporalSegment a{a0, a1}, b{b0, b1};
          o.require(tiou(a, b) == oracle::enumerated_tiou(a, b), "mismatch");
        }
  if (o.pass) o.detail = std::to_string(pairs) + " segment pairs";
  return o;
}

Outcome ap_cases() {
  Outcome o;
  const std::vector<GroundTruthRecord> gt{{"v1", 100, BinaryLabel::Fake, {{10, 30}}}};
  o.require(average_precision({{"v1", {{{10, 30}, 0.9}}}}, gt, 0.5) == 1.0, "exact match != 1");
  o.require(average_precision({{"v1", {{{60, 80}, 0.9}, {{10, 30}, 0.8}}}}, gt, 0.5) == 0.5, "FP above TP != 0.5");
  o.require(average_precision({}, gt, 0.5) == 0.0, "empty != 0");

  std::mt19937_64 rng(103);
  std::uniform_int_distribution<int> start(0, 80), len(1, 25), count(0, 8);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<GroundTruthRecord> g;
    ProposalMap p;
    for (int v = 0; v < 3; ++v) {
      const std::string id = "v" + std::to_string(v);
      const FrameIndex s = start(rng);
      g.push_back({id, 110, BinaryLabel::Fake, {{s, s + len(rng)}}});
      const int k = count(rng);
      for (int i = 0; i < k; ++i) {
        const FrameIndex ps = start(rng);
        p[id].push_back({{ps, ps + len(rng)}, (rng() % 11) / 10.0});
      }
    }
    const auto curve = precision_recall_curve(p, g, 0.5);
    for (std::size_t i = 1; i < curve.interpolated_precision.size(); ++i) {
      o.require(curve.interpolated_precision[i] <= curve.interpolated_precision[i - 1], "interp precision rises");
    }
  }
  if (o.pass) o.detail = "3 hand cases, 500 monotone curves";
  return o;
}

Outcome rule_oracle() {
  Outcome o;
  const DecoderConfig cfg;  // min_real_run 4, min_proposal_len 10, top 4
  const auto indices = uniform_sample(100, 14).indices;
  for (int mask = 0; mask < (1 << 14) && o.pass; ++mask) {
    std::vector<int> bits(14);
    std::vector<double> scores(14);
    FrameLabelSequence labels;
    std::map<FrameIndex, double> entries;
    for (int i = 0; i < 14; ++i) {
      bits[i] = (mask >> i) & 1;
      scores[i] = static_cast<double>((mask * 31 + i * 17) % 101) / 100.0;
      labels.push_back(bits[i] ? BinaryLabel::Fake : BinaryLabel::Real);
      entries[indices[i]] = scores[i];
    }
    const auto got = rule_segments(labels, FrameScoreSeries("v", 100, entries), cfg, 100);
    const auto want = oracle::literal_rule_decoder(bits, scores, indices, 100, 4, 10, 4);
    bool same = got.size() == want.size();
    for (std::size_t i = 0; same && i < got.size(); ++i) {
      same = got[i].segment.start == want[i].start && got[i].segment.end == want[i].end &&
             std::abs(got[i].confidence - want[i].confidence) <= 1e-12;
    }
    o.require(same, "mismatch at mask " + std::to_string(mask));
  }
  if (o.pass) o.detail = "16384 sequences";
  return o;
}

Outcome nms_post_condition() {
  Outcome o;
  std::mt19937_64 rng(105);
  std::uniform_int_distribution<int> count(0, 30), start(0, 90), len(1, 30), level(0, 10);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<Proposal> input;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      const FrameIndex s = start(rng);
      input.push_back({{s, s + len(rng)}, level(rng) / 10.0});
    }
    const double thresh = 0.1 + 0.1 * (trial % 9);
    const auto kept = temporal_nms(input, thresh);
    for (std::size_t i = 0; i < kept.size(); ++i)
      for (std::size_t j = i + 1; j < kept.size(); ++j)
        o.require(tiou(kept[i].segment, kept[j].segment) <= thresh, "overlap above threshold");
    o.require(temporal_nms(kept, thresh) == kept, "not idempotent");
  }
  if (o.pass) o.detail = "1000 proposal sets";
  return o;
}

Outcome stride_formula() {
  Outcome o;
  auto single = [](FrameIndex frame, FrameIndex stride, FrameIndex n) {
    const auto out = stride_segments(FrameScoreSeries("v", n, {{frame, 0.9}}), 0.5, stride, n);
    return out.size() == 1 ? out[0].segment : TemporalSegment{-1, -1};
  };
  o.require(single(16, 16, 100) == TemporalSegment{8, 24}, "n=16,k=16 != [8,24)");
  o.require(single(0, 16, 100) == TemporalSegment{0, 8}, "left clip != [0,8)");
  o.require(single(99, 15, 100) == TemporalSegment{92, 100}, "right clip != [92,100)");
  if (o.pass) o.detail = "[8,24) [0,8) [92,100)";
  return o;
}

Outcome gradient_checks() {
  using forgeloc::testing::relative_error;
  Outcome o;
  std::mt19937_64 rng(107);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t dim = 2 + trial % 7;
    const auto d = forgeloc::testing::draw_dfq(dim, rng);
    const auto analytic = forgeloc::testing::flatten_grads(dfq_loss(d.batch, d.queue, d.center));
    const auto fd = finite_diff_grad(
        [&](const Feature& p) {
          const auto moved = forgeloc::testing::unflatten(d, p);
          return dfq_loss(moved.batch, moved.queue, moved.center).loss;
        },
        forgeloc::testing::flatten(d), forgeloc::testing::kFiniteDiffEps);
    worst = std::max(worst, relative_error(analytic, fd));

    const std::size_t n = 2 + trial % 7;
    const auto target = forgeloc::testing::random_target(n, rng);
    std::vector<Feature> tokens;
    Feature flat;
    for (std::size_t i = 0; i < n; ++i) {
      tokens.push_back(forgeloc::testing::random_unit(dim, rng));
      flat.insert(flat.end(), tokens.back().begin(), tokens.back().end());
    }
    const auto result = token_similarity_loss(tokens, target);
    Feature tok_analytic;
    for (const auto& g : result.token_grads) tok_analytic.insert(tok_analytic.end(), g.begin(), g.end());
    const auto tok_fd = finite_diff_grad(
        [&](const Feature& x) {
          return token_similarity_loss(forgeloc::testing::unflatten_tokens(x, n, dim), target).loss;
        },
        flat, forgeloc::testing::kFiniteDiffEps);
    worst = std::max(worst, relative_error(tok_analytic, tok_fd));
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "max relative error %.2e", worst);
  o.require(worst <= forgeloc::testing::kGradTolerance, buf);
  if (o.pass) o.detail = buf;
  return o;
}

Outcome toy_clustering() {
  Outcome o;
  const auto reference = train_toy(make_toy_state(ToyConfig{}), 200, 0.1);
  double best = 0.0;
  for (const auto& p : reference) best = std::max(best, p.mean_cosine);
  o.require(best >= 0.9, "mean cosine peaked at " + std::to_string(best));
  const auto slow = train_toy(make_toy_state(ToyConfig{}), 200, 1e-3);
  for (std::size_t t = 1; t < slow.size(); ++t) {
    o.require(slow[t].loss <= slow[t - 1].loss, "loss rose at step " + std::to_string(t));
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "final mean cosine %.6f", reference.back().mean_cosine);
  if (o.pass) o.detail = buf;
  return o;
}

Outcome noiseless_recovery() {
  Outcome o;
  for (auto strategy : {DecodeStrategy::StrideSegments, DecodeStrategy::SlidingWindow, DecodeStrategy::RuleBased}) {
    SimulateOptions opt;
    opt.sim.decoder.strategy = strategy;
    if (strategy != DecodeStrategy::RuleBased) opt.sim.decoder.thresholds = {0.5};
    std::ostringstream out, err;
    const int rc = cmd_simulate(opt, out, err);
    o.require(rc == 0, err.str());
    const auto result = simulate(opt.sim);
    for (const auto& [t, ap] : result.report.ap_per_tiou) {
      o.require(ap == 1.0, "AP@" + format_threshold(t) + " = " + std::to_string(ap));
    }
    o.require(result.report.ar_at_k == 1.0, "AR@2 below 1");
  }
  if (o.pass) o.detail = "stride, sliding, rules: AP 1.0 on 0.50:0.95, AR@2 1.0";
  return o;
}

Outcome cli_determinism(const std::string& cli) {
  Outcome o;
  if (cli.empty()) {
    o.require(false, "no CLI path given");
    return o;
  }
  forgeloc::testing::ScratchDir dir("accept");
  auto run = [&](const std::string& args) {
    const std::string cmd = "\"" + cli + "\" " + args + " > " + dir.file("stdout.txt") + " 2>&1";
    return std::system(cmd.c_str());
  };
  auto f = [&](const std::string& name) { return dir.file(name); };

  std::vector<std::pair<std::string, std::string>> checked;
  for (const char* tag : {"a", "b"}) {
    const std::string t = tag;
    o.require(run("simulate --videos 40 --sigma 0.3 --seed 9 --workers 3 --out " + f(t + "_sim.json") +
                  " --proposals-out " + f(t + "_sim_prop.jsonl") + " --gt-out " + f(t + "_gt.jsonl") +
                  " --scores-out " + f(t + "_scores.jsonl")) == 0,
              "simulate failed");
    o.require(run("localize --scores " + f("a_scores.jsonl") + " --gt " + f("a_gt.jsonl") + " --workers 2 --out " +
                  f(t + "_loc.jsonl") + " --report " + f(t + "_loc.json")) == 0,
              "localize failed");
    o.require(run("localize --scores " + f("a_scores.jsonl") + " --strategy sliding --window 3 --out " +
                  f(t + "_slide.jsonl")) == 0,
              "localize sliding failed");
    o.require(run("eval-cls --scores " + f("a_scores.jsonl") + " --gt " + f("a_gt.jsonl") + " --out " +
                  f(t + "_cls.json")) == 0,
              "eval-cls failed");
    o.require(run("toy-train --steps 50 --seed 3 --out " + f(t + "_toy.tsv")) == 0, "toy-train failed");
  }
  std::size_t files = 0;
  for (const char* name : {"_sim.json", "_sim_prop.jsonl", "_gt.jsonl", "_scores.jsonl", "_loc.jsonl", "_loc.json",
                           "_slide.jsonl", "_cls.json", "_toy.tsv"}) {
    const auto a = forgeloc::testing::slurp(f(std::string("a") + name));
    const auto b = forgeloc::testing::slurp(f(std::string("b") + name));
    o.require(!a.empty() && a == b, std::string("differs or empty: ") + name);
    ++files;
  }
  if (o.pass) o.detail = std::to_string(files) + " output files identical across reruns";
  return o;
}

Outcome format_round_trips() {
  Outcome o;
  std::mt19937_64 rng(111);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto gt = forgeloc::testing::random_ground_truth(rng);
    std::stringstream g;
    write_ground_truth(g, gt);
    o.require(parse_ground_truth(g) == gt, "ground truth");

    const auto scores = forgeloc::testing::random_scores(rng, true);
    std::stringstream s;
    write_frame_scores(s, scores);
    o.require(parse_frame_scores(s) == scores, "scores");

    const auto raw = forgeloc::testing::random_scores(rng, false);
    std::stringstream r;
    write_frame_scores(r, raw);
    const auto back = parse_frame_scores(r);
    o.require(back.size() == raw.size(), "raw score count");
    for (const auto& [id, series] : raw) {
      const auto a = series.scores(), b = back.at(id).scores();
      for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    }

    const auto proposals = forgeloc::testing::random_proposals(rng, true);
    std::stringstream p;
    write_proposals(p, proposals);
    o.require(parse_proposals(p) == proposals, "proposals");
  }
  o.require(worst < 5e-10, "score drift " + std::to_string(worst));
  char buf[96];
  std::snprintf(buf, sizeof buf, "1000 instances x 3 formats, max raw score drift %.1e", worst);
  if (o.pass) o.detail = buf;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"AUC equals concordant-pair statistic", auc_oracle},
      {"tIoU exhaustive on [0,20)", tiou_exhaustive},
      {"AP hand cases and monotone interpolation", ap_cases},
      {"rule decoder equals literal simulator", rule_oracle},
      {"NMS post-condition and idempotence", nms_post_condition},
      {"stride segment formula and clipping", stride_formula},
      {"analytic gradients match finite differences", gradient_checks},
      {"toy clustering and small-step descent", toy_clustering},
      {"noiseless end-to-end recovery", noiseless_recovery},
      {"CLI reruns are byte-identical", [&] { return cli_determinism(cli); }},
      {"format round-trips", format_round_trips},
  };
  int failures = 0;
  const auto started = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    failures += !outcome.pass;
    std::printf("%s %2zu %s (%s)\n", outcome.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, outcome.detail.c_str());
  }
  std::printf("%d/%zu criteria passed in %.1fs\n", static_cast<int>(criteria.size()) - failures, criteria.size(),
              std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
  return failures == 0 ? 0 : 1;
}
