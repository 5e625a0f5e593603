// Copyright 2026 The KbSlot Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance suite. Prints one PASS/FAIL line per criterion; the exit code
// is non-zero when any selected criterion fails.
//
//   kbslot_acceptance [--criterion N]... [--work DIR]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "cli/commands.h"
#include "cli/run_config.h"
#include "json.hpp"
#include "kbslot/checkpoint.h"
#include "kbslot/divergence.h"
#include "kbslot/evalharness.h"
#include "kbslot/kbstore.h"
#include "kbslot/model.h"
#include "kbslot/synthetic.h"
#include "kbslot/taxonomy.h"
#include "kbslot/training.h"

namespace kbslot::acceptance {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char *name;
  double limit_seconds;
  std::function<Outcome(const fs::path &work)> run;
};

std::string Fmt(const char *format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

Vector RandomVector(std::mt19937_64 &rng, int dim, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Vector v(dim);
  for (auto &x : v) x = n(rng);
  return v;
}

// 1. B(x, x) vanishes; under P = |v|^2 / 2 the divergence is |x - y|^2 / 2.
Outcome BregmanIdentity(const fs::path &) {
  const int dim = 64;
  BregmanNet net = InitBregman(4, dim, 11);
  std::mt19937_64 rng(1);
  for (auto &b : net.biases()) b = RandomVector(rng, static_cast<int>(b.rows()), 0.1);
  QuadraticPotential half(dim, 0.5);
  double self_max = 0.0, oracle_max = 0.0, batch_max = 0.0;
  Matrix xs(dim, 1000), ys(dim, 1000);
  for (int i = 0; i < 1000; ++i) {
    Vector x = RandomVector(rng, dim), y = RandomVector(rng, dim);
    xs.col(i) = x;
    ys.col(i) = y;
    self_max = std::max(self_max, std::abs(Bregman(net, x, x, net.epsilon())));
    oracle_max = std::max(
        oracle_max, std::abs(Bregman(half, x, y, 1e-2) - 0.5 * (x - y).squaredNorm()));
  }
  self_max = std::max(self_max, BregmanDistances(net, xs, xs, net.epsilon()).cwiseAbs().maxCoeff());
  Vector batched = BregmanDistances(half, xs, ys, 1e-2);
  for (int i = 0; i < 1000; ++i) {
    batch_max = std::max(batch_max,
                         std::abs(batched(i) - 0.5 * (xs.col(i) - ys.col(i)).squaredNorm()));
  }
  oracle_max = std::max(oracle_max, batch_max);
  return {self_max <= 1e-9 && oracle_max <= 1e-6,
          "max |B(x,x)| " + Fmt("%.3g", self_max) + " (<= 1e-9), max quadratic oracle error " +
              Fmt("%.3g", oracle_max) + " (<= 1e-6) over 1000 samples"};
}

struct Cube {
  double operator()(const Vector &v) const { return v(0) * v(0) * v(0); }
};

// Fourth-order Taylor polynomial of exp, summed over coordinates.
struct ExpPolynomial {
  double operator()(const Vector &v) const {
    double s = 0.0;
    for (double x : v) s += 1 + x + x * x / 2 + x * x * x / 6 + x * x * x * x / 24;
    return s;
  }
  static Vector Gradient(const Vector &v) {
    Vector g(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double x = v(i);
      g(i) = 1 + x + x * x / 2 + x * x * x / 6;
    }
    return g;
  }
};

// 2. The central difference quotient is second order: halving the step
// quarters the error.
Outcome SdqOrder(const fs::path &) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.2, 2.0);
  double lo = 1e9, hi = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Vector y(6);
    for (auto &x : y) x = u(rng);
    Vector cube_grad = Vector::Zero(6);
    cube_grad(0) = 3 * y(0) * y(0);
    const Vector poly_grad = ExpPolynomial::Gradient(y);
    for (double eps : {1e-1, 2e-2}) {
      double e1 = (SdqGradient(Cube{}, y, eps) - cube_grad).norm();
      double e2 = (SdqGradient(Cube{}, y, eps / 2) - cube_grad).norm();
      double p1 = (SdqGradient(ExpPolynomial{}, y, eps) - poly_grad).norm();
      double p2 = (SdqGradient(ExpPolynomial{}, y, eps / 2) - poly_grad).norm();
      for (double r : {e1 / e2, p1 / p2}) {
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
    }
  }
  return {lo >= 3.5 && hi <= 4.5,
          "error ratio on halving eps in [" + Fmt("%.4f", lo) + ", " + Fmt("%.4f", hi) +
              "] (required within [3.5, 4.5]) on x1^3 and a degree-4 exp polynomial"};
}

const EvalData &World() {
  static const EvalData data = ParseSyntheticData(GenerateSynthetic());
  return data;
}

// 3. Analytic gradients of the full model against central differences. The
// ReLU potential is piecewise linear, so the step is kept small enough that
// a perturbation rarely straddles a kink.
Outcome GradientCheck(const fs::path &) {
  ModelConfig cfg;
  cfg.hidden_dim = 2;
  cfg.bregman_dim = 8;
  cfg.recurrent_dropout = 0.0;
  const EvalData &data = World();
  std::vector<SlotExample> picks;
  for (size_t i = 0; i < data.corpus.size(); i += data.corpus.size() / 5) {
    picks.push_back(data.corpus[i]);
  }
  auto prepared = PrepareExamples(data.resources(), cfg, picks);
  double worst = 0.0;
  int checked = 0;
  for (size_t i = 0; i < prepared.size(); ++i) {
    ResolverModel model(cfg, 3 + i);
    GradCheckResult r = GradCheck(model, prepared[i], 1e-6, 50, 17 + i);
    worst = std::max(worst, r.max_relative_error);
    checked += r.checked;
  }
  return {checked >= 50 && worst <= 1e-3,
          "max relative error " + Fmt("%.3g", worst) + " (<= 1e-3) over " +
              std::to_string(checked) + " sampled parameters, " +
              std::to_string(prepared.size()) + " examples, step 1e-6"};
}

// 4. Softmax normalisation, KL sign and identity, gate monotonicity.
Outcome ProbabilityContracts(const fs::path &) {
  const EvalData &data = World();
  ModelConfig cfg;
  cfg.hidden_dim = 8;
  cfg.bregman_dim = 16;
  ResolverModel model(cfg, 5);
  std::vector<std::string> words;
  for (const auto &ex : data.corpus) {
    for (const auto &t : Tokenize(ex.context)) words.push_back(t);
  }
  words.push_back("zzqx");
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double sum_err = 0.0, kl_min = 0.0, kl_self = 0.0;
  int violations = 0;
  for (int i = 0; i < 500; ++i) {
    const SlotExample &ex = data.corpus[rng() % data.corpus.size()];
    std::string context;
    for (int w = 0; w < 1 + static_cast<int>(rng() % 6); ++w) {
      context += words[rng() % words.size()] + " ";
    }
    model.set_tau(0.05 + 0.9 * u(rng));
    Prediction p = Predict(model, data.resources(), ex.value, context);
    sum_err = std::max(sum_err, std::abs(p.probs.sum() - 1.0));

    TargetDistribution self{p.probs, {}};
    for (int k = 0; k < p.probs.size(); ++k) {
      if (p.probs(k) > 0) self.matched.push_back(k);
    }
    kl_self = std::max(kl_self, std::abs(KlLoss(p.probs, self)));
    Vector t = Vector::Zero(p.probs.size());
    for (auto &x : t) x = u(rng) < 0.5 ? u(rng) : 0.0;
    t(rng() % t.size()) += 0.1;
    t /= t.sum();
    TargetDistribution random{t, {}};
    kl_min = std::min(kl_min, KlLoss(p.probs, random));

    const double tau = model.tau();
    const double tau2 = std::min(1.0, tau + u(rng) * (1.0 - tau));
    std::vector<int> hi = HardGate(p.probs, tau2);
    if (!std::includes(p.accepted.begin(), p.accepted.end(), hi.begin(), hi.end())) ++violations;
    model.set_tau(std::max(0.01, std::min(0.99, tau2)));
    Prediction q = PredictPrepared(
        model, PrepareInput(data.resources(), model.config(), ex.value, context));
    if (!std::includes(p.accepted.begin(), p.accepted.end(), q.accepted.begin(), q.accepted.end())) {
      ++violations;
    }
  }
  const bool ok = sum_err <= 1e-6 && kl_min >= 0.0 && kl_self <= 1e-9 && violations == 0;
  return {ok, "max |sum p - 1| " + Fmt("%.3g", sum_err) + ", min KL " + Fmt("%.3g", kl_min) +
                  ", max KL(p||p) " + Fmt("%.3g", kl_self) + ", gate monotonicity violations " +
                  std::to_string(violations) + " over 500 inputs"};
}

// Level-synchronous traversal used as the oracle: level d+1 is built from
// level d in order, each node contributing its parents in declaration order.
std::vector<std::string> OracleHypernyms(const TaxonomyGraph &g, const std::string &term, int m,
                                         int max_depth) {
  std::vector<std::string> out;
  if (!g.Contains(term)) return out;
  std::set<std::string> seen = {term};
  std::vector<std::string> level = {term};
  for (int d = 0; d < max_depth && !level.empty(); ++d) {
    std::vector<std::string> next;
    for (const auto &node : level) {
      for (const auto &p : g.Parents(node)) {
        if (seen.insert(p).second) next.push_back(p);
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    level = std::move(next);
  }
  if (static_cast<int>(out.size()) > m) out.resize(m);
  return out;
}

// 5. Hypernym traversal and KB lookup invariants, exhaustively.
Outcome TaxonomyInvariants(const fs::path &) {
  const fs::path fixtures = KBSLOT_FIXTURE_DIR;
  TaxonomyGraph g = TaxonomyGraph::Load(fixtures / "taxonomy.tsv");
  const auto &nodes = g.nodes();
  const int n = static_cast<int>(nodes.size());
  // All-pairs shortest upward distances.
  std::map<std::string, int> id;
  for (int i = 0; i < n; ++i) id[nodes[i]] = i;
  const int inf = 1 << 20;
  std::vector<std::vector<int>> dist(n, std::vector<int>(n, inf));
  for (int i = 0; i < n; ++i) {
    dist[i][i] = 0;
    for (const auto &p : g.Parents(nodes[i])) dist[i][id[p]] = std::min(dist[i][id[p]], 1);
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        dist[i][j] = std::min(dist[i][j], dist[i][k] + dist[k][j]);

  long checks = 0;
  int failures = 0;
  for (int i = 0; i < n; ++i) {
    for (int depth = 1; depth <= n; ++depth) {
      std::vector<std::string> previous;
      for (int m = 1; m <= n; ++m) {
        std::vector<std::string> h = g.Hypernyms(nodes[i], m, depth);
        ++checks;
        bool ok = h == OracleHypernyms(g, nodes[i], m, depth);
        ok &= static_cast<int>(h.size()) <= m;
        ok &= std::equal(previous.begin(), previous.end(), h.begin());
        std::set<std::string> unique(h.begin(), h.end());
        ok &= unique.size() == h.size() && !unique.count(nodes[i]);
        for (const auto &a : h) ok &= dist[i][id[a]] >= 1 && dist[i][id[a]] <= depth;
        if (static_cast<int>(h.size()) < m) {
          int reachable = 0;
          for (int j = 0; j < n; ++j) reachable += j != i && dist[i][j] <= depth;
          ok &= reachable == static_cast<int>(h.size());
        }
        failures += !ok;
        previous = std::move(h);
      }
    }
  }

  std::vector<fs::path> kb_paths = {fixtures / "personalities.kbl", fixtures / "songs.kbl",
                                    fixtures / "companies.kbl", fixtures / "locations.kbl"};
  KbSet kbs = LoadKbSet(kb_paths);
  std::set<std::string> values;
  for (const auto &kb : kbs.kbs())
    for (const auto &e : kb.entries()) {
      values.insert(e.entry_name);
      for (const auto &a : e.aliases) values.insert(a);
    }
  values.insert("zzqx");
  for (const auto &value : values) {
    for (int top = 1; top <= 5; ++top) {
      FeatureTensor f = Lookup(kbs, value, top);
      ++checks;
      bool ok = f.per_kb.size() == kbs.size();
      for (size_t k = 0; k < kbs.size() && ok; ++k) {
        // Brute force: every entry whose name or alias has the same tokens.
        std::vector<const KbEntry *> hits;
        for (const auto &e : kbs.kbs()[k].entries()) {
          bool match = Tokenize(e.entry_name) == Tokenize(value);
          for (const auto &a : e.aliases) match |= Tokenize(a) == Tokenize(value);
          if (match) hits.push_back(&e);
        }
        std::stable_sort(hits.begin(), hits.end(), [](const KbEntry *a, const KbEntry *b) {
          return a->relevance > b->relevance;
        });
        if (static_cast<int>(hits.size()) > top) hits.resize(top);
        const auto &got = f.per_kb[k].entries;
        ok &= got.size() == hits.size();
        for (size_t e = 0; ok && e < got.size(); ++e) {
          ok &= got[e].relevance == hits[e]->relevance && got[e].entry_name == hits[e]->entry_name;
          if (e > 0) ok &= got[e - 1].relevance >= got[e].relevance;
        }
      }
      KeyTensor keys = BuildKeyTensor(f, g, 9, 2);
      std::set<std::string> unique(keys.keys.begin(), keys.keys.end());
      ok &= unique.size() == keys.keys.size();
      failures += !ok;
    }
  }
  return {failures == 0, std::to_string(checks) + " checks on a " + std::to_string(n) +
                             "-node graph, " + std::to_string(failures) + " failures"};
}

// 6. One example, repeated, is fitted to KL < 0.01 within 500 steps.
Outcome OverfitOne(const fs::path &) {
  const EvalData &data = World();
  ModelConfig cfg;  // desk profile
  std::vector<SlotExample> one = {data.corpus[7]};
  auto prepared = PrepareExamples(data.resources(), cfg, one);
  TrainConfig tc;
  tc.epochs = 500;
  tc.patience = 500;
  tc.batch_size = 1;
  tc.validation_fraction = 0.0;
  int hit = -1;
  double last = 0.0;
  TrainResult r = TrainPrepared(ResolverModel(cfg, 1), prepared, tc, [&](const EpochMetrics &m) {
    last = m.train_loss;
    if (hit < 0 && m.train_loss < 0.01) hit = m.steps;
  });
  return {hit > 0 && hit <= 500,
          hit > 0 ? "KL below 0.01 after " + std::to_string(hit) + " steps (<= 500), final " +
                        Fmt("%.3g", last)
                  : "KL never below 0.01 in 500 steps, final " + Fmt("%.3g", last)};
}

fs::path GenerateWorld(const fs::path &work) {
  const fs::path dir = work / "world";
  if (!fs::exists(dir / "config.yaml")) {
    std::ostringstream sink;
    cli::GenFixturesOptions gen;
    gen.out = dir;
    cli::RunGenFixtures(gen, sink);
  }
  return dir;
}

json ReadJson(const fs::path &p) {
  std::ifstream in(p);
  return json::parse(in);
}

// 7. Compare report over three seeds has the expected orderings.
Outcome CompareShape(const fs::path &work) {
  const fs::path world = GenerateWorld(work);
  cli::CompareOptions o;
  o.common.config = world / "config.yaml";
  o.common.out = work / "compare";
  o.oov = {0, 100};
  o.seeds = {1, 2, 3};
  std::ostringstream table;
  cli::RunCompare(o, table);
  json report = ReadJson(work / "compare" / "compare.json");
  std::map<std::pair<std::string, int>, std::pair<double, double>> cell;
  bool failed = false;
  for (const auto &c : report["cells"]) {
    failed |= c.value("failed", false);
    cell[{c["strategy"], c["oov_pct"]}] = {c["f1_mean"], c["accuracy_mean"]};
  }
  auto f1 = [&](const char *s, int p) { return cell[{s, p}].first; };
  auto acc = [&](const char *s, int p) { return cell[{s, p}].second; };
  const bool a = f1("resolver", 100) - f1("hm", 100) >= 15.0 &&
                 acc("resolver", 100) - acc("hm", 100) >= 20.0;
  const bool b = f1("hm", 0) >= f1("resolver", 0);
  bool c = true;
  for (int p : {0, 100}) {
    c &= f1("mlp", p) <= f1("hm", p) + 2.0 && acc("mlp", p) <= acc("hm", p) + 2.0;
  }
  std::ostringstream d;
  d << "(a) " << (a ? "ok" : "violated") << ": 100% OOV resolver F1/acc " << Fmt("%.2f", f1("resolver", 100))
    << "/" << Fmt("%.2f", acc("resolver", 100)) << " vs HM " << Fmt("%.2f", f1("hm", 100)) << "/"
    << Fmt("%.2f", acc("hm", 100)) << "; (b) " << (b ? "ok" : "violated") << ": 0% OOV HM F1 "
    << Fmt("%.2f", f1("hm", 0)) << " vs resolver " << Fmt("%.2f", f1("resolver", 0)) << "; (c) "
    << (c ? "ok" : "violated") << ": MLP F1 " << Fmt("%.2f", f1("mlp", 0)) << " / "
    << Fmt("%.2f", f1("mlp", 100)) << " vs HM " << Fmt("%.2f", f1("hm", 0)) << " / "
    << Fmt("%.2f", f1("hm", 100)) << (failed ? "; a cell failed" : "");
  return {a && b && c && !failed, d.str()};
}

// 8. Threshold and metric ablations point the expected way.
Outcome AblationDirection(const fs::path &work) {
  const fs::path world = GenerateWorld(work);
  cli::AblateOptions o;
  o.common.config = world / "config.yaml";
  o.common.out = work / "ablate";
  o.no_threshold = true;
  o.metric = "sq_euclidean";
  o.oov = {0, 100};
  o.seeds = {1, 2, 3};
  std::ostringstream table;
  cli::RunAblate(o, table);
  json report = ReadJson(work / "ablate" / "ablation.json");
  bool ok = true;
  std::ostringstream d;
  for (const auto &delta : report["deltas"]) {
    const std::string v = delta["variant"];
    if (v != "no_threshold" && v != "metric=sq_euclidean") continue;
    const double slack = v == "no_threshold" ? 0.0 : 1.0;
    const bool holds = delta["delta"].get<double>() >= -slack;
    ok &= holds;
    d << v << " @" << delta["oov_pct"].get<int>() << "%: base "
      << Fmt("%.2f", delta["base_accuracy"]) << " vs " << Fmt("%.2f", delta["variant_accuracy"])
      << (holds ? "" : " (violated)") << "; ";
  }
  std::string text = d.str();
  if (text.size() >= 2) text.resize(text.size() - 2);
  return {ok, text};
}

std::string Slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// 9. Identical train runs give identical blobs; save/load keeps predictions.
Outcome Reproducibility(const fs::path &work) {
  const fs::path world = GenerateWorld(work);
  std::ofstream(world / "short.yaml") << "profile: desk\npaths:\n"
                                         "  kbs: [kb/geography.kbl, kb/personality.kbl, kb/music.kbl]\n"
                                         "  taxonomy: taxonomy.tsv\n  embeddings: embeddings.txt\n"
                                         "  dataset: corpus.jsonl\n"
                                         "train:\n  epochs: 3\n";
  std::ostringstream sink;
  for (const char *run : {"train_a", "train_b"}) {
    cli::CommonOptions o{world / "short.yaml", work / run, std::nullopt};
    cli::RunTrain(o, sink);
  }
  const std::string a = Slurp(work / "train_a" / "checkpoint" / "weights.bin");
  const std::string b = Slurp(work / "train_b" / "checkpoint" / "weights.bin");
  const bool same_blob = !a.empty() && a == b;

  const EvalData &data = World();
  Checkpoint loaded = LoadCheckpoint(work / "train_a" / "checkpoint");
  const fs::path again = work / "roundtrip";
  SaveCheckpoint(loaded, again);
  Checkpoint reloaded = LoadCheckpoint(again);
  const bool same_resave = Slurp(again / "weights.bin") == a;
  int mismatches = 0;
  for (const auto &ex : data.corpus) {
    Prediction p = Predict(loaded.model, data.resources(), ex.value, ex.context);
    Prediction q = Predict(reloaded.model, data.resources(), ex.value, ex.context);
    mismatches += !(p.probs == q.probs && p.accepted == q.accepted && p.argmax == q.argmax);
  }

  // An in-process run from the same seed matches the command's blob.
  cli::RunConfig config = cli::LoadRunConfig(world / "short.yaml");
  TrainResult direct = Train(ResolverModel(config.model, config.seed), data.corpus, config.train,
                             data.resources());
  Checkpoint ck;
  ck.model = direct.model;
  SaveCheckpoint(ck, work / "direct");
  const bool same_direct = Slurp(work / "direct" / "weights.bin") == a;

  return {same_blob && same_resave && mismatches == 0 && same_direct,
          std::string("train blobs ") + (same_blob ? "identical" : "differ") + " (" +
              std::to_string(a.size()) + " bytes), re-saved blob " +
              (same_resave ? "identical" : "differs") + ", in-process blob " +
              (same_direct ? "identical" : "differs") + ", " + std::to_string(mismatches) +
              " prediction mismatches over " + std::to_string(data.corpus.size()) +
              " round-trip inputs"};
}

}  // namespace
}  // namespace kbslot::acceptance

int main(int argc, char **argv) {
  using namespace kbslot::acceptance;
  CLI::App app{"kbslot acceptance suite"};
  std::vector<int> selected;
  std::string work = (fs::temp_directory_path() / "kbslot_acceptance").string();
  app.add_option("--criterion", selected, "Criterion to run (repeatable); default all")
      ->check(CLI::Range(1, 9));
  app.add_option("--work", work, "Scratch directory");
  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::warn);

  const std::vector<Criterion> all = {
      {1, "bregman identity", 5, BregmanIdentity},
      {2, "sdq order", 1, SdqOrder},
      {3, "gradient check", 30, GradientCheck},
      {4, "probability contracts", 60, ProbabilityContracts},
      {5, "taxonomy and kb invariants", 5, TaxonomyInvariants},
      {6, "overfit one example", 120, OverfitOne},
      {7, "compare shape", 900, CompareShape},
      {8, "ablation direction", 1800, AblationDirection},
      {9, "reproducibility", 600, Reproducibility},
  };
  if (selected.empty()) {
    for (const auto &c : all) selected.push_back(c.id);
  }
  int failed = 0;
  for (int id : selected) {
    const Criterion &c = all[id - 1];
    const fs::path dir = fs::path(work) / ("criterion_" + std::to_string(id));
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run(dir);
    } catch (const std::exception &e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.limit_seconds;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("criterion %d %s: %s - %s; %.2f s (limit %.0f s%s)\n", id, c.name,
                pass ? "PASS" : "FAIL", o.detail.c_str(), secs, c.limit_seconds,
                in_time ? "" : ", exceeded");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
