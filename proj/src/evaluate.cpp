#include "spikeguard/evaluate.hpp"

#include <cmath>
#include <sstream>

#include "spikeguard/error.hpp"
#include "spikeguard/train.hpp"

namespace spikeguard {

namespace {

constexpr std::uint64_t kAttackEvalTag = 0xA77A;

}  // namespace

AttackOutcome attacked_accuracy(const Network& target, const Network& source, const Dataset& data,
                                const AttackConfig& cfg, std::size_t batch_size) {
  cfg.validate();
  require(batch_size >= 1, "batch size must be >= 1");
  require(data.size() > 0, "attack evaluation needs at least one sample");
  const std::size_t per = data.images.size() / data.size();
  const Rng root(cfg.seed);
  AttackOutcome out;
  out.correct.assign(data.size(), 0);
  double l2_sum = 0.0;
  std::size_t correct = 0;
  for (std::size_t start = 0, b = 0; start < data.size(); start += batch_size, ++b) {
    const std::size_t n = std::min(batch_size, data.size() - start);
    const Tensor x = data.images.slice(start, n);
    const std::vector<int> y(data.labels.begin() + static_cast<std::ptrdiff_t>(start),
                             data.labels.begin() + static_cast<std::ptrdiff_t>(start + n));
    const Tensor xa = run_attack(source, x, y, cfg, b);
    const auto pred = predict(target, xa, root.substream(Stream::Poisson, b, kAttackEvalTag));
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < per; ++k) {
        const double d = xa[i * per + k] - x[i * per + k];
        s += d * d;
        out.max_linf = std::max(out.max_linf, std::abs(d));
      }
      l2_sum += std::sqrt(s);
      const bool ok = pred[i] == y[i];
      out.correct[start + i] = ok ? 1 : 0;
      correct += ok ? 1 : 0;
    }
  }
  out.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  out.mean_l2 = l2_sum / static_cast<double>(data.size());
  return out;
}

bool EvalReport::operator==(const EvalReport& o) const {
  return eval_report_to_json(*this) == eval_report_to_json(o);
}

EvalReport evaluate(const Network& net, const Dataset& data, const EvalConfig& cfg, std::uint64_t seed) {
  EvalReport r;
  r.samples = data.size();
  r.clean_accuracy = clean_accuracy(net, data, cfg.batch_size, seed);
  auto run = [&](AttackConfig a, const std::string& grid) {
    if (a.seed == 0) a.seed = seed;
    const AttackOutcome o = attacked_accuracy(net, net, data, a, cfg.batch_size);
    r.entries.push_back({a.label(), a, grid, o.accuracy, o.mean_l2, o.max_linf});
  };
  for (const auto& a : cfg.attacks) run(a, "");
  for (double e : cfg.eps_sweep) {
    AttackConfig a = cfg.sweep_attack;
    a.epsilon = e;
    run(a, "eps_sweep");
  }
  for (std::size_t k : cfg.k_sweep) {
    AttackConfig a = cfg.sweep_attack;
    a.steps = k;
    run(a, "k_sweep");
  }
  return r;
}

json eval_report_to_json(const EvalReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries)
    entries.push_back({{"label", e.label},
                       {"attack", attack_to_json(e.attack)},
                       {"grid", e.grid},
                       {"accuracy", e.accuracy},
                       {"mean_l2", e.mean_l2},
                       {"max_linf", e.max_linf}});
  return json{{"samples", r.samples}, {"clean_accuracy", r.clean_accuracy}, {"entries", entries}};
}

EvalReport eval_report_from_json(const json& j) {
  auto field = [](const json& o, const char* key) -> const json& {
    if (!o.is_object() || !o.contains(key)) fail(ErrorCode::Format, std::string("eval report: missing '") + key + "'");
    return o.at(key);
  };
  EvalReport r;
  r.samples = field(j, "samples").get<std::size_t>();
  r.clean_accuracy = field(j, "clean_accuracy").get<double>();
  for (const auto& e : field(j, "entries")) {
    EvalEntry x;
    x.label = field(e, "label").get<std::string>();
    x.attack = attack_from_json(field(e, "attack"));
    x.grid = field(e, "grid").get<std::string>();
    x.accuracy = field(e, "accuracy").get<double>();
    x.mean_l2 = field(e, "mean_l2").get<double>();
    x.max_linf = field(e, "max_linf").get<double>();
    r.entries.push_back(std::move(x));
  }
  return r;
}

std::string eval_report_csv(const EvalReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "attack,grid,epsilon,steps,step_alpha,approx,accuracy,mean_l2,max_linf\n";
  os << "clean,,0,0,0,,"  << r.clean_accuracy << ",0,0\n";
  for (const auto& e : r.entries)
    os << to_string(e.attack.kind) << "," << e.grid << "," << e.attack.epsilon << "," << e.attack.steps << ","
       << e.attack.step_alpha << "," << to_string(e.attack.approx) << "," << e.accuracy << "," << e.mean_l2 << ","
       << e.max_linf << "\n";
  return os.str();
}

std::vector<ChecklistVerdict> obfuscation_checklist(const Network& target, const Network& substitute,
                                                    const Dataset& data, const ChecklistConfig& cfg,
                                                    std::uint64_t seed) {
  cfg.validate();
  const std::size_t K = target.spec().classes;
  const double tol = cfg.tolerance_points / 100.0;
  const std::size_t bs = cfg.batch_size;
  std::vector<ChecklistVerdict> out;

  AttackConfig fg{AttackKind::Fgsm, cfg.epsilon, cfg.epsilon, 1, cfg.approx};
  fg.seed = seed;
  AttackConfig pg{AttackKind::Pgd, cfg.epsilon, cfg.step_alpha, cfg.steps, cfg.approx};
  pg.seed = seed;
  const double clean = clean_accuracy(target, data, bs, seed);
  const AttackOutcome fgsm_o = attacked_accuracy(target, target, data, fg, bs);
  const AttackOutcome pgd_o = attacked_accuracy(target, target, data, pg, bs);
  {
    ChecklistVerdict v{1, "iterative_stronger_than_single_step", pgd_o.accuracy <= fgsm_o.accuracy, "", {}};
    v.detail = "PGD accuracy must not exceed FGSM accuracy";
    v.metrics = {{"clean_accuracy", clean}, {"fgsm_accuracy", fgsm_o.accuracy}, {"pgd_accuracy", pgd_o.accuracy}};
    out.push_back(v);
  }
  {
    const AttackOutcome bb = attacked_accuracy(target, substitute, data, pg, bs);
    ChecklistVerdict v{2, "black_box_weaker_than_white_box", bb.accuracy >= pgd_o.accuracy, "", {}};
    v.detail = "transfer accuracy from the substitute must be at least the white-box accuracy";
    v.metrics = {{"black_box_accuracy", bb.accuracy}, {"white_box_accuracy", pgd_o.accuracy}};
    out.push_back(v);
  }
  {
    std::vector<double> accs;
    bool monotone = true;
    for (double e : cfg.eps_grid) {
      AttackConfig a{AttackKind::Pgd, e, 2.5 * e / static_cast<double>(cfg.steps), cfg.steps, cfg.approx};
      a.seed = seed;
      accs.push_back(attacked_accuracy(target, target, data, a, bs).accuracy);
      if (accs.size() > 1 && accs.back() > accs[accs.size() - 2] + tol) monotone = false;
    }
    ChecklistVerdict v{3, "accuracy_decreases_with_epsilon", monotone, "", {}};
    v.detail = "accuracy over the epsilon grid must be non-increasing within the tolerance";
    v.metrics = {{"eps_grid", cfg.eps_grid}, {"accuracy", accs}, {"tolerance_points", cfg.tolerance_points}};
    out.push_back(v);
  }
  {
    AttackConfig a{AttackKind::Pgd, cfg.unbounded_epsilon, cfg.unbounded_alpha, cfg.unbounded_steps, cfg.approx};
    a.seed = seed;
    const double acc = attacked_accuracy(target, target, data, a, bs).accuracy;
    const double chance = 1.0 / static_cast<double>(K);
    ChecklistVerdict v{4, "unbounded_attack_reaches_chance", acc <= chance + 0.05, "", {}};
    v.detail = "unbounded PGD accuracy must be at most chance + 5 points";
    v.metrics = {{"accuracy", acc}, {"chance", chance}, {"epsilon", cfg.unbounded_epsilon}};
    out.push_back(v);
  }
  {
    const std::size_t n = std::min(cfg.random_subset, data.size());
    const std::size_t per = data.images.size() / data.size();
    const Rng root = Rng(seed).substream(Stream::Noise, 5);
    std::size_t random_only = 0, probed = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!pgd_o.correct[i]) continue;
      ++probed;
      Rng r = root.substream(Stream::Noise, i);
      Tensor xs({cfg.random_samples, per});
      for (std::size_t s = 0; s < cfg.random_samples; ++s)
        for (std::size_t k = 0; k < per; ++k)
          xs[s * per + k] = project(data.images[i * per + k] + r.uniform(-cfg.epsilon, cfg.epsilon),
                                    data.images[i * per + k], cfg.epsilon);
      const auto pred = predict(target, xs, root.substream(Stream::Poisson, i));
      for (int p : pred)
        if (p != data.labels[i]) {
          ++random_only;
          break;
        }
    }
    const double frac = n == 0 ? 0.0 : static_cast<double>(random_only) / static_cast<double>(n);
    ChecklistVerdict v{5, "random_sampling_finds_nothing_new", frac <= cfg.random_max_fraction, "", {}};
    v.detail = "samples where random points in the ball succeed but PGD fails must be rare";
    v.metrics = {{"subset", n},
                 {"probed", probed},
                 {"random_only_successes", random_only},
                 {"fraction", frac},
                 {"max_fraction", cfg.random_max_fraction}};
    out.push_back(v);
  }
  return out;
}

json checklist_to_json(const std::vector<ChecklistVerdict>& verdicts) {
  json arr = json::array();
  bool all = true;
  for (const auto& v : verdicts) {
    arr.push_back({{"test", v.id}, {"name", v.name}, {"pass", v.pass}, {"detail", v.detail}, {"metrics", v.metrics}});
    all = all && v.pass;
  }
  return json{{"verdicts", arr}, {"all_pass", all}};
}

}  // namespace spikeguard
