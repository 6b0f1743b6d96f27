#include "spikeguard/harness.hpp"

#include <filesystem>
#include <sstream>

#include "spikeguard/error.hpp"
#include "spikeguard/verify.hpp"

namespace spikeguard {

namespace {

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir);
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

void write_json(const std::string& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

Dataset synth_split(const ExperimentConfig& cfg, bool test) {
  const SynthConfig& s = cfg.data.synth;
  Dataset d = synth_blobs(Rng(cfg.seed).substream(Stream::Dataset, test ? 2 : 1), test ? s.n_test : s.n_train,
                          s.classes, s.dim, s.sep);
  squash_unit_interval(d, s.sep + 4.0);
  return d;
}

Checkpoint load_for(const ExperimentConfig& cfg, const std::string& path) {
  require(!path.empty(), "a checkpoint path is required");
  Checkpoint ck = load_checkpoint(path);
  if (ck.net.spec().input_size() != cfg.model.input_size() || ck.net.spec().classes != cfg.model.classes)
    fail(ErrorCode::ShapeMismatch, "checkpoint model does not match the configured data shape");
  return ck;
}

}  // namespace

Dataset load_train_set(const ExperimentConfig& cfg) {
  if (cfg.data.source == "synth") return synth_split(cfg, false);
  Dataset d = load_mnist_idx(cfg.data.train_images, cfg.data.train_labels);
  return cfg.data.train_limit ? d.head(cfg.data.train_limit) : d;
}

Dataset load_test_set(const ExperimentConfig& cfg) {
  if (cfg.data.source == "synth") return synth_split(cfg, true);
  Dataset d = load_mnist_idx(cfg.data.test_images, cfg.data.test_labels);
  return cfg.data.test_limit ? d.head(cfg.data.test_limit) : d;
}

json run_train(const ExperimentConfig& cfg, const std::string& checkpoint_path) {
  cfg.validate();
  const Dataset tr = load_train_set(cfg);
  const Dataset te = load_test_set(cfg);
  TrainResult res;
  try {
    res = train(cfg.model, cfg.train, tr, &te, cfg.seed);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Numeric)
      write_json(out_path(cfg, "nan_dump.json"), {{"error", e.what()}, {"config", config_to_json(cfg)}});
    throw;
  }
  const std::string ck_path = checkpoint_path.empty() ? out_path(cfg, "checkpoint.bin") : checkpoint_path;
  if (const auto parent = std::filesystem::path(ck_path).parent_path(); !parent.empty())
    std::filesystem::create_directories(parent);
  save_checkpoint(ck_path, res.checkpoint);
  write_file(out_path(cfg, "metrics.csv"), metrics_csv(res.metrics));
  write_json(out_path(cfg, "metrics.json"), metrics_json(res.metrics));
  write_json(out_path(cfg, "config.json"), config_to_json(cfg));
  const EpochMetrics& last = res.metrics.back();
  return json{{"checkpoint", ck_path},
              {"epochs", res.metrics.size()},
              {"train_accuracy", last.train_accuracy},
              {"test_accuracy", last.test_accuracy},
              {"mean_omega", last.mean_omega},
              {"task_loss", last.task_loss}};
}

EvalReport run_evaluate(const ExperimentConfig& cfg, const std::string& checkpoint_path) {
  cfg.validate();
  const Checkpoint ck = load_for(cfg, checkpoint_path);
  const EvalReport r = evaluate(ck.net, load_test_set(cfg), cfg.eval, cfg.seed);
  write_json(out_path(cfg, "eval.json"), eval_report_to_json(r));
  write_file(out_path(cfg, "eval.csv"), eval_report_csv(r));
  return r;
}

EvalReport run_attack_campaign(const ExperimentConfig& cfg, const std::string& checkpoint_path) {
  cfg.validate();
  const Checkpoint ck = load_for(cfg, checkpoint_path);
  EvalConfig ec;
  ec.batch_size = cfg.eval.batch_size;
  ec.attacks = {cfg.attack};
  const EvalReport r = evaluate(ck.net, load_test_set(cfg), ec, cfg.seed);
  write_json(out_path(cfg, "attack.json"), eval_report_to_json(r));
  write_file(out_path(cfg, "attack.csv"), eval_report_csv(r));
  return r;
}

json run_checklist(const ExperimentConfig& cfg, const std::string& checkpoint_path,
                   const std::string& substitute_path) {
  cfg.validate();
  const Checkpoint target = load_for(cfg, checkpoint_path);
  Checkpoint sub;
  if (substitute_path.empty()) {
    const Dataset tr = load_train_set(cfg);
    sub = train(cfg.model, cfg.train, tr, nullptr, cfg.seed + cfg.checklist.substitute_seed_offset).checkpoint;
  } else {
    sub = load_for(cfg, substitute_path);
  }
  const auto verdicts = obfuscation_checklist(target.net, sub.net, load_test_set(cfg), cfg.checklist, cfg.seed);
  json j = checklist_to_json(verdicts);
  j["check"] = "obfuscation";
  j["pass"] = j["all_pass"];
  write_json(out_path(cfg, "checklist.json"), j);
  return j;
}

json run_verify(const std::string& what, const ExperimentConfig& cfg, const std::string& checkpoint_path,
                ErfFn erf_fn) {
  json j;
  if (what == "theorem1") {
    j = verify_theorem1(cfg.seed);
  } else if (what == "theorem2") {
    j = verify_theorem2(cfg.seed);
  } else if (what == "gradients") {
    j = verify_gradients(erf_fn);
  } else if (what == "obfuscation") {
    j = run_checklist(cfg, checkpoint_path);
  } else {
    fail(ErrorCode::InvalidArgument, "unknown verification '" + what + "' (theorem1|theorem2|gradients|obfuscation)");
  }
  write_json(out_path(cfg, "verify_" + what + ".json"), j);
  return j;
}

json run_sweep_eta(const ExperimentConfig& cfg) {
  cfg.validate();
  const Dataset tr = load_train_set(cfg);
  const Dataset te = load_test_set(cfg);
  json rows = json::array();
  std::ostringstream csv;
  csv.precision(17);
  csv << "eta,clean_accuracy,attack_accuracy,mean_omega,p3_last_layer\n";
  for (double eta : cfg.sweep_etas) {
    TrainConfig tc = cfg.train;
    tc.eta = eta;
    const TrainResult res = train(cfg.model, tc, tr, nullptr, cfg.seed);
    const Network& net = res.checkpoint.net;
    AttackConfig a = cfg.attack;
    if (a.seed == 0) a.seed = cfg.seed;
    const double clean = clean_accuracy(net, te, cfg.eval.batch_size, cfg.seed);
    const double adv = attacked_accuracy(net, net, te, a, cfg.eval.batch_size).accuracy;
    const EpochMetrics& last = res.metrics.back();
    const double p3 = last.p3.empty() ? 0.0 : last.p3.back();
    rows.push_back({{"eta", eta}, {"clean_accuracy", clean}, {"attack_accuracy", adv}, {"attack", a.label()},
                    {"mean_omega", last.mean_omega}, {"p3", last.p3}});
    csv << eta << "," << clean << "," << adv << "," << last.mean_omega << "," << p3 << "\n";
  }
  json j{{"check", "sweep_eta"}, {"rows", rows}};
  write_json(out_path(cfg, "sweep_eta.json"), j);
  write_file(out_path(cfg, "sweep_eta.csv"), csv.str());
  return j;
}

}  // namespace spikeguard
