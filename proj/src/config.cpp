#include "spikeguard/config.hpp"

#include <set>

#include "spikeguard/dataset.hpp"
#include "spikeguard/error.hpp"

namespace spikeguard {

void TrainConfig::validate() const {
  require(epochs >= 1, "train.epochs must be >= 1");
  require(batch_size >= 1, "train.batch_size must be >= 1");
  require(lr > 0.0, "train.lr must be > 0");
  require(momentum >= 0.0 && momentum < 1.0, "train.momentum must lie in [0, 1)");
  require(weight_decay >= 0.0, "train.weight_decay must be >= 0");
  require(eta >= 0.0, "train.eta must be >= 0");
  if (adversarial) {
    require(at.kind == AttackKind::Pgd || at.kind == AttackKind::Fgsm || at.kind == AttackKind::Bim,
            "train.at must be a signed-gradient attack");
    at.validate();
  }
}

void DataConfig::validate() const {
  require(source == "idx" || source == "synth", "data.source must be 'idx' or 'synth'");
  if (source == "synth") {
    require(synth.n_train >= 1 && synth.n_test >= 1, "data.synth sizes must be >= 1");
    require(synth.classes >= 2 && synth.dim >= 1, "data.synth needs classes >= 2 and dim >= 1");
    require(synth.sep >= 0.0, "data.synth.sep must be >= 0");
  }
}

void ChecklistConfig::validate() const {
  require(epsilon >= 0.0 && unbounded_epsilon >= 0.0, "checklist epsilons must be >= 0");
  require(steps >= 1 && unbounded_steps >= 1, "checklist steps must be >= 1");
  require(!eps_grid.empty(), "checklist.eps_grid must not be empty");
  require(batch_size >= 1, "checklist.batch_size must be >= 1");
  require(random_max_fraction >= 0.0, "checklist.random_max_fraction must be >= 0");
}

void ExperimentConfig::validate() const {
  model.validate();
  train.validate();
  data.validate();
  attack.validate();
  for (const auto& a : eval.attacks) a.validate();
  require(eval.batch_size >= 1, "eval.batch_size must be >= 1");
  for (double e : eval.eps_sweep) require(e >= 0.0, "eval.eps_sweep values must be >= 0");
  for (std::size_t k : eval.k_sweep) require(k >= 1, "eval.k_sweep values must be >= 1");
  checklist.validate();
  for (double e : sweep_etas) require(e >= 0.0, "sweep_etas values must be >= 0");
  if (data.source == "synth") {
    require(model.input_size() == data.synth.dim, "model.input_shape must match data.synth.dim");
    require(model.classes == data.synth.classes, "model.classes must match data.synth.classes");
  }
}

ExperimentConfig default_config() { return ExperimentConfig{}; }

namespace {

// Reads the keys of one JSON object and rejects any it did not consume.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) fail(ErrorCode::InvalidArgument, "config: '" + where() + "' must be an object");
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void get(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) type_error(key, "a number");
      out = v->get<double>();
    }
  }
  void get(const std::string& key, std::size_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) type_error(key, "a non-negative integer");
      out = v->get<std::size_t>();
    }
  }
  void get(const std::string& key, std::uint64_t& out, int) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) type_error(key, "a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }
  void get(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) type_error(key, "a boolean");
      out = v->get<bool>();
    }
  }
  void get(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) type_error(key, "a string");
      out = v->get<std::string>();
    }
  }
  void get(const std::string& key, std::vector<double>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) type_error(key, "an array of numbers");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_number()) type_error(key, "an array of numbers");
        out.push_back(e.get<double>());
      }
    }
  }
  void get(const std::string& key, std::vector<std::size_t>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) type_error(key, "an array of non-negative integers");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_number_unsigned()) type_error(key, "an array of non-negative integers");
        out.push_back(e.get<std::size_t>());
      }
    }
  }

  std::string where(const std::string& key = "") const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) fail(ErrorCode::InvalidArgument, "config: unknown key '" + where(k) + "'");
  }

 private:
  [[noreturn]] void type_error(const std::string& key, const std::string& what) const {
    fail(ErrorCode::InvalidArgument, "config: '" + where(key) + "' must be " + what);
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

AttackConfig read_attack(const json& j, const std::string& path, AttackConfig a) {
  Reader r(j, path);
  std::string kind = to_string(a.kind), approx = to_string(a.approx);
  r.get("kind", kind);
  a.kind = parse_attack_kind(kind);
  r.get("epsilon", a.epsilon);
  r.get("step_alpha", a.step_alpha);
  r.get("steps", a.steps);
  r.get("approx", approx);
  a.approx = parse_approx(approx);
  r.get("cw_c", a.cw_c);
  r.get("cw_steps", a.cw_steps);
  r.get("cw_lr", a.cw_lr);
  r.get("seed", a.seed, 0);
  r.finish();
  return a;
}

ModelSpec read_model(const json& j, const std::string& path) {
  ModelSpec m;
  Reader r(j, path);
  if (const json* v = r.find("input_shape")) {
    if (!v->is_array() || v->empty()) fail(ErrorCode::InvalidArgument, "config: '" + r.where("input_shape") + "' must be a non-empty array");
    m.input_shape.clear();
    for (const auto& e : *v) {
      if (!e.is_number_unsigned()) fail(ErrorCode::InvalidArgument, "config: input_shape entries must be integers");
      m.input_shape.push_back(e.get<std::size_t>());
    }
  }
  if (const json* v = r.find("layers")) {
    if (!v->is_array()) fail(ErrorCode::InvalidArgument, "config: '" + r.where("layers") + "' must be an array");
    m.hidden.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      Reader lr((*v)[i], r.where("layers") + "[" + std::to_string(i) + "]");
      LayerSpec l;
      std::string type = "dense";
      lr.get("type", type);
      if (type == "dense") {
        l.kind = LayerKind::Dense;
      } else if (type == "conv") {
        l.kind = LayerKind::Conv;
      } else {
        fail(ErrorCode::InvalidArgument, "config: layer type must be 'dense' or 'conv'");
      }
      lr.get("width", l.width);
      lr.get("tdbn", l.tdbn);
      lr.finish();
      m.hidden.push_back(l);
    }
  }
  r.get("classes", m.classes);
  r.get("timesteps", m.timesteps);
  if (const json* v = r.find("lif")) {
    Reader lr(*v, r.where("lif"));
    std::string reset = to_string(m.lif.reset);
    lr.get("tau", m.lif.tau);
    lr.get("v_th", m.lif.v_th);
    lr.get("reset", reset);
    m.lif.reset = parse_reset_mode(reset);
    lr.finish();
  }
  if (const json* v = r.find("surrogate")) {
    Reader sr(*v, r.where("surrogate"));
    std::string family = to_string(m.surrogate.family);
    sr.get("family", family);
    m.surrogate.family = parse_surrogate_family(family);
    sr.get("gamma", m.surrogate.gamma);
    sr.finish();
  }
  std::string enc = to_string(m.encoding);
  r.get("encoding", enc);
  m.encoding = parse_encoding(enc);
  if (const json* v = r.find("tdbn")) {
    Reader tr(*v, r.where("tdbn"));
    tr.get("alpha", m.tdbn_alpha);
    tr.get("eps", m.tdbn_eps);
    tr.get("momentum", m.tdbn_momentum);
    tr.finish();
  }
  r.finish();
  return m;
}

}  // namespace

json attack_to_json(const AttackConfig& a) {
  return json{{"kind", to_string(a.kind)},   {"epsilon", a.epsilon}, {"step_alpha", a.step_alpha},
              {"steps", a.steps},            {"approx", to_string(a.approx)},
              {"cw_c", a.cw_c},              {"cw_steps", a.cw_steps}, {"cw_lr", a.cw_lr},
              {"seed", a.seed}};
}

AttackConfig attack_from_json(const json& j) { return read_attack(j, "attack", AttackConfig{}); }

json model_spec_to_json(const ModelSpec& m) {
  json layers = json::array();
  for (const auto& l : m.hidden)
    layers.push_back({{"type", l.kind == LayerKind::Dense ? "dense" : "conv"}, {"width", l.width}, {"tdbn", l.tdbn}});
  return json{{"input_shape", m.input_shape},
              {"layers", layers},
              {"classes", m.classes},
              {"timesteps", m.timesteps},
              {"lif", {{"tau", m.lif.tau}, {"v_th", m.lif.v_th}, {"reset", to_string(m.lif.reset)}}},
              {"surrogate", {{"family", to_string(m.surrogate.family)}, {"gamma", m.surrogate.gamma}}},
              {"encoding", to_string(m.encoding)},
              {"tdbn", {{"alpha", m.tdbn_alpha}, {"eps", m.tdbn_eps}, {"momentum", m.tdbn_momentum}}}};
}

ModelSpec model_spec_from_json(const json& j) {
  ModelSpec m = read_model(j, "model");
  m.validate();
  return m;
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  Reader r(j, "");
  r.get("seed", c.seed, 0);
  r.get("out_dir", c.out_dir);
  if (const json* v = r.find("model")) c.model = read_model(*v, "model");
  if (const json* v = r.find("train")) {
    Reader tr(*v, "train");
    tr.get("epochs", c.train.epochs);
    tr.get("batch_size", c.train.batch_size);
    tr.get("lr", c.train.lr);
    tr.get("momentum", c.train.momentum);
    tr.get("weight_decay", c.train.weight_decay);
    tr.get("eta", c.train.eta);
    tr.get("adversarial", c.train.adversarial);
    if (const json* a = tr.find("at")) c.train.at = read_attack(*a, "train.at", c.train.at);
    tr.finish();
  }
  if (const json* v = r.find("data")) {
    Reader dr(*v, "data");
    dr.get("source", c.data.source);
    dr.get("train_images", c.data.train_images);
    dr.get("train_labels", c.data.train_labels);
    dr.get("test_images", c.data.test_images);
    dr.get("test_labels", c.data.test_labels);
    dr.get("train_limit", c.data.train_limit);
    dr.get("test_limit", c.data.test_limit);
    if (const json* s = dr.find("synth")) {
      Reader sr(*s, "data.synth");
      sr.get("n_train", c.data.synth.n_train);
      sr.get("n_test", c.data.synth.n_test);
      sr.get("classes", c.data.synth.classes);
      sr.get("dim", c.data.synth.dim);
      sr.get("sep", c.data.synth.sep);
      sr.finish();
    }
    dr.finish();
  }
  if (const json* v = r.find("attack")) c.attack = read_attack(*v, "attack", c.attack);
  if (const json* v = r.find("eval")) {
    Reader er(*v, "eval");
    er.get("batch_size", c.eval.batch_size);
    if (const json* a = er.find("attacks")) {
      if (!a->is_array()) fail(ErrorCode::InvalidArgument, "config: 'eval.attacks' must be an array");
      for (std::size_t i = 0; i < a->size(); ++i)
        c.eval.attacks.push_back(read_attack((*a)[i], "eval.attacks[" + std::to_string(i) + "]", AttackConfig{}));
    }
    if (const json* a = er.find("sweep_attack")) c.eval.sweep_attack = read_attack(*a, "eval.sweep_attack", c.eval.sweep_attack);
    er.get("eps_sweep", c.eval.eps_sweep);
    er.get("k_sweep", c.eval.k_sweep);
    er.finish();
  }
  if (const json* v = r.find("checklist")) {
    Reader cr(*v, "checklist");
    ChecklistConfig& k = c.checklist;
    std::string approx = to_string(k.approx);
    cr.get("epsilon", k.epsilon);
    cr.get("steps", k.steps);
    cr.get("step_alpha", k.step_alpha);
    cr.get("approx", approx);
    k.approx = parse_approx(approx);
    cr.get("eps_grid", k.eps_grid);
    cr.get("tolerance_points", k.tolerance_points);
    cr.get("unbounded_epsilon", k.unbounded_epsilon);
    cr.get("unbounded_steps", k.unbounded_steps);
    cr.get("unbounded_alpha", k.unbounded_alpha);
    cr.get("random_subset", k.random_subset);
    cr.get("random_samples", k.random_samples);
    cr.get("random_max_fraction", k.random_max_fraction);
    cr.get("batch_size", k.batch_size);
    cr.get("substitute_seed_offset", k.substitute_seed_offset, 0);
    cr.finish();
  }
  r.get("sweep_etas", c.sweep_etas);
  r.finish();
  return c;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c = parse_config(j);
  c.validate();
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json attacks = json::array();
  for (const auto& a : c.eval.attacks) attacks.push_back(attack_to_json(a));
  const ChecklistConfig& k = c.checklist;
  return json{
      {"seed", c.seed},
      {"out_dir", c.out_dir},
      {"model", model_spec_to_json(c.model)},
      {"train",
       {{"epochs", c.train.epochs},
        {"batch_size", c.train.batch_size},
        {"lr", c.train.lr},
        {"momentum", c.train.momentum},
        {"weight_decay", c.train.weight_decay},
        {"eta", c.train.eta},
        {"adversarial", c.train.adversarial},
        {"at", attack_to_json(c.train.at)}}},
      {"data",
       {{"source", c.data.source},
        {"train_images", c.data.train_images},
        {"train_labels", c.data.train_labels},
        {"test_images", c.data.test_images},
        {"test_labels", c.data.test_labels},
        {"train_limit", c.data.train_limit},
        {"test_limit", c.data.test_limit},
        {"synth",
         {{"n_train", c.data.synth.n_train},
          {"n_test", c.data.synth.n_test},
          {"classes", c.data.synth.classes},
          {"dim", c.data.synth.dim},
          {"sep", c.data.synth.sep}}}}},
      {"attack", attack_to_json(c.attack)},
      {"eval",
       {{"batch_size", c.eval.batch_size},
        {"attacks", attacks},
        {"sweep_attack", attack_to_json(c.eval.sweep_attack)},
        {"eps_sweep", c.eval.eps_sweep},
        {"k_sweep", c.eval.k_sweep}}},
      {"checklist",
       {{"epsilon", k.epsilon},
        {"steps", k.steps},
        {"step_alpha", k.step_alpha},
        {"approx", to_string(k.approx)},
        {"eps_grid", k.eps_grid},
        {"tolerance_points", k.tolerance_points},
        {"unbounded_epsilon", k.unbounded_epsilon},
        {"unbounded_steps", k.unbounded_steps},
        {"unbounded_alpha", k.unbounded_alpha},
        {"random_subset", k.random_subset},
        {"random_samples", k.random_samples},
        {"random_max_fraction", k.random_max_fraction},
        {"batch_size", k.batch_size},
        {"substitute_seed_offset", k.substitute_seed_offset}}},
      {"sweep_etas", c.sweep_etas}};
}

void set_override(json& j, const std::string& dotted_key, const std::string& value) {
  require(!dotted_key.empty(), "override key must not be empty");
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = dotted_key.find('.', start);
    const std::string part = dotted_key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    require(!part.empty(), "override key '" + dotted_key + "' has an empty segment");
    if (!node->is_object()) *node = json::object();
    if (dot == std::string::npos) {
      json parsed = json::parse(value, nullptr, false);
      (*node)[part] = parsed.is_discarded() ? json(value) : parsed;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::pair<std::string, std::string>>& overrides) {
  json j = json::object();
  if (!path.empty()) {
    j = json::parse(read_file(path), nullptr, false);
    if (j.is_discarded()) fail(ErrorCode::Format, "config: '" + path + "' is not valid JSON");
  }
  for (const auto& [k, v] : overrides) set_override(j, k, v);
  return config_from_json(j);
}

}  // namespace spikeguard
