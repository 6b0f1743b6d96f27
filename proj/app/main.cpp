#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <json.hpp>
#include <string>
#include <vector>

#include "spikeguard/spikeguard.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumeric = 2;

struct Options {
  std::string config;
  std::string out;
  std::string checkpoint;
  std::string substitute;
  std::vector<std::string> overrides;
  long long seed = -1;
  double erf_offset = 0.0;
  std::string what;
};

int report_error(spkgrd_status s) {
  std::fprintf(stderr, "error: %s\n", spkgrd_last_error());
  return s == SPKGRD_NUMERIC ? kExitNumeric : kExitValidation;
}

struct ConfigHandle {
  spkgrd_config* p = nullptr;
  ~ConfigHandle() { spkgrd_config_free(p); }
};

spkgrd_status build_config(const Options& o, ConfigHandle& h) {
  spkgrd_status s = o.config.empty() ? spkgrd_config_default(&h.p) : spkgrd_config_load(o.config.c_str(), &h.p);
  if (s != SPKGRD_OK) return s;
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key=value, got '%s'\n", kv.c_str());
      return SPKGRD_INVALID_ARGUMENT;
    }
    s = spkgrd_config_set(h.p, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
    if (s != SPKGRD_OK) return s;
  }
  if (o.seed >= 0 && (s = spkgrd_config_set(h.p, "seed", std::to_string(o.seed).c_str())) != SPKGRD_OK) return s;
  if (!o.out.empty()) s = spkgrd_config_set(h.p, "out_dir", nlohmann::json(o.out).dump().c_str());
  return s;
}

// Prints the report and maps a failed verdict to the validation exit code.
int emit(char* text, const char* verdict_key) {
  const std::string body(text);
  spkgrd_string_free(text);
  std::printf("%s\n", body.c_str());
  if (!verdict_key) return kExitOk;
  const auto j = nlohmann::json::parse(body);
  return j.value(verdict_key, false) ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spiking network training, attacks and robustness verification"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub, bool checkpoint) {
    sub->add_option("--config", o.config, "JSON experiment config (defaults apply when omitted)");
    sub->add_option("--seed", o.seed, "overrides the config seed")->check(CLI::NonNegativeNumber);
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--set", o.overrides, "dotted config override key=value (repeatable)");
    if (checkpoint) sub->add_option("--checkpoint", o.checkpoint, "checkpoint path (default <out>/checkpoint.bin)");
  };

  auto* train = app.add_subcommand("train", "train a model and write checkpoint and metrics");
  common(train, true);
  auto* eval = app.add_subcommand("eval", "clean and attacked accuracy with optional sweeps");
  common(eval, true);
  auto* attack = app.add_subcommand("attack", "run the configured attack against a checkpoint");
  common(attack, true);
  auto* verify = app.add_subcommand("verify", "theorem1 | theorem2 | gradients | obfuscation");
  common(verify, true);
  verify->add_option("what", o.what, "check to run")
      ->required()
      ->check(CLI::IsMember({"theorem1", "theorem2", "gradients", "obfuscation"}));
  verify->add_option("--inject-erf-offset", o.erf_offset, "fault injection for the gradients check")->group("");
  auto* checklist = app.add_subcommand("checklist", "gradient-obfuscation checklist");
  common(checklist, true);
  checklist->add_option("--substitute", o.substitute, "substitute checkpoint (trained when omitted)");
  auto* sweep = app.add_subcommand("sweep-eta", "train one model per eta and tabulate robustness");
  common(sweep, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  ConfigHandle cfg;
  spkgrd_status s = build_config(o, cfg);
  if (s != SPKGRD_OK) return report_error(s);

  char* text = nullptr;
  const char* ck = o.checkpoint.c_str();
  const char* verdict = nullptr;
  if (*train) {
    s = spkgrd_train(cfg.p, ck, &text);
  } else if (*eval) {
    s = spkgrd_evaluate(cfg.p, ck, &text);
  } else if (*attack) {
    s = spkgrd_attack(cfg.p, ck, &text);
  } else if (*verify) {
    s = spkgrd_verify(cfg.p, o.what.c_str(), ck, o.erf_offset, &text);
    verdict = "pass";
  } else if (*checklist) {
    s = spkgrd_checklist(cfg.p, ck, o.substitute.empty() ? nullptr : o.substitute.c_str(), &text);
    verdict = "all_pass";
  } else {
    s = spkgrd_sweep_eta(cfg.p, &text);
  }
  if (s != SPKGRD_OK) return report_error(s);
  return emit(text, verdict);
}
