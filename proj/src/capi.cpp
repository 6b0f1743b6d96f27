#include "spikeguard/spikeguard.h"

#include <cstring>
#include <filesystem>
#include <new>
#include <string>

#include "spikeguard/error.hpp"
#include "spikeguard/harness.hpp"

using namespace spikeguard;

struct spkgrd_config {
  json doc;
};

struct spkgrd_model {
  Checkpoint ck;
};

namespace {

thread_local std::string g_last_error;
thread_local double g_erf_offset = 0.0;

double shifted_erf(double x) { return spikeguard::erf(x) + g_erf_offset; }

template <class F>
spkgrd_status guard(F&& f) {
  try {
    f();
    g_last_error.clear();
    return SPKGRD_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<spkgrd_status>(static_cast<int>(e.code()));
  } catch (const json::exception& e) {
    g_last_error = std::string("json: ") + e.what();
    return SPKGRD_FORMAT;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return SPKGRD_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SPKGRD_INTERNAL;
  }
}

char* dup(const std::string& s) {
  char* p = new char[s.size() + 1];
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void need(const void* p, const char* what) {
  if (!p) fail(ErrorCode::InvalidArgument, std::string(what) + " must not be null");
}

std::string str(const char* s) { return s ? std::string(s) : std::string(); }

ExperimentConfig resolve(const spkgrd_config* cfg) {
  need(cfg, "config");
  ExperimentConfig c = config_from_json(cfg->doc);
  c.validate();
  return c;
}

std::string checkpoint_or_default(const ExperimentConfig& c, const char* path) {
  const std::string p = str(path);
  return p.empty() ? (std::filesystem::path(c.out_dir) / "checkpoint.bin").string() : p;
}

}  // namespace

extern "C" {

const char* spkgrd_last_error(void) { return g_last_error.c_str(); }
const char* spkgrd_version(void) { return "1.0.0"; }
void spkgrd_string_free(char* s) { delete[] s; }

spkgrd_status spkgrd_config_default(spkgrd_config** out) {
  return guard([&] {
    need(out, "out");
    *out = new spkgrd_config{config_to_json(default_config())};
  });
}

spkgrd_status spkgrd_config_load(const char* path, spkgrd_config** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    const json doc = json::parse(read_file(path));
    config_from_json(doc);
    *out = new spkgrd_config{doc};
  });
}

spkgrd_status spkgrd_config_set(spkgrd_config* cfg, const char* key, const char* value) {
  return guard([&] {
    need(cfg, "config");
    need(key, "key");
    need(value, "value");
    json next = cfg->doc;
    set_override(next, key, value);
    parse_config(next);
    cfg->doc = std::move(next);
  });
}

spkgrd_status spkgrd_config_json(const spkgrd_config* cfg, char** json_out) {
  return guard([&] {
    need(json_out, "json_out");
    *json_out = dup(config_to_json(resolve(cfg)).dump(2));
  });
}

void spkgrd_config_free(spkgrd_config* cfg) { delete cfg; }

spkgrd_status spkgrd_train(const spkgrd_config* cfg, const char* checkpoint_path, char** json_out) {
  return guard([&] {
    need(json_out, "json_out");
    const ExperimentConfig c = resolve(cfg);
    *json_out = dup(run_train(c, checkpoint_or_default(c, checkpoint_path)).dump(2));
  });
}

spkgrd_status spkgrd_evaluate(const spkgrd_config* cfg, const char* checkpoint_path, char** json_out) {
  return guard([&] {
    need(json_out, "json_out");
    const ExperimentConfig c = resolve(cfg);
    *json_out = dup(eval_report_to_json(run_evaluate(c, checkpoint_or_default(c, checkpoint_path))).dump(2));
  });
}

spkgrd_status spkgrd_attack(const spkgrd_config* cfg, const char* checkpoint_path, char** json_out) {
  return guard([&] {
    need(json_out, "json_out");
    const ExperimentConfig c = resolve(cfg);
    *json_out = dup(eval_report_to_json(run_attack_campaign(c, checkpoint_or_default(c, checkpoint_path))).dump(2));
  });
}

spkgrd_status spkgrd_verify(const spkgrd_config* cfg, const char* what, const char* checkpoint_path,
                            double erf_offset, char** json_out) {
  return guard([&] {
    need(what, "what");
    need(json_out, "json_out");
    const ExperimentConfig c = resolve(cfg);
    g_erf_offset = erf_offset;
    const ErfFn f = erf_offset != 0.0 ? &shifted_erf : nullptr;
    *json_out = dup(run_verify(what, c, checkpoint_or_default(c, checkpoint_path), f).dump(2));
  });
}

spkgrd_status spkgrd_checklist(const spkgrd_config* cfg, const char* checkpoint_path, const char* substitute_path,
                               char** json_out) {
  return guard([&] {
    need(json_out, "json_out");
    const ExperimentConfig c = resolve(cfg);
    *json_out = dup(run_checklist(c, checkpoint_or_default(c, checkpoint_path), str(substitute_path)).dump(2));
  });
}

spkgrd_status spkgrd_sweep_eta(const spkgrd_config* cfg, char** json_out) {
  return guard([&] {
    need(json_out, "json_out");
    *json_out = dup(run_sweep_eta(resolve(cfg)).dump(2));
  });
}

spkgrd_status spkgrd_model_load(const char* checkpoint_path, spkgrd_model** out) {
  return guard([&] {
    need(checkpoint_path, "checkpoint_path");
    need(out, "out");
    *out = new spkgrd_model{load_checkpoint(checkpoint_path)};
  });
}

size_t spkgrd_model_input_size(const spkgrd_model* m) { return m ? m->ck.net.spec().input_size() : 0; }
size_t spkgrd_model_classes(const spkgrd_model* m) { return m ? m->ck.net.spec().classes : 0; }

spkgrd_status spkgrd_model_predict(const spkgrd_model* m, const double* x, size_t n, uint64_t seed, int* labels) {
  return guard([&] {
    need(m, "model");
    need(x, "x");
    need(labels, "labels");
    require(n >= 1, "predict needs at least one row");
    const std::size_t per = m->ck.net.spec().input_size();
    Tensor t({n, per});
    for (std::size_t i = 0; i < n * per; ++i) t[i] = x[i];
    const auto pred = predict(m->ck.net, t, Rng(seed).substream(Stream::Poisson, 0));
    for (std::size_t i = 0; i < n; ++i) labels[i] = pred[i];
  });
}

void spkgrd_model_free(spkgrd_model* m) { delete m; }

}  // extern "C"
