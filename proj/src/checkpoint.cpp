#include "spikeguard/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "spikeguard/config.hpp"
#include "spikeguard/dataset.hpp"
#include "spikeguard/error.hpp"

namespace spikeguard {

namespace {

constexpr char kMagic[8] = {'S', 'P', 'K', 'G', 'R', 'D', '0', '1'};

template <typename U>
void put(std::string& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Cursor {
 public:
  explicit Cursor(const std::string& b) : b_(b) {}

  template <typename U>
  U get() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i)
      v |= static_cast<U>(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
    pos_ += sizeof(U);
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = b_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  void need(std::size_t n) const {
    if (b_.size() - pos_ < n) fail(ErrorCode::Length, "checkpoint: truncated file");
  }
  const std::string& b_;
  std::size_t pos_ = 0;
};

struct Named {
  std::string name;
  Tensor* tensor;
};

std::vector<Named> all_tensors(Network& net) {
  std::vector<Named> out;
  const auto names = net.parameter_names();
  const auto params = net.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) out.push_back({names[i], params[i]});
  for (std::size_t l = 0; l < net.num_hidden(); ++l) {
    auto& bn = net.hidden(l).bn;
    if (!bn) continue;
    const std::string p = "hidden" + std::to_string(l) + ".tdbn.";
    out.push_back({p + "running_mean", &bn->running_mean});
    out.push_back({p + "running_var", &bn->running_var});
  }
  return out;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ck) {
  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  const std::string spec = model_spec_to_json(ck.net.spec()).dump();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(spec.size()));
  out += spec;
  put<std::uint64_t>(out, ck.epoch);
  put<std::uint64_t>(out, ck.rng_key);
  put<std::uint64_t>(out, ck.rng_counter);
  Network copy = ck.net;
  const auto tensors = all_tensors(copy);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t->rank()));
    for (std::size_t d : t->shape()) put<std::uint64_t>(out, d);
    for (double v : t->data()) {
      const auto f = static_cast<float>(v);
      if (!std::isfinite(f)) fail(ErrorCode::Numeric, "checkpoint: tensor '" + name + "' is not finite");
      put<std::uint32_t>(out, std::bit_cast<std::uint32_t>(f));
    }
  }
  return out;
}

Checkpoint parse_checkpoint(const std::string& bytes) {
  Cursor c(bytes);
  if (c.bytes(sizeof(kMagic)) != std::string(kMagic, sizeof(kMagic)))
    fail(ErrorCode::Format, "checkpoint: bad magic");
  const auto version = c.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    fail(ErrorCode::Format, "checkpoint: unsupported version " + std::to_string(version));
  const auto spec_len = c.get<std::uint32_t>();
  const json spec_json = json::parse(c.bytes(spec_len), nullptr, false);
  if (spec_json.is_discarded()) fail(ErrorCode::Format, "checkpoint: model spec is not valid JSON");
  Checkpoint ck;
  ck.net = Network::init(model_spec_from_json(spec_json), 0);
  ck.epoch = c.get<std::uint64_t>();
  ck.rng_key = c.get<std::uint64_t>();
  ck.rng_counter = c.get<std::uint64_t>();
  const auto tensors = all_tensors(ck.net);
  const auto count = c.get<std::uint32_t>();
  if (count != tensors.size())
    fail(ErrorCode::Format, "checkpoint: expected " + std::to_string(tensors.size()) + " tensors, found " +
                                std::to_string(count));
  for (const auto& [name, t] : tensors) {
    const std::string got = c.bytes(c.get<std::uint32_t>());
    if (got != name) fail(ErrorCode::Format, "checkpoint: expected tensor '" + name + "', found '" + got + "'");
    Shape shape(c.get<std::uint32_t>());
    for (auto& d : shape) d = c.get<std::uint64_t>();
    if (shape != t->shape())
      fail(ErrorCode::Format, "checkpoint: tensor '" + name + "' has shape " + shape_str(shape) + ", expected " +
                                  shape_str(t->shape()));
    for (double& v : t->data()) v = static_cast<double>(std::bit_cast<float>(c.get<std::uint32_t>()));
  }
  if (!c.done()) fail(ErrorCode::Format, "checkpoint: trailing bytes");
  return ck;
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) { write_file(path, serialize_checkpoint(ck)); }

Checkpoint load_checkpoint(const std::string& path) { return parse_checkpoint(read_file(path)); }

}  // namespace spikeguard
