#include "dse/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "dse/error.hpp"
#include "dse/hash.hpp"

namespace dse {

namespace {

constexpr char kMagic[8] = {'D', 'S', 'E', 'C', 'K', 'P', 'T', '1'};

void put_u32(std::vector<unsigned char>& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_u64(std::vector<unsigned char>& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_string(std::vector<unsigned char>& buf, const std::string& s) {
  put_u32(buf, static_cast<std::uint32_t>(s.size()));
  buf.insert(buf.end(), s.begin(), s.end());
}

void put_f64(std::vector<unsigned char>& buf, double d) {
  put_u64(buf, std::bit_cast<std::uint64_t>(d));
}

struct Reader {
  const std::vector<unsigned char>& buf;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > buf.size()) throw IoError("checkpoint truncated or corrupt");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[pos + i]) << (8 * i);
    pos += 8;
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(buf.data() + pos), n);
    pos += n;
    return s;
  }
  double f64() { return std::bit_cast<double>(u64()); }
};

void write_checkpoint(const std::string& path, const std::string& kind,
                      const nlohmann::json& config,
                      const std::vector<std::pair<std::string, Parameter*>>& tensors) {
  std::vector<unsigned char> body;
  put_u32(body, kCheckpointVersion);
  put_string(body, kind);
  put_string(body, config.dump());
  put_u32(body, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, p] : tensors) {
    put_string(body, name);
    put_u32(body, static_cast<std::uint32_t>(p->value.rank()));
    for (std::size_t d : p->value.shape()) put_u64(body, d);
    for (std::size_t i = 0; i < p->value.size(); ++i) put_f64(body, p->value[i]);
  }
  Fnv1a64 h;
  h.update(body.data(), body.size());

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  out.write(reinterpret_cast<const char*>(body.data()), static_cast<std::streamsize>(body.size()));
  std::vector<unsigned char> tail;
  put_u64(tail, h.digest());
  out.write(reinterpret_cast<const char*>(tail.data()), static_cast<std::streamsize>(tail.size()));
  if (!out) throw IoError("short write on checkpoint: " + path);
}

struct LoadedCheckpoint {
  std::string kind;
  nlohmann::json config;
  std::vector<std::pair<std::string, Tensor>> tensors;
};

LoadedCheckpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  std::vector<unsigned char> all((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  if (all.size() < sizeof(kMagic) + 8 || std::memcmp(all.data(), kMagic, sizeof(kMagic)) != 0) {
    throw IoError("not a DSE checkpoint: " + path);
  }
  const std::size_t body_len = all.size() - sizeof(kMagic) - 8;
  const unsigned char* body = all.data() + sizeof(kMagic);
  Fnv1a64 h;
  h.update(body, body_len);
  std::uint64_t stored = 0;
  for (int i = 0; i < 8; ++i) {
    stored |= static_cast<std::uint64_t>(all[sizeof(kMagic) + body_len + i]) << (8 * i);
  }
  if (stored != h.digest()) throw IoError("checkpoint checksum mismatch: " + path);

  std::vector<unsigned char> body_vec(body, body + body_len);
  Reader r{body_vec};
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw IoError("checkpoint format version " + std::to_string(version) +
                  " is incompatible with expected " + std::to_string(kCheckpointVersion));
  }
  LoadedCheckpoint ck;
  ck.kind = r.str();
  ck.config = nlohmann::json::parse(r.str());
  const std::uint32_t count = r.u32();
  for (std::uint32_t t = 0; t < count; ++t) {
    std::string name = r.str();
    const std::uint32_t rank = r.u32();
    std::vector<std::size_t> shape(rank);
    std::size_t total = 1;
    for (auto& d : shape) {
      d = static_cast<std::size_t>(r.u64());
      total *= d;
    }
    std::vector<double> data(total);
    for (auto& v : data) v = r.f64();
    ck.tensors.emplace_back(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  if (r.pos != body_vec.size()) throw IoError("checkpoint has trailing bytes: " + path);
  return ck;
}

void restore_params(const LoadedCheckpoint& ck,
                    const std::vector<std::pair<std::string, Parameter*>>& params,
                    const std::string& path) {
  if (ck.tensors.size() != params.size()) {
    throw IoError("checkpoint tensor count mismatch: " + path);
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& [name, tensor] = ck.tensors[i];
    if (name != params[i].first || tensor.shape() != params[i].second->value.shape()) {
      throw IoError("checkpoint tensor '" + name + "' does not match model layout: " + path);
    }
    *params[i].second = Parameter(tensor);
  }
}

}  // namespace

nlohmann::json encoder_config_to_json(const EncoderConfig& cfg) {
  return nlohmann::json{{"num_layers", cfg.num_layers},
                        {"hidden", cfg.hidden},
                        {"heads", cfg.heads},
                        {"ffn", cfg.ffn},
                        {"max_seq_len", cfg.max_seq_len},
                        {"vocab_size", cfg.vocab_size},
                        {"num_segments", cfg.num_segments},
                        {"layer_norm_eps", cfg.layer_norm_eps},
                        {"init_stddev", cfg.init_stddev}};
}

EncoderConfig encoder_config_from_json(const nlohmann::json& j) {
  EncoderConfig cfg;
  cfg.num_layers = j.at("num_layers").get<std::size_t>();
  cfg.hidden = j.at("hidden").get<std::size_t>();
  cfg.heads = j.at("heads").get<std::size_t>();
  cfg.ffn = j.at("ffn").get<std::size_t>();
  cfg.max_seq_len = j.at("max_seq_len").get<std::size_t>();
  cfg.vocab_size = j.at("vocab_size").get<std::size_t>();
  cfg.num_segments = j.at("num_segments").get<std::size_t>();
  cfg.layer_norm_eps = j.at("layer_norm_eps").get<double>();
  cfg.init_stddev = j.at("init_stddev").get<double>();
  cfg.validate();
  return cfg;
}

void save_teacher(TeacherModel& model, const std::string& path) {
  nlohmann::json config{{"encoder", encoder_config_to_json(model.encoder.config)},
                        {"task", task_name(model.task)}};
  write_checkpoint(path, "teacher", config, model.named_params());
}

TeacherModel load_teacher(const std::string& path) {
  const LoadedCheckpoint ck = read_checkpoint(path);
  if (ck.kind != "teacher") {
    throw IoError("expected a teacher checkpoint, found kind '" + ck.kind + "': " + path);
  }
  TeacherModel model =
      init_teacher(encoder_config_from_json(ck.config.at("encoder")),
                   task_from_name(ck.config.at("task").get<std::string>()), 0);
  restore_params(ck, model.named_params(), path);
  return model;
}

void save_student(StudentModel& model, const std::string& path) {
  nlohmann::json config{{"encoder", encoder_config_to_json(model.encoder.config)},
                        {"task", task_name(model.task)},
                        {"head_hidden", model.head_W.value.rows()},
                        {"pooled_layers", model.pooled_layers}};
  write_checkpoint(path, "student", config, model.named_params());
}

StudentModel load_student(const std::string& path) {
  const LoadedCheckpoint ck = read_checkpoint(path);
  if (ck.kind != "student") {
    throw IoError("expected a student checkpoint, found kind '" + ck.kind + "': " + path);
  }
  StudentModel model = init_student(encoder_config_from_json(ck.config.at("encoder")),
                                    task_from_name(ck.config.at("task").get<std::string>()),
                                    ck.config.at("head_hidden").get<std::size_t>(), 0);
  model.pooled_layers = ck.config.at("pooled_layers").get<std::size_t>();
  restore_params(ck, model.named_params(), path);
  return model;
}

std::string checkpoint_kind(const std::string& path) { return read_checkpoint(path).kind; }

std::string model_fingerprint(StudentModel& model) {
  Fnv1a64 h;
  const std::string cfg = nlohmann::json{{"encoder", encoder_config_to_json(model.encoder.config)},
                                         {"task", task_name(model.task)},
                                         {"pooled_layers", model.pooled_layers}}
                              .dump();
  h.update(cfg.data(), cfg.size());
  for (auto& [name, p] : model.named_params()) {
    h.update(name.data(), name.size());
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const std::uint64_t bits = std::bit_cast<std::uint64_t>(p->value[i]);
      h.update(&bits, sizeof(bits));
    }
  }
  return hex_u64(h.digest());
}

}  // namespace dse
