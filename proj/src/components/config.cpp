#include "stagebench/components/config.hpp"

#include "stagebench/common/error.hpp"
#include "stagebench/datastore/key_codec.hpp"
#include "stagebench/datastore/payload.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace stagebench::components {

using nlohmann::json;

kernels::KernelSpec iteration_kernel(double iter_time, bool busy) {
  kernels::KernelSpec k;
  k.name = "train_step";
  k.kernel = kernels::KernelKind::MatMulGeneral;
  k.run_time = iter_time;
  k.data_size = {64, 64};
  k.busy = busy;
  return k;
}

void validate(const SimComponentConfig &cfg) {
  datastore::validate_key(cfg.name);
  if (cfg.steps < 1 || cfg.write_interval < 1 || cfg.stop_check_interval < 1) {
    throw Error(Errc::invalid_argument,
                "sim '" + cfg.name + "': steps, write_interval and stop_check_interval must be >= 1");
  }
  if (cfg.keys_per_snapshot < 1) {
    throw Error(Errc::invalid_argument, "sim '" + cfg.name + "': keys_per_snapshot must be >= 1");
  }
  if (cfg.payload_bytes < datastore::min_payload_bytes) {
    throw Error(Errc::invalid_argument, "sim '" + cfg.name + "': payload_bytes must be >= " +
                                            std::to_string(datastore::min_payload_bytes));
  }
  if (cfg.stall_seconds < 0.0) {
    throw Error(Errc::invalid_argument, "stall_seconds must be >= 0");
  }
  for (const auto &k : cfg.kernels) {
    kernels::validate(k);
  }
}

void validate(const TrainerComponentConfig &cfg) {
  datastore::validate_key(cfg.name);
  kernels::validate(cfg.kernel);
  if (cfg.total_iters < 1 || cfg.read_interval < 1) {
    throw Error(Errc::invalid_argument,
                "trainer '" + cfg.name + "': total_iters and read_interval must be >= 1");
  }
  if (cfg.total_iters < cfg.read_interval) {
    throw Error(Errc::invalid_argument, "trainer '" + cfg.name + "': total_iters < read_interval");
  }
  if (cfg.keys_per_snapshot < 1 || cfg.producer_write_interval < 1 || cfg.producer_ranks < 1 ||
      cfg.ranks < 1) {
    throw Error(Errc::invalid_argument, "trainer '" + cfg.name + "': counts must be >= 1");
  }
  if (!(cfg.poll_deadline > 0.0) || !(cfg.poll_interval > 0.0)) {
    throw Error(Errc::invalid_argument, "poll_deadline and poll_interval must be > 0");
  }
  for (const auto &p : cfg.producers) {
    datastore::validate_key(p);
  }
}

std::string to_json(const SimComponentConfig &cfg) {
  json kernels = json::array();
  for (const auto &k : cfg.kernels) {
    kernels.push_back(kernels::to_json(k));
  }
  json j = {{"name", cfg.name},
            {"kernels", kernels},
            {"steps", cfg.steps},
            {"write_interval", cfg.write_interval},
            {"keys_per_snapshot", cfg.keys_per_snapshot},
            {"payload_bytes", cfg.payload_bytes},
            {"stop_check_interval", cfg.stop_check_interval},
            {"emit_init_write", cfg.emit_init_write},
            {"stop_key", cfg.stop_key},
            {"seed", cfg.seed},
            {"stall_at_snapshot", cfg.stall_at_snapshot},
            {"stall_seconds", cfg.stall_seconds},
            {"scratch_dir", cfg.scratch_dir}};
  return j.dump(2) + "\n";
}

std::string to_json(const TrainerComponentConfig &cfg) {
  json j = {{"name", cfg.name},
            {"kernel", kernels::to_json(cfg.kernel)},
            {"total_iters", cfg.total_iters},
            {"read_interval", cfg.read_interval},
            {"producers", cfg.producers},
            {"blocking", cfg.blocking},
            {"payload_bytes", cfg.payload_bytes},
            {"keys_per_snapshot", cfg.keys_per_snapshot},
            {"producer_write_interval", cfg.producer_write_interval},
            {"producer_ranks", cfg.producer_ranks},
            {"ranks", cfg.ranks},
            {"await_init", cfg.await_init},
            {"steer", cfg.steer},
            {"verify_payloads", cfg.verify_payloads},
            {"poll_deadline", cfg.poll_deadline},
            {"poll_interval", cfg.poll_interval},
            {"seed", cfg.seed}};
  return j.dump(2) + "\n";
}

SimComponentConfig sim_config_from_json(std::string_view text) {
  SimComponentConfig cfg;
  try {
    const auto j = json::parse(text);
    cfg.name = j.value("name", cfg.name);
    if (const auto it = j.find("kernels"); it != j.end()) {
      cfg.kernels = it->is_object() ? kernels::kernel_list_from_json(*it)
                                    : kernels::kernel_list_from_json(json{{"kernels", *it}});
    }
    cfg.steps = j.value("steps", cfg.steps);
    cfg.write_interval = j.value("write_interval", cfg.write_interval);
    cfg.keys_per_snapshot = j.value("keys_per_snapshot", cfg.keys_per_snapshot);
    cfg.payload_bytes = j.value("payload_bytes", cfg.payload_bytes);
    cfg.stop_check_interval = j.value("stop_check_interval", cfg.stop_check_interval);
    cfg.emit_init_write = j.value("emit_init_write", cfg.emit_init_write);
    cfg.stop_key = j.value("stop_key", cfg.stop_key);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.stall_at_snapshot = j.value("stall_at_snapshot", cfg.stall_at_snapshot);
    cfg.stall_seconds = j.value("stall_seconds", cfg.stall_seconds);
    cfg.scratch_dir = j.value("scratch_dir", cfg.scratch_dir);
  } catch (const json::exception &e) {
    throw Error(Errc::invalid_argument, std::string("sim config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

TrainerComponentConfig trainer_config_from_json(std::string_view text) {
  TrainerComponentConfig cfg;
  try {
    const auto j = json::parse(text);
    cfg.name = j.value("name", cfg.name);
    if (const auto it = j.find("kernel"); it != j.end()) {
      cfg.kernel = kernels::kernel_spec_from_json(*it);
    } else {
      cfg.kernel = iteration_kernel(j.at("iter_time").get<double>(), j.value("busy", true));
    }
    cfg.total_iters = j.value("total_iters", cfg.total_iters);
    cfg.read_interval = j.value("read_interval", cfg.read_interval);
    cfg.producers = j.value("producers", cfg.producers);
    cfg.blocking = j.value("blocking", cfg.blocking);
    cfg.payload_bytes = j.value("payload_bytes", cfg.payload_bytes);
    cfg.keys_per_snapshot = j.value("keys_per_snapshot", cfg.keys_per_snapshot);
    cfg.producer_write_interval = j.value("producer_write_interval", cfg.producer_write_interval);
    cfg.producer_ranks = j.value("producer_ranks", cfg.producer_ranks);
    cfg.ranks = j.value("ranks", cfg.ranks);
    cfg.await_init = j.value("await_init", cfg.await_init);
    cfg.steer = j.value("steer", cfg.steer);
    cfg.verify_payloads = j.value("verify_payloads", cfg.verify_payloads);
    cfg.poll_deadline = j.value("poll_deadline", cfg.poll_deadline);
    cfg.poll_interval = j.value("poll_interval", cfg.poll_interval);
    cfg.seed = j.value("seed", cfg.seed);
  } catch (const json::exception &e) {
    throw Error(Errc::invalid_argument, std::string("trainer config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

std::string read_text_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::invalid_argument, "cannot open " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path &path, std::string_view text) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) {
    throw Error(Errc::io, "cannot write " + path.string());
  }
}

} // namespace stagebench::components
