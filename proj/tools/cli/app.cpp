#include "app.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "ceq/errors.hpp"
#include "commands.hpp"

#ifndef CEQSIM_VERSION
#define CEQSIM_VERSION "unknown"
#endif

namespace ceqcli {

namespace fs = std::filesystem;

namespace {

json read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ceq::ValidationError("cannot open config '" + path + "'");
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ceq::ValidationError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

std::optional<int> env_workers() {
  const char* v = std::getenv("CEQSIM_WORKERS");
  if (!v || !*v) return std::nullopt;
  try {
    std::size_t used = 0;
    const int n = std::stoi(v, &used);
    if (used == std::string(v).size()) return n;
  } catch (const std::exception&) {
  }
  throw ceq::ValidationError(std::string("CEQSIM_WORKERS: not an integer: '") + v + "'");
}

struct Resolved {
  RunSettings settings;
  Plan plan;
  json config;
};

Resolved resolve(const std::string& command, const json& config, const std::optional<std::string>& out_flag,
                 const std::optional<std::uint64_t>& seed_flag, const std::optional<int>& workers_flag) {
  if (!config.is_object()) throw ceq::ValidationError("config: expected a JSON object");
  for (const auto& [key, _] : config.items()) {
    if (key != "command" && key != "output_dir" && key != "master_seed" && key != "workers" && key != "parameters")
      throw ceq::ValidationError("config." + key + ": unknown field");
  }
  if (config.contains("command") && config["command"] != command)
    throw ceq::ValidationError("config.command '" + config["command"].dump() + "' does not match the requested command '" + command + "'");

  Resolved r;
  r.settings.command = command;
  if (out_flag) {
    r.settings.output_dir = *out_flag;
  } else if (config.contains("output_dir")) {
    if (!config["output_dir"].is_string()) throw ceq::ValidationError("config.output_dir: expected a string");
    r.settings.output_dir = config["output_dir"].get<std::string>();
  } else {
    r.settings.output_dir = "ceqsim_out";
  }
  if (seed_flag) {
    r.settings.master_seed = *seed_flag;
  } else if (config.contains("master_seed")) {
    if (!config["master_seed"].is_number_unsigned()) throw ceq::ValidationError("config.master_seed: expected a non-negative integer");
    r.settings.master_seed = config["master_seed"].get<std::uint64_t>();
  }
  std::optional<int> workers = workers_flag;
  if (!workers && config.contains("workers")) {
    if (!config["workers"].is_number_integer()) throw ceq::ValidationError("config.workers: expected an integer");
    workers = config["workers"].get<int>();
  }
  if (!workers) workers = env_workers();
  r.settings.workers = workers.value_or(1);
  if (r.settings.workers < 1) throw ceq::ValidationError("workers: must be at least 1");

  r.plan = make_plan(command, config.contains("parameters") ? config["parameters"] : json::object());
  r.config = json::object();
  r.config["command"] = command;
  r.config["output_dir"] = r.settings.output_dir;
  r.config["master_seed"] = r.settings.master_seed;
  r.config["workers"] = r.settings.workers;
  r.config["parameters"] = r.plan.parameters;
  return r;
}

void write_file(const fs::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  out << data;
  if (!out) throw ceq::NumericalError("cannot write '" + path.string() + "'");
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cold echo qubit simulation toolkit"};
  std::string command;
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  app.add_option("command", command, "spectrum | reduce | rabi | highfreq | lifetime-sweep | dephasing | fgr")
      ->required()
      ->check(CLI::IsMember(command_names()));
  app.add_option("--config", config_path, "experiment config (JSON)")->required();
  app.add_option("--out", out_dir, "output directory (overrides output_dir)");
  app.add_option("--seed", seed, "master seed (overrides master_seed)");
  app.add_option("--workers", workers, "parallel workers (overrides workers and CEQSIM_WORKERS)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  const auto start = std::chrono::steady_clock::now();
  Resolved r;
  try {
    r = resolve(command, read_config(config_path), out_dir, seed, workers);
  } catch (const ceq::ValidationError& e) {
    err << "ceqsim: " << e.what() << '\n';
    return 2;
  }

  const fs::path dir(r.settings.output_dir);
  try {
    fs::create_directories(dir);
  } catch (const fs::filesystem_error& e) {
    err << "ceqsim: " << e.what() << '\n';
    return 3;
  }

  RunOutput result;
  try {
    result = r.plan.run(r.settings);
  } catch (...) {
    result.errors.push_back(describe(std::current_exception(), "run"));
  }

  json outputs = json::array();
  for (const auto& t : result.tables) {
    const std::string data = t.render();
    write_file(dir / t.file, data);
    outputs.push_back({{"file", t.file}, {"sha256", sha256_hex(data)}, {"bytes", data.size()}});
  }
  if (!result.errors.empty()) {
    Table e{"errors.csv", {"point", "kind", "exit_code", "message"}, {}};
    for (const auto& x : result.errors) e.rows.push_back({x.point, x.kind, std::to_string(x.exit_code), x.message});
    const std::string data = e.render();
    write_file(dir / e.file, data);
    outputs.push_back({{"file", e.file}, {"sha256", sha256_hex(data)}, {"bytes", data.size()}});
  }
  const int status = result.errors.empty() ? 0 : result.errors.front().exit_code;

  std::ostringstream summary;
  summary << "ceqsim " << CEQSIM_VERSION << " " << command << "\n";
  summary << "output: " << dir.string() << "\n";
  for (const auto& t : result.tables) summary << "  " << t.file << " (" << t.rows.size() << " rows)\n";
  for (const auto& s : result.summary) summary << s << "\n";
  for (const auto& e : result.errors) summary << "failed: " << e.point << ": " << e.kind << ": " << e.message << "\n";
  summary << "status: " << status << "\n";
  write_file(dir / "summary.txt", summary.str());

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json manifest = json::object();
  manifest["toolkit"] = "ceqsim";
  manifest["version"] = CEQSIM_VERSION;
  manifest["config"] = r.config;
  manifest["wall_time_s"] = wall;
  manifest["exit_status"] = status;
  manifest["outputs"] = outputs;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");

  out << summary.str();
  if (status != 0) err << "ceqsim: " << result.errors.size() << " point(s) failed, see " << (dir / "errors.csv").string() << '\n';
  return status;
}

}  // namespace ceqcli
