#include "CLI11.hpp"
#include "experiments.hpp"

#include <cmath>
#include <deque>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <variant>

using namespace tracelab;
using namespace tracelab::cli;

namespace {

// Storage for the auto-generated --<param> options of one subcommand.
struct ParamBinding {
  std::string key;
  std::variant<std::int64_t, double, std::string, std::vector<double>> value;
  bool integral_list = false;
  CLI::Option* option = nullptr;
};

std::string flag_name(std::string key) {
  for (char& ch : key)
    if (ch == '_') ch = '-';
  return "--" + key;
}

Json collect_overrides(const std::deque<ParamBinding>& bindings) {
  Json out = Json::object();
  for (const auto& b : bindings) {
    if (b.option->count() == 0) continue;
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, std::vector<double>>) {
            Json arr = Json::array();
            for (double x : v) {
              if (b.integral_list && x == std::floor(x)) arr.push_back(static_cast<std::int64_t>(x));
              else arr.push_back(x);
            }
            out[b.key] = arr;
          } else {
            out[b.key] = v;
          }
        },
        b.value);
  }
  return out;
}

int run_and_write(RunConfig config, const std::string& out_dir) {
  const ExperimentResult result = run_experiment(config);
  write_artifacts(config, result, out_dir);
  std::cout << config.experiment << ": wrote " << (std::filesystem::path(out_dir) / (config.experiment + ".csv")).string()
            << " (" << result.table.rows().size() << " rows)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tracelab: randomized trace estimation experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(TRACELAB_VERSION));

  struct Common {
    std::uint64_t seed = 1;
    std::string out = "out";
    int threads = 1;
  };
  std::map<std::string, Common> common;
  std::map<std::string, std::deque<ParamBinding>> bindings;

  for (const auto& info : experiments()) {
    CLI::App* sub = app.add_subcommand(info.name, info.description);
    Common& c = common[info.name];
    sub->add_option("--seed", c.seed, "Root seed")->capture_default_str();
    sub->add_option("--out", c.out, "Output directory")->capture_default_str();
    sub->add_option("--threads", c.threads, "Worker threads (results do not depend on it)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    auto& list = bindings[info.name];
    for (const auto& [key, def] : info.defaults.items()) {
      ParamBinding& b = list.emplace_back();
      b.key = key;
      const std::string desc = "default " + def.dump();
      if (def.is_number_integer()) {
        b.value = def.get<std::int64_t>();
        b.option = sub->add_option(flag_name(key), std::get<std::int64_t>(b.value), desc);
      } else if (def.is_number()) {
        b.value = def.get<double>();
        b.option = sub->add_option(flag_name(key), std::get<double>(b.value), desc);
      } else if (def.is_array()) {
        b.value = std::vector<double>();
        b.integral_list = !def.empty() && def.front().is_number_integer();
        b.option = sub->add_option(flag_name(key), std::get<std::vector<double>>(b.value), desc)
                       ->delimiter(',')
                       ->type_name(b.integral_list ? "INT,..." : "FLOAT,...");
      } else {
        b.value = def.get<std::string>();
        b.option = sub->add_option(flag_name(key), std::get<std::string>(b.value), desc);
      }
    }
  }

  std::string manifest_path, replay_out = "out";
  int replay_threads = 0;
  CLI::App* replay = app.add_subcommand("replay", "Re-run the configuration recorded in a manifest.json");
  replay->add_option("manifest", manifest_path, "Path to manifest.json")->required();
  replay->add_option("--out", replay_out, "Output directory")->capture_default_str();
  replay->add_option("--threads", replay_threads, "Override the recorded thread count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (replay->parsed()) {
      std::ifstream is(manifest_path);
      if (!is) throw ConfigError("cannot read " + manifest_path);
      Json manifest;
      try {
        manifest = Json::parse(is);
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("manifest: ") + e.what());
      }
      RunConfig config = config_from_manifest(manifest);
      if (replay_threads > 0) config.threads = replay_threads;
      return run_and_write(std::move(config), replay_out);
    }
    for (const auto& info : experiments()) {
      if (!app.got_subcommand(info.name)) continue;
      const Common& c = common[info.name];
      RunConfig config;
      config.experiment = info.name;
      config.seed = c.seed;
      config.threads = c.threads;
      config.params = collect_overrides(bindings[info.name]);
      return run_and_write(std::move(config), c.out);
    }
  } catch (const ConfigError& e) {
    std::cerr << "tracelab: configuration error: " << e.what() << "\n";
    return 2;
  } catch (const DimensionError& e) {
    std::cerr << "tracelab: configuration error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "tracelab: numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
