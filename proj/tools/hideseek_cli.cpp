#include <atomic>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hideseek/hideseek.h"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct RuntimeFailure {
  hs_status status;
};

void check(hs_status s) {
  if (s != HS_OK) throw RuntimeFailure{s};
}

// Owns a string returned by the library.
struct OwnedString {
  char* p = nullptr;
  ~OwnedString() { hs_string_free(p); }
  const char* c_str() const { return p ? p : ""; }
};

struct Simulator {
  hs_simulator* h = nullptr;
  explicit Simulator(const std::string& path) { check(hs_simulator_load(path.empty() ? nullptr : path.c_str(), &h)); }
  ~Simulator() { hs_simulator_free(h); }
};

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

void print_line(const char* json_line, void*) {
  std::cout << json_line << '\n' << std::flush;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: IoError: cannot open " << path << '\n';
    throw RuntimeFailure{HS_IO_ERROR};
  }
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    std::cerr << "error: InvalidArgument: " << path << ": " << e.what() << '\n';
    throw RuntimeFailure{HS_INVALID_ARGUMENT};
  }
}

struct TrainFlags {
  std::string data, out, config, vpt;
  std::optional<int> epochs, batch;
  std::optional<std::uint64_t> seed;
  std::optional<double> lr, width;

  json to_json() const {
    json j = config.empty() ? json::object() : read_json_file(config);
    if (epochs) j["epochs"] = *epochs;
    if (batch) j["batch"] = *batch;
    if (seed) j["seed"] = *seed;
    if (lr) j["lr"] = *lr;
    if (width) j["width"] = *width;
    return j;
  }
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--data", f.data, "Dataset directory written by collect")->required();
  cmd->add_option("--out", f.out, "Output checkpoint path")->required();
  cmd->add_option("--epochs", f.epochs, "Training epochs");
  cmd->add_option("--batch", f.batch, "Batch size");
  cmd->add_option("--seed", f.seed, "Seed for initialization, shuffling and augmentation");
  cmd->add_option("--lr", f.lr, "Initial learning rate");
  cmd->add_option("--width", f.width, "Channel width multiplier");
  cmd->add_option("--config", f.config, "JSON file with training settings; flags override it");
}

std::atomic<bool> g_stop{false};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hide-and-seek simulator and visual perspective taking pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", hs_version());

  std::string scenario;
  std::uint64_t seed = 1;

  // simulate
  int steps = 50;
  std::string policy = "scripted", bank, out;
  std::string episode_out = "episode.json", map_out = "map.json";
  auto* simulate = app.add_subcommand("simulate", "Run one episode and write its record");
  simulate->add_option("--scenario", scenario, "Scenario JSON (built-in default when omitted)");
  simulate->add_option("--seed", seed, "Episode seed");
  simulate->add_option("--steps", steps, "Step budget")->check(CLI::NonNegativeNumber);
  simulate->add_option("--policy", policy, "Hider policy")->check(CLI::IsMember({"random", "human", "scripted"}));
  simulate->add_option("--bank", bank, "Human trajectory bank (policy human)");
  simulate->add_option("--out", episode_out, "Episode record path")->capture_default_str();

  // collect
  int episodes = 100, jobs = 1, stride = 0;
  bool no_latch = false;
  auto* collect = app.add_subcommand("collect", "Generate a labelled dataset");
  collect->add_option("--scenario", scenario, "Scenario JSON");
  collect->add_option("--episodes", episodes, "Number of episodes")->check(CLI::PositiveNumber);
  collect->add_option("--policy", policy, "Hider policy")->check(CLI::IsMember({"random", "human", "scripted"}));
  collect->add_option("--bank", bank, "Human trajectory bank (policy human)");
  collect->add_option("--out", out, "Output directory")->required();
  collect->add_option("--seed", seed, "Master seed");
  collect->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  collect->add_option("--stride", stride, "Sample stride in steps (0 keeps the default)")->check(CLI::NonNegativeNumber);
  collect->add_flag("--no-latch", no_latch, "Stop sampling at the catch step");

  // export-bank
  std::vector<std::string> records;
  auto* export_bank = app.add_subcommand("export-bank", "Append hider action logs from episode records to a bank");
  export_bank->add_option("records", records, "Episode record files")->required();
  export_bank->add_option("--bank", bank, "Bank file")->required();

  // train-vpt / train-vpn
  TrainFlags vpt_flags, vpn_flags;
  auto* train_vpt = app.add_subcommand("train-vpt", "Train the perspective predictor");
  add_train_flags(train_vpt, vpt_flags);
  auto* train_vpn = app.add_subcommand("train-vpn", "Train the catch classifier");
  add_train_flags(train_vpn, vpn_flags);
  train_vpn->add_option("--model-vpt", vpn_flags.vpt, "Train on frames predicted by this model instead of oracle frames");

  // predict
  std::string model, sample;
  auto* predict = app.add_subcommand("predict", "Predict the seeker view for a stored sample");
  predict->add_option("--model", model, "Perspective predictor checkpoint")->required();
  predict->add_option("--sample", sample, "Dataset record file (.hsr)")->required();
  predict->add_option("--out", out, "Output PNG")->required();

  // model-info
  auto* info = app.add_subcommand("model-info", "Print checkpoint metadata");
  info->add_option("model", model, "Checkpoint path")->required();

  // plan
  std::string vpt_model, vpn_model, png;
  int horizon = 200, interval = 10, side = 11;
  auto* plan = app.add_subcommand("plan", "Compute a value map and pick a goal");
  plan->add_option("--scenario", scenario, "Scenario JSON");
  plan->add_option("--seed", seed, "Seed of the initial state");
  plan->add_option("--model-vpt", vpt_model, "Perspective predictor (oracle when omitted)");
  plan->add_option("--model-vpn", vpn_model, "Catch classifier (oracle when omitted)");
  plan->add_option("--horizon", horizon, "Prediction horizon in steps")->check(CLI::PositiveNumber);
  plan->add_option("--interval", interval, "Evaluation interval in steps")->check(CLI::PositiveNumber);
  plan->add_option("--side", side, "Goal lattice side")->check(CLI::PositiveNumber);
  plan->add_option("--out", map_out, "Value map JSON")->capture_default_str();
  plan->add_option("--png", png, "Heatmap PNG");

  // evaluate
  std::string mode, data, split = "test";
  int scenarios = 10;
  std::uint64_t eval_seed = 777;
  std::vector<int> horizons;
  auto* evaluate = app.add_subcommand("evaluate", "Score models against ground truth");
  evaluate->add_option("--mode", mode, "Evaluation mode")
      ->required()
      ->check(CLI::IsMember({"ranking", "horizon", "vpn-accuracy"}));
  evaluate->add_option("--scenario", scenario, "Scenario JSON");
  evaluate->add_option("--model-vpt", vpt_model, "Perspective predictor");
  evaluate->add_option("--model-vpn", vpn_model, "Catch classifier");
  evaluate->add_option("--scenarios", scenarios, "Held-out start states")->check(CLI::PositiveNumber);
  evaluate->add_option("--seed", eval_seed, "Seed of the held-out states");
  evaluate->add_option("--horizons", horizons, "Horizons to evaluate");
  evaluate->add_option("--interval", interval, "Evaluation interval in steps")->check(CLI::PositiveNumber);
  evaluate->add_option("--data", data, "Dataset directory (vpn-accuracy)");
  evaluate->add_option("--split", split, "Dataset split (vpn-accuracy)")
      ->check(CLI::IsMember({"train", "val", "test"}));

  // serve
  std::string bind, session_mode = "hider";
  int auto_step = 0;
  auto* serve = app.add_subcommand("serve", "Run the WebSocket play service");
  serve->add_option("--scenario", scenario, "Scenario JSON");
  serve->add_option("--bind", bind, "host:port (defaults to $HIDESEEK_BIND or 127.0.0.1:8765)");
  serve->add_option("--bank", bank, "Bank file that receives saved sessions");
  serve->add_option("--auto-step-ms", auto_step, "Apply Stay after this many idle ms (0 disables)")
      ->check(CLI::NonNegativeNumber);
  serve->add_option("--mode", session_mode, "Rendered view")->check(CLI::IsMember({"hider", "spectate"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code != 0 && e.get_exit_code() != static_cast<int>(CLI::ExitCodes::Success)) {
      std::cerr << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
      return kExitUsage;
    }
    return kExitOk;
  }

  try {
    OwnedString summary;
    if (simulate->parsed()) {
      Simulator sim(scenario);
      check(hs_simulate(sim.h, seed, steps, policy.c_str(), opt(bank), episode_out.c_str(), &summary.p));
    } else if (collect->parsed()) {
      Simulator sim(scenario);
      json o = {{"episodes", episodes}, {"policy", policy}, {"seed", seed}, {"jobs", jobs}, {"latch", !no_latch}};
      if (stride > 0) o["stride"] = stride;
      if (!bank.empty()) o["bank"] = bank;
      check(hs_collect(sim.h, o.dump().c_str(), out.c_str(), &summary.p));
    } else if (export_bank->parsed()) {
      std::vector<const char*> paths;
      for (const auto& r : records) paths.push_back(r.c_str());
      int written = 0;
      check(hs_export_bank(paths.data(), paths.size(), bank.c_str(), &written));
      std::cout << json{{"written", written}, {"bank", bank}}.dump() << '\n';
      return kExitOk;
    } else if (train_vpt->parsed()) {
      const auto cfg = vpt_flags.to_json().dump();
      check(hs_train_vpt(vpt_flags.data.c_str(), cfg.c_str(), vpt_flags.out.c_str(), print_line, nullptr, &summary.p));
    } else if (train_vpn->parsed()) {
      const auto cfg = vpn_flags.to_json().dump();
      check(hs_train_vpn(vpn_flags.data.c_str(), opt(vpn_flags.vpt), cfg.c_str(), vpn_flags.out.c_str(), print_line,
                         nullptr, &summary.p));
    } else if (predict->parsed()) {
      check(hs_predict(model.c_str(), sample.c_str(), out.c_str(), &summary.p));
    } else if (info->parsed()) {
      check(hs_model_info(model.c_str(), &summary.p));
    } else if (plan->parsed()) {
      Simulator sim(scenario);
      const json o = {{"horizon", horizon}, {"interval", interval}, {"side", side}};
      check(hs_plan(sim.h, seed, opt(vpt_model), opt(vpn_model), o.dump().c_str(), map_out.c_str(), opt(png), &summary.p));
    } else if (evaluate->parsed()) {
      Simulator sim(scenario);
      json o = {{"scenarios", scenarios}, {"seed", eval_seed}, {"interval", interval}, {"split", split}};
      if (!horizons.empty()) o["horizons"] = horizons;
      if (!data.empty()) o["data"] = data;
      check(hs_evaluate(sim.h, mode.c_str(), opt(vpt_model), opt(vpn_model), o.dump().c_str(), &summary.p));
    } else if (serve->parsed()) {
      Simulator sim(scenario);
      json o = {{"auto_step_ms", auto_step}, {"mode", session_mode}};
      if (!bank.empty()) o["bank"] = bank;
      // Block the signals before any server thread exists so only sigwait sees them.
      sigset_t set;
      sigemptyset(&set);
      sigaddset(&set, SIGINT);
      sigaddset(&set, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &set, nullptr);
      hs_server* server = nullptr;
      check(hs_server_start(sim.h, opt(bind), o.dump().c_str(), &server));
      std::cerr << "listening on port " << hs_server_port(server) << '\n';
      std::cout << json{{"port", hs_server_port(server)}}.dump() << '\n' << std::flush;
      int sig = 0;
      sigwait(&set, &sig);
      hs_server_stop(server);
      hs_server_free(server);
      return kExitOk;
    }
    std::cout << summary.c_str() << '\n';
    return kExitOk;
  } catch (const RuntimeFailure& f) {
    const char* detail = hs_last_error();
    if (*detail) std::cerr << "error: " << hs_status_name(f.status) << ": " << detail << '\n';
    return kExitRuntime;
  }
}
