#include "hideseek/hideseek.h"

#include <cstring>
#include <string>

#include "common/error.hpp"
#include "pipeline/pipeline.hpp"
#include "service/server.hpp"

struct hs_simulator {
  hideseek::sim::Simulator sim;
};

struct hs_server {
  hideseek::sim::Simulator sim;
  std::unique_ptr<hideseek::service::Server> server;
};

namespace {

using namespace hideseek;
using nlohmann::json;

thread_local std::string g_last_error;

hs_status set_error(hs_status code, const std::string& what) {
  g_last_error = what;
  return code;
}

// Runs `f`, mapping exceptions to status codes.
template <class F>
hs_status guard(F&& f) {
  try {
    f();
    g_last_error.clear();
    return HS_OK;
  } catch (const Error& e) {
    return set_error(static_cast<hs_status>(e.code()), e.what());
  } catch (const json::exception& e) {
    return set_error(HS_INVALID_ARGUMENT, std::string("JSON: ") + e.what());
  } catch (const std::bad_alloc&) {
    return set_error(HS_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(HS_INTERNAL, e.what());
  }
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void put(char** out, const json& j) {
  if (out) *out = dup(j.dump());
}

void require(const void* p, const char* name) {
  if (!p) fail(Errc::InvalidArgument, std::string(name) + " must not be NULL");
}

json parse_options(const char* text) {
  if (!text || !*text) return json::object();
  auto j = json::parse(text);
  if (!j.is_object()) fail(Errc::InvalidArgument, "options must be a JSON object");
  return j;
}

std::optional<std::filesystem::path> opt_path(const char* p) {
  if (!p || !*p) return std::nullopt;
  return std::filesystem::path(p);
}

models::EpochCallback progress_callback(hs_progress_fn fn, void* user) {
  if (!fn) return {};
  return [fn, user](const models::EpochMetrics& m) { fn(models::to_json(m).dump().c_str(), user); };
}

std::vector<int> int_list(const json& j, const char* key, std::vector<int> fallback) {
  return j.contains(key) ? j[key].get<std::vector<int>>() : fallback;
}

}  // namespace

extern "C" {

const char* hs_version(void) { return "1.0.0"; }

const char* hs_status_name(hs_status status) {
  if (status == HS_OK) return "Ok";
  return errc_name(static_cast<Errc>(status));
}

const char* hs_last_error(void) { return g_last_error.c_str(); }

void hs_string_free(char* s) { std::free(s); }

hs_status hs_simulator_load(const char* scenario_path, hs_simulator** out) {
  return guard([&] {
    require(out, "out");
    *out = nullptr;
    sim::Scenario sc = scenario_path ? sim::load_scenario(scenario_path) : sim::Scenario{};
    *out = new hs_simulator{sim::Simulator(std::move(sc))};
  });
}

hs_status hs_simulator_from_json(const char* scenario_json, hs_simulator** out) {
  return guard([&] {
    require(out, "out");
    require(scenario_json, "scenario_json");
    *out = nullptr;
    *out = new hs_simulator{sim::Simulator(sim::scenario_from_json(json::parse(scenario_json)))};
  });
}

void hs_simulator_free(hs_simulator* sim) { delete sim; }

hs_status hs_simulator_scenario_json(const hs_simulator* sim, char** out_json) {
  return guard([&] {
    require(sim, "sim");
    require(out_json, "out_json");
    put(out_json, sim::to_json(sim->sim.scenario()));
  });
}

hs_status hs_simulator_hash(const hs_simulator* sim, char** out_hex) {
  return guard([&] {
    require(sim, "sim");
    require(out_hex, "out_hex");
    *out_hex = dup(sim::scenario_hash(sim->sim.scenario()));
  });
}

hs_status hs_simulate(const hs_simulator* sim, uint64_t seed, int steps, const char* policy, const char* bank_path,
                      const char* out_path, char** out_summary_json) {
  return guard([&] {
    require(sim, "sim");
    const auto kind = episodes::parse_policy_kind(policy ? policy : "scripted");
    std::optional<episodes::HumanTrajectoryBank> bank;
    if (bank_path && *bank_path) bank = episodes::load_bank(bank_path);
    const auto rec = pipeline::simulate(sim->sim, seed, steps, kind, bank ? &*bank : nullptr);
    if (out_path && *out_path) episodes::save_episode(rec, out_path);
    put(out_summary_json, {{"seed", rec.seed},
                           {"terminal_step", rec.terminal_step},
                           {"caught", rec.cause == episodes::TerminalCause::Caught},
                           {"scenario_hash", rec.scenario_hash}});
  });
}

hs_status hs_collect(const hs_simulator* sim, const char* options_json, const char* out_dir,
                     char** out_summary_json) {
  return guard([&] {
    require(sim, "sim");
    require(out_dir, "out_dir");
    const auto o = parse_options(options_json);
    episodes::CollectOptions opts;
    std::optional<episodes::HumanTrajectoryBank> bank;
    for (const auto& [key, v] : o.items()) {
      if (key == "episodes") opts.episodes = v.get<int>();
      else if (key == "policy") opts.policy = episodes::parse_policy_kind(v.get<std::string>());
      else if (key == "seed") opts.seed = v.get<std::uint64_t>();
      else if (key == "jobs") opts.jobs = v.get<int>();
      else if (key == "stride") opts.stride = v.get<int>();
      else if (key == "latch") opts.latch_after_catch = v.get<bool>();
      else if (key == "bank") bank = episodes::load_bank(v.get<std::string>());
      else fail(Errc::InvalidArgument, "unknown collect option '" + key + "'");
    }
    opts.bank = bank ? &*bank : nullptr;
    const auto s = episodes::collect(sim->sim, opts, out_dir);
    put(out_summary_json, {{"episodes", s.episodes},
                           {"samples", s.samples},
                           {"caught_episodes", s.caught_episodes},
                           {"caught_samples", s.caught_samples}});
  });
}

hs_status hs_export_bank(const char* const* episode_paths, size_t count, const char* bank_path, int* out_written) {
  return guard([&] {
    require(bank_path, "bank_path");
    if (count > 0) require(episode_paths, "episode_paths");
    std::vector<std::filesystem::path> paths;
    for (size_t i = 0; i < count; ++i) {
      require(episode_paths[i], "episode path");
      paths.emplace_back(episode_paths[i]);
    }
    const int n = pipeline::export_bank(paths, bank_path);
    if (out_written) *out_written = n;
  });
}

hs_status hs_train_vpt(const char* data_dir, const char* config_json, const char* out_model, hs_progress_fn progress,
                       void* user, char** out_summary_json) {
  return guard([&] {
    require(data_dir, "data_dir");
    require(out_model, "out_model");
    const auto cfg = models::train_config_from_json(parse_options(config_json), models::vpt_defaults());
    put(out_summary_json, pipeline::train_vpt(data_dir, cfg, out_model, progress_callback(progress, user)));
  });
}

hs_status hs_train_vpn(const char* data_dir, const char* vpt_model, const char* config_json, const char* out_model,
                       hs_progress_fn progress, void* user, char** out_summary_json) {
  return guard([&] {
    require(data_dir, "data_dir");
    require(out_model, "out_model");
    const auto cfg = models::train_config_from_json(parse_options(config_json), models::vpn_defaults());
    put(out_summary_json,
        pipeline::train_vpn(data_dir, opt_path(vpt_model), cfg, out_model, progress_callback(progress, user)));
  });
}

hs_status hs_predict(const char* vpt_model, const char* record_path, const char* out_png, char** out_summary_json) {
  return guard([&] {
    require(vpt_model, "vpt_model");
    require(record_path, "record_path");
    require(out_png, "out_png");
    put(out_summary_json, pipeline::predict(vpt_model, record_path, out_png));
  });
}

hs_status hs_model_info(const char* model_path, char** out_json) {
  return guard([&] {
    require(model_path, "model_path");
    require(out_json, "out_json");
    auto ckpt = nn::load_checkpoint(model_path);
    auto meta = pipeline::model_info(ckpt).meta;
    meta["parameters"] = ckpt.model.parameter_count();
    meta["forward_macs"] = ckpt.model.forward_macs();
    put(out_json, meta);
  });
}

hs_status hs_plan(const hs_simulator* sim, uint64_t seed, const char* vpt_model, const char* vpn_model,
                  const char* options_json, const char* out_json, const char* out_png, char** out_summary_json) {
  return guard([&] {
    require(sim, "sim");
    const auto o = parse_options(options_json);
    planner::ValueMapConfig cfg;
    cfg.horizon = o.value("horizon", cfg.horizon);
    cfg.interval = o.value("interval", cfg.interval);
    cfg.side = o.value("side", cfg.side);
    auto parts = pipeline::load_components(sim->sim, opt_path(vpt_model), opt_path(vpn_model));
    const auto state = sim->sim.initial_state(seed);
    const auto r = pipeline::plan(sim->sim, state, parts, cfg);
    if (out_json && *out_json) planner::save_value_map(r.map, out_json, r.selected);
    if (out_png && *out_png) perception::write_png(planner::render_heatmap(sim->sim, r.map), out_png);
    const auto& g = r.map.lattice.goals[static_cast<std::size_t>(r.selected)];
    put(out_summary_json, {{"selected", r.selected},
                           {"goal_xy", {g.xy.x, g.xy.y}},
                           {"safety", *r.map.safety(static_cast<std::size_t>(r.selected))},
                           {"seconds", r.seconds},
                           {"predictor", parts.learned_predictor ? "learned" : "oracle"},
                           {"classifier", parts.learned_classifier ? "learned" : "oracle"}});
  });
}

hs_status hs_evaluate(const hs_simulator* sim, const char* mode, const char* vpt_model, const char* vpn_model,
                      const char* options_json, char** out_result_json) {
  return guard([&] {
    require(sim, "sim");
    require(mode, "mode");
    const auto o = parse_options(options_json);
    const std::string m = mode;
    if (m == "ranking" || m == "horizon") {
      const auto horizons = int_list(o, "horizons", m == "ranking" ? std::vector<int>{200} : std::vector<int>{200, 250, 300, 350});
      const auto states = pipeline::evaluation_states(sim->sim, o.value("seed", std::uint64_t{777}), o.value("scenarios", 10));
      auto parts = pipeline::load_components(sim->sim, opt_path(vpt_model), opt_path(vpn_model));
      put(out_result_json, {{"mode", m}, {"horizons", pipeline::evaluate_ranking(sim->sim, parts, states, horizons,
                                                                                 o.value("interval", 10))}});
    } else if (m == "vpn-accuracy") {
      require(vpn_model, "vpn_model");
      if (!o.contains("data")) fail(Errc::InvalidArgument, "vpn-accuracy needs a 'data' directory");
      const auto split = episodes::parse_split(o.value("split", std::string("test")));
      auto r = pipeline::evaluate_vpn_accuracy(o["data"].get<std::string>(), vpn_model, opt_path(vpt_model), split);
      r["mode"] = m;
      put(out_result_json, r);
    } else {
      fail(Errc::InvalidArgument, "unknown evaluation mode '" + m + "'");
    }
  });
}

hs_status hs_server_start(const hs_simulator* sim, const char* bind_addr, const char* options_json, hs_server** out) {
  return guard([&] {
    require(sim, "sim");
    require(out, "out");
    *out = nullptr;
    const auto o = parse_options(options_json);
    service::ServerOptions opts;
    opts.bind = bind_addr && *bind_addr ? std::string(bind_addr) : service::default_bind_address();
    if (o.contains("bank")) opts.bank = o["bank"].get<std::string>();
    opts.auto_step_ms = o.value("auto_step_ms", 0);
    const auto mode = o.value("mode", std::string("hider"));
    if (mode == "hider") opts.mode = service::SessionMode::HumanHider;
    else if (mode == "spectate") opts.mode = service::SessionMode::Spectate;
    else fail(Errc::InvalidArgument, "unknown session mode '" + mode + "'");
    auto handle = std::make_unique<hs_server>(hs_server{sim->sim, nullptr});
    handle->server = std::make_unique<service::Server>(handle->sim, opts);
    handle->server->start();
    *out = handle.release();
  });
}

int hs_server_port(const hs_server* server) { return server ? server->server->port() : 0; }

void hs_server_wait(hs_server* server) {
  if (server) server->server->wait();
}

void hs_server_stop(hs_server* server) {
  if (server) server->server->stop();
}

void hs_server_free(hs_server* server) { delete server; }

}  // extern "C"
