#include "episodes/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstring>
#include <fstream>
#include <iterator>
#include <mutex>
#include <queue>
#include <thread>

#include "common/error.hpp"

namespace hideseek::episodes {

namespace fs = std::filesystem;

std::string to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "train";
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "val") return Split::Val;
  if (s == "test") return Split::Test;
  fail(Errc::FormatVersionMismatch, "unknown split '" + s + "'");
}

std::vector<TrainingSample> extract_samples(const sim::Simulator& sim, const EpisodeRecord& rec, int stride,
                                            bool latch_after_catch) {
  if (stride < 1) fail(Errc::InvalidArgument, "stride must be at least 1");
  const int terminal = rec.terminal_step;
  std::vector<int> times;
  for (int t = stride; t <= terminal; t += stride) times.push_back(t);
  if (terminal > 0 && (times.empty() || times.back() != terminal)) times.push_back(terminal);
  const bool caught = rec.cause == TerminalCause::Caught;
  if (caught && latch_after_catch) {
    for (int t = (terminal / stride + 1) * stride; t <= rec.max_steps; t += stride) times.push_back(t);
  }
  if (times.empty()) return {};

  const auto traj = hider_trajectory(sim, rec, times.back());
  sim::WorldState s0;
  s0.hider = rec.start.hider;
  s0.seeker = rec.start.seeker;
  const perception::Raster i_h0 = sim.hider_view(s0);

  std::vector<TrainingSample> out;
  out.reserve(times.size());
  for (int t : times) {
    TrainingSample smp;
    smp.seed = rec.seed;
    smp.t_i = t;
    smp.caught = caught && t >= terminal;
    smp.hider_t0 = rec.start.hider;
    smp.seeker_t0 = rec.start.seeker;
    smp.hider_ti = rec.hider_at(t);
    smp.seeker_ti = rec.seeker_at(t);
    smp.i_h0 = i_h0;
    smp.actions = perception::encode_actions(std::span(traj.data(), static_cast<std::size_t>(t) + 1), sim.raster());
    sim::WorldState st;
    st.hider = smp.hider_ti;
    st.seeker = smp.seeker_ti;
    smp.i_s = sim.seeker_view(st);
    out.push_back(std::move(smp));
  }
  return out;
}

namespace {

constexpr char kMagic[4] = {'H', 'S', 'R', 'D'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t& pos) {
  if (pos + 4 > in.size()) fail(Errc::FormatVersionMismatch, "truncated record");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[pos + i]) << (8 * i);
  pos += 4;
  return v;
}

void put_blob(std::vector<std::uint8_t>& out, const std::vector<std::uint8_t>& blob) {
  put_u32(out, static_cast<std::uint32_t>(blob.size()));
  out.insert(out.end(), blob.begin(), blob.end());
}

std::span<const std::uint8_t> get_blob(const std::vector<std::uint8_t>& in, std::size_t& pos) {
  const std::uint32_t n = get_u32(in, pos);
  if (pos + n > in.size()) fail(Errc::FormatVersionMismatch, "truncated record");
  std::span<const std::uint8_t> s(in.data() + pos, n);
  pos += n;
  return s;
}

std::vector<std::uint8_t> read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) fail(Errc::Io, "cannot open " + p.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(p, std::ios::binary);
  if (!f) fail(Errc::Io, "cannot open " + p.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) fail(Errc::Io, "write failed: " + p.string());
}

}  // namespace

std::vector<std::uint8_t> encode_record(const TrainingSample& s) {
  const nlohmann::json side = {
      {"episode", s.episode},
      {"seed", s.seed},
      {"t_i", s.t_i},
      {"caught", s.caught},
      {"split", to_string(s.split)},
      {"poses",
       {{"hider_t0", sim::pose_to_json(s.hider_t0)},
        {"seeker_t0", sim::pose_to_json(s.seeker_t0)},
        {"hider_ti", sim::pose_to_json(s.hider_ti)},
        {"seeker_ti", sim::pose_to_json(s.seeker_ti)}}},
  };
  const std::string text = side.dump();
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put_u32(out, kRecordVersion);
  put_blob(out, std::vector<std::uint8_t>(text.begin(), text.end()));
  for (const perception::Raster* r : {&s.i_h0, &s.actions.visitation, &s.actions.recency, &s.i_s}) {
    put_blob(out, perception::encode_png(*r));
  }
  return out;
}

TrainingSample decode_record(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    fail(Errc::FormatVersionMismatch, "bad record magic");
  }
  std::size_t pos = 4;
  const std::uint32_t version = get_u32(bytes, pos);
  if (version != kRecordVersion) {
    fail(Errc::FormatVersionMismatch, "record version " + std::to_string(version) + " is not supported");
  }
  const auto text = get_blob(bytes, pos);
  TrainingSample s;
  try {
    const auto side = nlohmann::json::parse(text.begin(), text.end());
    s.episode = side.at("episode").get<int>();
    s.seed = side.at("seed").get<std::uint64_t>();
    s.t_i = side.at("t_i").get<int>();
    s.caught = side.at("caught").get<bool>();
    s.split = parse_split(side.at("split").get<std::string>());
    const auto& p = side.at("poses");
    s.hider_t0 = sim::pose_from_json(p.at("hider_t0"));
    s.seeker_t0 = sim::pose_from_json(p.at("seeker_t0"));
    s.hider_ti = sim::pose_from_json(p.at("hider_ti"));
    s.seeker_ti = sim::pose_from_json(p.at("seeker_ti"));
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::FormatVersionMismatch, std::string("malformed record sidecar: ") + e.what());
  }
  s.i_h0 = perception::decode_png(get_blob(bytes, pos));
  s.actions.visitation = perception::decode_png(get_blob(bytes, pos));
  s.actions.recency = perception::decode_png(get_blob(bytes, pos));
  s.i_s = perception::decode_png(get_blob(bytes, pos));
  return s;
}

std::string record_name(const TrainingSample& s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "ep%06d_t%04d.hsr", s.episode, s.t_i);
  return buf;
}

namespace {

nlohmann::json manifest_json(const DatasetManifest& m) {
  return {{"format", "hideseek-dataset"},
          {"version", 1},
          {"count", m.count},
          {"width", m.width},
          {"height", m.height},
          {"palette_version", m.palette_version},
          {"scenario_hash", m.scenario_hash},
          {"scenario", m.scenario},
          {"collection", m.extra},
          {"records", m.records}};
}

void write_manifest(const DatasetManifest& m, const fs::path& dir) {
  std::ofstream f(dir / "manifest.json");
  if (!f) fail(Errc::Io, "cannot write manifest in " + dir.string());
  f << manifest_json(m).dump(1) << '\n';
}

DatasetManifest base_manifest(const sim::Scenario& scenario, const nlohmann::json& extra) {
  DatasetManifest m;
  m.width = scenario.obs_resolution;
  m.height = scenario.obs_resolution;
  m.palette_version = perception::palette::kVersion;
  m.scenario_hash = sim::scenario_hash(scenario);
  m.scenario = sim::to_json(scenario);
  m.extra = extra;
  return m;
}

}  // namespace

DatasetManifest write_dataset(const std::vector<TrainingSample>& samples, const fs::path& dir,
                              const sim::Scenario& scenario, const nlohmann::json& extra) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(Errc::Io, "cannot create " + dir.string() + ": " + ec.message());
  DatasetManifest m = base_manifest(scenario, extra);
  for (const auto& s : samples) {
    const std::string name = record_name(s);
    write_file(dir / name, encode_record(s));
    m.records.push_back(name);
  }
  std::sort(m.records.begin(), m.records.end());
  m.count = static_cast<int>(m.records.size());
  write_manifest(m, dir);
  return m;
}

DatasetManifest read_manifest(const fs::path& dir) {
  std::ifstream f(dir / "manifest.json");
  if (!f) fail(Errc::Io, "no manifest.json in " + dir.string());
  try {
    nlohmann::json j;
    f >> j;
    if (j.value("format", "") != "hideseek-dataset" || j.value("version", 0) != 1) {
      fail(Errc::FormatVersionMismatch, "unsupported dataset format in " + dir.string());
    }
    if (j.at("palette_version").get<int>() != perception::palette::kVersion) {
      fail(Errc::FormatVersionMismatch, "dataset palette version differs from this build");
    }
    DatasetManifest m;
    m.count = j.at("count").get<int>();
    m.width = j.at("width").get<int>();
    m.height = j.at("height").get<int>();
    m.palette_version = j.at("palette_version").get<int>();
    m.scenario_hash = j.at("scenario_hash").get<std::string>();
    m.scenario = j.at("scenario");
    m.extra = j.value("collection", nlohmann::json::object());
    m.records = j.at("records").get<std::vector<std::string>>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::FormatVersionMismatch, "malformed manifest in " + dir.string() + ": " + e.what());
  }
}

Dataset read_dataset(const fs::path& dir) {
  Dataset d;
  d.manifest = read_manifest(dir);
  d.samples.reserve(d.manifest.records.size());
  for (const auto& name : d.manifest.records) {
    d.samples.push_back(decode_record(read_file(dir / name)));
    const auto& s = d.samples.back();
    if (s.i_s.width != d.manifest.width || s.i_s.height != d.manifest.height) {
      fail(Errc::FormatVersionMismatch, "record " + name + " does not match manifest dimensions");
    }
  }
  return d;
}

Split split_for_episode(int episode, int total, const int weights[3]) {
  const int wsum = weights[0] + weights[1] + weights[2];
  const int n_train = total * weights[0] / wsum;
  const int n_val = total * weights[1] / wsum;
  if (episode < n_train) return Split::Train;
  if (episode < n_train + n_val) return Split::Val;
  return Split::Test;
}

std::uint64_t episode_seed(std::uint64_t seed, int episode) {
  return mix_seed(seed, 1000 + static_cast<std::uint64_t>(episode));
}

CollectSummary collect(const sim::Simulator& sim, const CollectOptions& opts, const fs::path& dir) {
  if (opts.episodes < 0) fail(Errc::InvalidArgument, "episode count must be non-negative");
  if (opts.policy == PolicyKind::Human && (!opts.bank || opts.bank->trajectories.empty())) {
    fail(Errc::EmptyBank, "human policy requires a non-empty trajectory bank");
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(Errc::Io, "cannot create " + dir.string() + ": " + ec.message());

  struct Encoded {
    int episode = 0;
    bool caught = false;
    std::vector<std::pair<std::string, std::vector<std::uint8_t>>> files;
    int caught_samples = 0;
  };

  std::mutex mu;
  std::condition_variable cv;
  std::queue<Encoded> ready;
  std::exception_ptr error;
  std::atomic<int> next{0};
  int finished_workers = 0;
  const int jobs = std::max(1, std::min(opts.jobs, std::max(1, opts.episodes)));

  auto worker = [&] {
    try {
      for (int e = next++; e < opts.episodes; e = next++) {
        const std::uint64_t seed = episode_seed(opts.seed, e);
        auto policy = make_policy(opts.policy, sim, seed, opts.bank);
        const EpisodeRecord rec = run_episode(sim, *policy, seed);
        Encoded enc;
        enc.episode = e;
        enc.caught = rec.cause == TerminalCause::Caught;
        for (auto& s : extract_samples(sim, rec, opts.stride, opts.latch_after_catch)) {
          s.episode = e;
          s.split = split_for_episode(e, opts.episodes, opts.split_weights);
          enc.caught_samples += s.caught;
          enc.files.emplace_back(record_name(s), encode_record(s));
        }
        std::lock_guard lock(mu);
        ready.push(std::move(enc));
        cv.notify_one();
      }
    } catch (...) {
      std::lock_guard lock(mu);
      if (!error) error = std::current_exception();
      next = opts.episodes;
    }
    std::lock_guard lock(mu);
    ++finished_workers;
    cv.notify_one();
  };

  std::vector<std::jthread> pool;
  for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);

  CollectSummary summary;
  DatasetManifest m = base_manifest(sim.scenario(), {});
  for (;;) {
    Encoded enc;
    {
      std::unique_lock lock(mu);
      cv.wait(lock, [&] { return !ready.empty() || finished_workers == jobs; });
      if (ready.empty()) break;
      enc = std::move(ready.front());
      ready.pop();
    }
    for (const auto& [name, bytes] : enc.files) {
      write_file(dir / name, bytes);
      m.records.push_back(name);
    }
    ++summary.episodes;
    summary.samples += static_cast<int>(enc.files.size());
    summary.caught_episodes += enc.caught;
    summary.caught_samples += enc.caught_samples;
  }
  pool.clear();
  if (error) std::rethrow_exception(error);

  std::sort(m.records.begin(), m.records.end());
  m.count = static_cast<int>(m.records.size());
  m.extra = {{"episodes", opts.episodes},
             {"policy", to_string(opts.policy)},
             {"seed", opts.seed},
             {"stride", opts.stride},
             {"latch_after_catch", opts.latch_after_catch},
             {"split_weights", {opts.split_weights[0], opts.split_weights[1], opts.split_weights[2]}},
             {"caught_episodes", summary.caught_episodes},
             {"caught_samples", summary.caught_samples}};
  write_manifest(m, dir);
  return summary;
}

}  // namespace hideseek::episodes
