#include "homsim/checkpoint.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian");

namespace homsim {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string range_tag(const std::vector<std::pair<std::uint64_t, std::uint64_t>>& rs) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%012llu-%012llu",
                static_cast<unsigned long long>(rs.front().first),
                static_cast<unsigned long long>(rs.back().second));
  return buf;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json schedule_echo(const PulseSchedule& s) {
  json j;
  j["lattice_vector_k0"] = s.lattice_vector;
  j["relative_phase_rad"] = s.relative_phase;
  json segs = json::array();
  for (const auto& seg : s.segments) {
    json e;
    e["centre"] = seg.centre;
    e["tau"] = seg.tau;
    e["depth"] = seg.depth;
    e["area_rad"] = seg.area;
    segs.push_back(e);
  }
  j["segments"] = segs;
  return j;
}

void ranges_must_be_disjoint(
    std::vector<std::pair<std::uint64_t, std::uint64_t>> rs) {
  std::sort(rs.begin(), rs.end());
  for (std::size_t i = 1; i < rs.size(); ++i)
    if (rs[i].first < rs[i - 1].second)
      throw DataError("checkpoint trajectory ranges overlap; refusing to merge");
}

}  // namespace

Checkpoint Checkpoint::from_run(RunResult&& run) {
  Checkpoint cp;
  cp.params = std::move(run.params);
  cp.moments = std::move(run.moments);
  cp.ranges = std::move(run.ranges);
  return cp;
}

void Checkpoint::save(const std::string& dir) const {
  std::error_code ec;
  fs::create_directories(dir, ec);
  const std::string tag = range_tag(ranges);
  const std::string moments_name = "moments-" + tag + ".bin";

  json man;
  man["format"] = "homsim-checkpoint";
  man["version"] = 1;
  man["tool_version"] = tool_version;
  man["created_utc"] = utc_now();
  man["config_hash"] = to_hex(params.config_hash);
  man["canonical_config"] = params.canonical_echo;
  man["seed"] = params.seed;
  {
    json rs = json::array();
    for (const auto& [b, e] : ranges) rs.push_back({b, e});
    man["trajectory_ranges"] = rs;
  }
  man["n_trajectories"] = moments.trajectories();
  man["n_flagged"] = moments.flagged();
  man["reliable"] = moments.flagged_fraction() <= 0.01;
  man["dims"] = params.dims;
  man["grid_points"] = params.grid_points;
  man["grid_lengths"] = params.grid_lengths;
  man["halo_radius"] = params.halo_radius;
  man["bin_widths_k0"] = params.bin_widths;
  man["theta_list_rad"] = params.theta_list;
  man["wing_threshold_rad"] = params.wing_threshold;
  man["dt_internal"] = params.dt;
  man["timeline"] = {{"t1", params.t1},
                     {"t2", params.t2},
                     {"t3", params.t3},
                     {"t3_pre", params.t3_pre},
                     {"t4", params.t4}};
  man["atom_number"] = params.atom_number;
  man["interaction_u"] = params.interaction_u;
  man["schedule"] = schedule_echo(params.schedule);
  man["moments_file"] = moments_name;

  // Block index plus the raw data file.
  const auto blocks = moments.blocks();
  json index = json::array();
  std::ofstream bin(fs::path(dir) / moments_name, std::ios::binary);
  if (!bin) throw IoError("cannot write " + moments_name);
  std::uint64_t offset = 0;
  for (const auto& [name, data] : blocks) {
    json e;
    e["name"] = name;
    e["offset_doubles"] = offset;
    e["count"] = data->size();
    e["fnv64"] = to_hex(fnv1a64(data->data(), data->size() * sizeof(double)));
    index.push_back(e);
    bin.write(reinterpret_cast<const char*>(data->data()),
              static_cast<std::streamsize>(data->size() * sizeof(double)));
    offset += data->size();
  }
  man["blocks"] = index;
  man["moments_doubles"] = offset;
  if (!bin) throw IoError("write failed for " + moments_name);
  bin.close();

  std::ofstream mout(fs::path(dir) / ("manifest-" + tag + ".json"),
                     std::ios::binary);
  if (!mout) throw IoError("cannot write checkpoint manifest");
  mout << man.dump(2) << "\n";
  if (!mout) throw IoError("write failed for checkpoint manifest");
}

Checkpoint Checkpoint::load(const std::string& manifest_path) {
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + manifest_path + "'");
  json man;
  try {
    in >> man;
  } catch (const std::exception& e) {
    throw DataError("manifest '" + manifest_path + "' is not valid JSON: " +
                    e.what());
  }
  if (man.value("format", "") != "homsim-checkpoint")
    throw DataError("'" + manifest_path + "' is not a homsim checkpoint manifest");

  Checkpoint cp;
  SimulationParams& p = cp.params;
  p.canonical_echo = man.at("canonical_config").get<std::string>();
  p.config_hash = std::stoull(man.at("config_hash").get<std::string>(), nullptr, 16);
  if (fnv1a64(p.canonical_echo) != p.config_hash)
    throw DataError("config hash mismatch: the manifest echo does not reproduce "
                    "the stored hash");
  p.seed = man.at("seed").get<std::uint64_t>();
  p.dims = man.at("dims").get<int>();
  p.grid_points = man.at("grid_points").get<std::array<int, 3>>();
  p.grid_lengths = man.at("grid_lengths").get<std::array<double, 3>>();
  p.halo_radius = man.at("halo_radius").get<double>();
  p.bin_widths = man.at("bin_widths_k0").get<std::array<double, 3>>();
  p.theta_list = man.at("theta_list_rad").get<std::vector<double>>();
  p.wing_threshold = man.at("wing_threshold_rad").get<double>();
  p.dt = man.at("dt_internal").get<double>();
  p.t1 = man.at("timeline").at("t1").get<double>();
  p.t2 = man.at("timeline").at("t2").get<double>();
  p.t3 = man.at("timeline").at("t3").get<double>();
  p.t3_pre = man.at("timeline").at("t3_pre").get<double>();
  p.t4 = man.at("timeline").at("t4").get<double>();
  p.atom_number = man.at("atom_number").get<double>();
  p.interaction_u = man.at("interaction_u").get<double>();
  {
    const json& s = man.at("schedule");
    p.schedule.lattice_vector = s.at("lattice_vector_k0").get<std::array<double, 3>>();
    p.schedule.relative_phase = s.at("relative_phase_rad").get<double>();
    for (const auto& seg : s.at("segments")) {
      PulseSegment ps;
      ps.centre = seg.at("centre").get<double>();
      ps.tau = seg.at("tau").get<double>();
      ps.depth = seg.at("depth").get<double>();
      ps.area = seg.at("area_rad").get<double>();
      p.schedule.segments.push_back(ps);
    }
  }
  for (const auto& r : man.at("trajectory_ranges"))
    cp.ranges.emplace_back(r.at(0).get<std::uint64_t>(), r.at(1).get<std::uint64_t>());

  std::size_t n_cells = 1;
  for (int a = 0; a < p.dims; ++a) n_cells *= p.grid_points[a];
  cp.moments = EnsembleMoments(n_cells, p.theta_list.size());

  const fs::path bin_path =
      fs::path(manifest_path).parent_path() / man.at("moments_file").get<std::string>();
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw IoError("cannot open '" + bin_path.string() + "'");

  for (const auto& e : man.at("blocks")) {
    const std::string name = e.at("name").get<std::string>();
    const std::uint64_t offset = e.at("offset_doubles").get<std::uint64_t>();
    const std::uint64_t count = e.at("count").get<std::uint64_t>();
    std::vector<double> data(count);
    bin.seekg(static_cast<std::streamoff>(offset * sizeof(double)));
    bin.read(reinterpret_cast<char*>(data.data()),
             static_cast<std::streamsize>(count * sizeof(double)));
    if (!bin)
      throw DataError("checkpoint block '" + name + "' is truncated in " +
                      bin_path.string());
    const std::string want = e.at("fnv64").get<std::string>();
    const std::string have = to_hex(fnv1a64(data.data(), count * sizeof(double)));
    if (want != have)
      throw DataError("checkpoint block '" + name + "' is corrupted (checksum " +
                      have + ", manifest says " + want + ")");
    cp.moments.load_block(name, data);
  }
  cp.moments.set_counts(man.at("n_trajectories").get<std::uint64_t>(),
                        man.at("n_flagged").get<std::uint64_t>());
  return cp;
}

Checkpoint Checkpoint::load_dir(const std::string& dir) {
  const auto manifests = find_manifests(dir);
  if (manifests.empty())
    throw IoError("no checkpoint manifests found in '" + dir + "'");
  Checkpoint cp = load(manifests.front());
  for (std::size_t i = 1; i < manifests.size(); ++i) cp.merge(load(manifests[i]));
  return cp;
}

void Checkpoint::merge(const Checkpoint& other) {
  if (other.params.config_hash != params.config_hash)
    throw DataError("cannot merge checkpoints with different config hashes");
  if (other.params.seed != params.seed)
    throw DataError("cannot merge checkpoints with different seeds");
  auto all = ranges;
  all.insert(all.end(), other.ranges.begin(), other.ranges.end());
  ranges_must_be_disjoint(all);
  moments.merge(other.moments);
  ranges = std::move(all);
  std::sort(ranges.begin(), ranges.end());
}

std::vector<std::string> find_manifests(const std::string& dir) {
  std::vector<std::string> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("manifest-", 0) == 0 && name.size() > 5 &&
        name.substr(name.size() - 5) == ".json")
      out.push_back(entry.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace homsim
