#include "ecotext/energymeter.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <regex>

#include <fmt/format.h>

#include "ecotext/error.hpp"

namespace ecotext {
namespace {

std::uint64_t read_counter(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw EnergyBackendError("cannot read " + file.string() + " (check permissions)");
  std::uint64_t value = 0;
  if (!(in >> value)) throw EnergyBackendError("malformed counter in " + file.string());
  return value;
}

}  // namespace

std::string to_string(EnergyBackend backend) {
  switch (backend) {
    case EnergyBackend::rapl: return "rapl";
    case EnergyBackend::power_model: return "power-model";
    case EnergyBackend::manual: return "manual";
  }
  return "power-model";
}

EnergyBackend parse_energy_backend(const std::string& name) {
  if (name == "rapl") return EnergyBackend::rapl;
  if (name == "power-model" || name == "power_model") return EnergyBackend::power_model;
  if (name == "manual") return EnergyBackend::manual;
  throw ValidationError("unknown energy backend '" + name + "' (expected rapl, power-model or manual)");
}

std::string to_string(Phase phase) { return phase == Phase::train ? "train" : "predict"; }

Phase parse_phase(const std::string& name) {
  if (name == "train") return Phase::train;
  if (name == "predict") return Phase::predict;
  throw ValidationError("unknown phase '" + name + "'");
}

NormalizedCost normalize(const CostSample& sample) {
  if (sample.n_instances == 0) throw ValidationError("cost sample '" + sample.stage + "' has zero instances");
  const double n = static_cast<double>(sample.n_instances);
  NormalizedCost out;
  out.time_per_instance_s = sample.duration_s / n;
  out.energy_per_instance_j = sample.energy_j / n;
  out.energy_per_instance_kwh = out.energy_per_instance_j / kJoulesPerKwh;
  return out;
}

CostSample combine(const std::string& stage, Phase phase, std::size_t n_instances,
                   const std::vector<CostSample>& parts) {
  if (parts.empty()) throw ValidationError("combine: no cost samples");
  CostSample out;
  out.stage = stage;
  out.phase = phase;
  out.n_instances = n_instances;
  out.backend = parts.front().backend;
  for (const auto& p : parts) {
    if (p.backend != out.backend) throw ValidationError("combine: cost samples from different energy backends");
    out.duration_s += p.duration_s;
    out.energy_j += p.energy_j;
  }
  return out;
}

RaplReader::RaplReader(std::filesystem::path root) {
  std::error_code ec;
  if (!std::filesystem::is_directory(root, ec)) {
    throw EnergyBackendError("RAPL powercap directory " + root.string() + " does not exist");
  }
  // Package domains only: intel-rapl:N, not the intel-rapl:N:M subzones.
  static const std::regex package(R"(intel-rapl:\d+)");
  std::vector<std::filesystem::path> dirs;
  for (const auto& entry : std::filesystem::directory_iterator(root, ec)) {
    if (std::regex_match(entry.path().filename().string(), package)) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) {
    Domain d;
    d.energy_file = dir / "energy_uj";
    if (!std::filesystem::exists(d.energy_file)) continue;
    const auto range_file = dir / "max_energy_range_uj";
    d.max_range_uj = std::filesystem::exists(range_file) ? read_counter(range_file) : 0;
    read_counter(d.energy_file);  // fail early on unreadable counters
    domains_.push_back(std::move(d));
  }
  if (domains_.empty()) throw EnergyBackendError("no intel-rapl package domains under " + root.string());
}

std::vector<std::uint64_t> RaplReader::read() const {
  std::vector<std::uint64_t> out;
  out.reserve(domains_.size());
  for (const auto& d : domains_) out.push_back(read_counter(d.energy_file));
  return out;
}

double RaplReader::joules_between(const std::vector<std::uint64_t>& before,
                                  const std::vector<std::uint64_t>& after) const {
  if (before.size() != domains_.size() || after.size() != domains_.size()) {
    throw ValidationError("RAPL reading size does not match the domain count");
  }
  double total_uj = 0.0;
  for (std::size_t i = 0; i < domains_.size(); ++i) {
    if (after[i] >= before[i]) {
      total_uj += static_cast<double>(after[i] - before[i]);
    } else {
      if (domains_[i].max_range_uj == 0 || before[i] > domains_[i].max_range_uj) {
        throw EnergyBackendError("RAPL counter went backwards without a known range");
      }
      total_uj += static_cast<double>(domains_[i].max_range_uj - before[i] + after[i]);
    }
  }
  return total_uj * 1e-6;
}

// Marks the meter busy for the lifetime of one measurement.
class EnergyMeter::Session {
 public:
  explicit Session(std::atomic<bool>& flag) : flag_(flag) {
    if (flag_.exchange(true)) throw EnergyBackendError("nested energy measurements are not supported");
  }
  ~Session() { flag_.store(false); }
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

 private:
  std::atomic<bool>& flag_;
};

EnergyMeter::EnergyMeter(EnergyConfig config) : config_(std::move(config)) {
  if (config_.backend == EnergyBackend::rapl) {
    rapl_ = std::make_unique<RaplReader>(config_.rapl_root);
  } else if (config_.backend == EnergyBackend::power_model) {
    if (!(config_.watts > 0.0) || !std::isfinite(config_.watts)) {
      throw ValidationError("power-model backend needs watts > 0");
    }
  }
}

CostSample EnergyMeter::measure(const std::string& stage, Phase phase, std::size_t n_instances,
                                const std::function<void()>& work) {
  if (config_.backend == EnergyBackend::manual) {
    throw EnergyBackendError("the manual backend needs measure_reported with caller-supplied joules");
  }
  if (n_instances == 0) throw ValidationError("measure: n_instances must be > 0");
  Session session(active_);
  std::vector<std::uint64_t> before;
  if (rapl_) before = rapl_->read();
  const auto start = std::chrono::steady_clock::now();
  work();
  const auto stop = std::chrono::steady_clock::now();
  CostSample sample;
  sample.stage = stage;
  sample.phase = phase;
  sample.backend = config_.backend;
  sample.n_instances = n_instances;
  sample.duration_s = std::chrono::duration<double>(stop - start).count();
  sample.energy_j = rapl_ ? rapl_->joules_between(before, rapl_->read()) : config_.watts * sample.duration_s;
  return sample;
}

CostSample EnergyMeter::measure_reported(const std::string& stage, Phase phase, std::size_t n_instances,
                                         const std::function<double()>& work) {
  if (config_.backend != EnergyBackend::manual) {
    double ignored = 0.0;
    return measure(stage, phase, n_instances, [&] { ignored = work(); });
  }
  if (n_instances == 0) throw ValidationError("measure: n_instances must be > 0");
  Session session(active_);
  const auto start = std::chrono::steady_clock::now();
  const double joules = work();
  const auto stop = std::chrono::steady_clock::now();
  if (!std::isfinite(joules) || joules < 0.0) {
    throw ValidationError("manual energy for '" + stage + "' must be a finite, non-negative number of joules");
  }
  CostSample sample;
  sample.stage = stage;
  sample.phase = phase;
  sample.backend = EnergyBackend::manual;
  sample.n_instances = n_instances;
  sample.duration_s = std::chrono::duration<double>(stop - start).count();
  sample.energy_j = joules;
  return sample;
}

CostSample measure_stage(EnergyMeter& meter, const std::string& stage, Phase phase, std::size_t n_instances,
                         const std::function<void()>& work, double reported_joules) {
  const std::size_t instances = std::max<std::size_t>(n_instances, 1);
  if (meter.config().backend == EnergyBackend::manual) {
    return meter.measure_reported(stage, phase, instances, [&] {
      work();
      return reported_joules;
    });
  }
  return meter.measure(stage, phase, instances, work);
}

std::string cost_csv_header() {
  return "stage,phase,backend,duration_s,energy_J,n,time_per_instance_s,energy_per_instance_kWh";
}

std::string cost_csv_row(const CostSample& s) {
  const auto norm = normalize(s);
  return fmt::format("{},{},{},{},{},{},{},{}", s.stage, to_string(s.phase), to_string(s.backend), s.duration_s,
                     s.energy_j, s.n_instances, norm.time_per_instance_s, norm.energy_per_instance_kwh);
}

void write_cost_csv(const std::vector<CostSample>& samples, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << cost_csv_header() << '\n';
  for (const auto& s : samples) out << cost_csv_row(s) << '\n';
}

}  // namespace ecotext
