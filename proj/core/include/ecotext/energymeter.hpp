#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace ecotext {

enum class EnergyBackend { rapl, power_model, manual };

std::string to_string(EnergyBackend backend);
// Accepts "rapl", "power-model"/"power_model", "manual".
EnergyBackend parse_energy_backend(const std::string& name);

enum class Phase { train, predict };

std::string to_string(Phase phase);
Phase parse_phase(const std::string& name);

struct EnergyConfig {
  EnergyBackend backend = EnergyBackend::power_model;
  double watts = 45.0;
  std::filesystem::path rapl_root = "/sys/class/powercap";
};

struct CostSample {
  std::string stage;
  Phase phase = Phase::train;
  double duration_s = 0.0;
  double energy_j = 0.0;
  EnergyBackend backend = EnergyBackend::power_model;
  std::size_t n_instances = 1;
};

struct NormalizedCost {
  double time_per_instance_s = 0.0;
  double energy_per_instance_j = 0.0;
  double energy_per_instance_kwh = 0.0;
};

inline constexpr double kJoulesPerKwh = 3.6e6;

NormalizedCost normalize(const CostSample& sample);

// Sums two samples of the same backend into one over `n_instances`.
CostSample combine(const std::string& stage, Phase phase, std::size_t n_instances,
                   const std::vector<CostSample>& parts);

// Reads cumulative package energy from the powercap sysfs tree.
class RaplReader {
 public:
  // Throws EnergyBackendError when no readable intel-rapl package exists.
  explicit RaplReader(std::filesystem::path root);

  struct Domain {
    std::filesystem::path energy_file;
    std::uint64_t max_range_uj = 0;
  };

  std::vector<std::uint64_t> read() const;
  // Joules between two readings, correcting counters that wrapped once.
  double joules_between(const std::vector<std::uint64_t>& before,
                        const std::vector<std::uint64_t>& after) const;
  const std::vector<Domain>& domains() const noexcept { return domains_; }

 private:
  std::vector<Domain> domains_;
};

// One measurement session at a time; nested calls throw. Not shareable across
// threads, though the measured work may itself run in parallel.
class EnergyMeter {
 public:
  explicit EnergyMeter(EnergyConfig config);

  const EnergyConfig& config() const noexcept { return config_; }

  // Times `work` on a monotonic clock and attributes energy per backend. The
  // manual backend rejects this overload; use measure_reported.
  CostSample measure(const std::string& stage, Phase phase, std::size_t n_instances,
                     const std::function<void()>& work);

  // Manual backend: `work` returns the joules it consumed.
  CostSample measure_reported(const std::string& stage, Phase phase, std::size_t n_instances,
                              const std::function<double()>& work);

 private:
  class Session;

  EnergyConfig config_;
  std::unique_ptr<RaplReader> rapl_;
  std::atomic<bool> active_{false};
};

// Runs in-process `work` under the meter, whatever the backend. The manual
// backend has no counter of its own, so it is handed `reported_joules`.
// Zero instances count as one.
CostSample measure_stage(EnergyMeter& meter, const std::string& stage, Phase phase, std::size_t n_instances,
                         const std::function<void()>& work, double reported_joules = 0.0);

// stage,phase,backend,duration_s,energy_J,n,time_per_instance_s,energy_per_instance_kWh
void write_cost_csv(const std::vector<CostSample>& samples, const std::filesystem::path& path);
std::string cost_csv_header();
std::string cost_csv_row(const CostSample& sample);

}  // namespace ecotext
