#include <chrono>
#include <cmath>
#include <thread>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <gtest/gtest.h>

#include "ecotext/energymeter.hpp"
#include "ecotext/error.hpp"
#include "test_support.hpp"

using namespace ecotext;
using ecotext::testing::TempDir;
using ecotext::testing::write_file;

namespace {

EnergyConfig power_model(double watts) {
  EnergyConfig c;
  c.backend = EnergyBackend::power_model;
  c.watts = watts;
  return c;
}

void sleep_for(double seconds) {
  std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
}

}  // namespace

TEST(EnergyMeter, PowerModelIsWattsTimesSeconds) {
  EnergyMeter meter(power_model(45.0));
  const auto s = meter.measure("work", Phase::train, 1, [] { sleep_for(2.0); });
  EXPECT_NEAR(s.duration_s, 2.0, 0.05);
  EXPECT_DOUBLE_EQ(s.energy_j, 45.0 * s.duration_s);
  EXPECT_NEAR(s.energy_j, 90.0, 45.0 * 0.05);
  EXPECT_EQ(s.backend, EnergyBackend::power_model);
}

TEST(EnergyMeter, DurationMatchesIndependentTimer) {
  EnergyMeter meter(power_model(10.0));
  for (double d : {0.05, 0.2}) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto s = meter.measure("sleep", Phase::predict, 3, [d] { sleep_for(d); });
    const double outer = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT_NEAR(s.duration_s, d, 0.05);
    EXPECT_LE(s.duration_s, outer);
  }
}

TEST(Normalize, HandExamples) {
  CostSample s;
  s.energy_j = 120.0;
  s.duration_s = 3.0;
  s.n_instances = 1000;
  const auto n = normalize(s);
  EXPECT_DOUBLE_EQ(n.energy_per_instance_j, 0.12);
  EXPECT_DOUBLE_EQ(n.time_per_instance_s, 0.003);
  EXPECT_DOUBLE_EQ(n.energy_per_instance_kwh, 0.12 / 3.6e6);

  s.n_instances = 1;
  EXPECT_DOUBLE_EQ(normalize(s).energy_per_instance_j, 120.0);
  EXPECT_DOUBLE_EQ(normalize(s).time_per_instance_s, 3.0);

  s.energy_j = 0.0;
  EXPECT_EQ(normalize(s).energy_per_instance_j, 0.0);

  s.n_instances = 0;
  EXPECT_THROW(normalize(s), ValidationError);
}

TEST(Normalize, MatchesArbitraryPrecisionDivision) {
  using big = boost::multiprecision::cpp_dec_float_50;
  for (double total : {1.0, 123.456789, 98765.4321, 3.3e-7, 4.2e5}) {
    CostSample s;
    s.energy_j = total;
    s.duration_s = total / 7.0;
    s.n_instances = 13387;
    const auto n = normalize(s);
    const big exact = big(total) / big(13387);
    const double rel = static_cast<double>(boost::multiprecision::abs((big(n.energy_per_instance_j) - exact) / exact));
    EXPECT_LE(rel, 1e-12) << total;
    const big exact_kwh = exact / big(3600000);
    const double rel_kwh =
        static_cast<double>(boost::multiprecision::abs((big(n.energy_per_instance_kwh) - exact_kwh) / exact_kwh));
    EXPECT_LE(rel_kwh, 1e-12) << total;
  }
}

TEST(EnergyMeter, NestedSessionsAreRejected) {
  EnergyMeter meter(power_model(45.0));
  EXPECT_THROW(meter.measure("outer", Phase::train, 1,
                             [&] { meter.measure("inner", Phase::train, 1, [] {}); }),
               EnergyBackendError);
  // The meter is usable again once the failed session has unwound.
  EXPECT_NO_THROW(meter.measure("after", Phase::train, 1, [] {}));
}

TEST(EnergyMeter, SequentialSessionsAreAdditive) {
  EnergyMeter meter(power_model(20.0));
  const auto t0 = std::chrono::steady_clock::now();
  const auto a = meter.measure("a", Phase::train, 1, [] { sleep_for(0.1); });
  const auto b = meter.measure("b", Phase::train, 1, [] { sleep_for(0.15); });
  const double outer = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto sum = combine("a+b", Phase::train, 1, {a, b});
  EXPECT_DOUBLE_EQ(sum.duration_s, a.duration_s + b.duration_s);
  EXPECT_DOUBLE_EQ(sum.energy_j, a.energy_j + b.energy_j);
  EXPECT_NEAR(sum.duration_s, outer, 0.05);
}

TEST(EnergyMeter, CombineRejectsMixedBackends) {
  CostSample a, b;
  b.backend = EnergyBackend::manual;
  EXPECT_THROW(combine("x", Phase::train, 1, {a, b}), ValidationError);
  EXPECT_THROW(combine("x", Phase::train, 1, {}), ValidationError);
}

TEST(EnergyMeter, RaplReadsPackageDomainsWithWraparound) {
  TempDir dir;
  const auto pkg0 = dir / "intel-rapl:0";
  const auto pkg1 = dir / "intel-rapl:1";
  const auto sub = dir / "intel-rapl:0:0";
  for (const auto& p : {pkg0, pkg1, sub}) std::filesystem::create_directories(p);
  write_file(pkg0 / "energy_uj", "1000000\n");
  write_file(pkg0 / "max_energy_range_uj", "10000000\n");
  write_file(pkg1 / "energy_uj", "9500000\n");
  write_file(pkg1 / "max_energy_range_uj", "10000000\n");
  write_file(sub / "energy_uj", "5\n");

  RaplReader reader(dir.path());
  ASSERT_EQ(reader.domains().size(), 2u);
  const auto before = reader.read();
  write_file(pkg0 / "energy_uj", "3000000\n");  // +2 J
  write_file(pkg1 / "energy_uj", "500000\n");   // wraps: +1 J
  const auto after = reader.read();
  EXPECT_NEAR(reader.joules_between(before, after), 3.0, 1e-12);

  EnergyConfig c;
  c.backend = EnergyBackend::rapl;
  c.rapl_root = dir.path();
  EnergyMeter meter(c);
  const auto s = meter.measure("rapl", Phase::train, 1, [&] {
    write_file(pkg0 / "energy_uj", "4000000\n");
    write_file(pkg1 / "energy_uj", "500000\n");
  });
  EXPECT_NEAR(s.energy_j, 1.0, 1e-12);
  EXPECT_EQ(s.backend, EnergyBackend::rapl);
}

TEST(EnergyMeter, MissingRaplIsABackendError) {
  TempDir dir;
  EnergyConfig c;
  c.backend = EnergyBackend::rapl;
  c.rapl_root = dir / "nope";
  EXPECT_THROW(EnergyMeter{c}, EnergyBackendError);
  c.rapl_root = dir.path();
  EXPECT_THROW(EnergyMeter{c}, EnergyBackendError);
}

TEST(EnergyMeter, ManualBackendUsesReportedJoules) {
  EnergyConfig c;
  c.backend = EnergyBackend::manual;
  EnergyMeter meter(c);
  EXPECT_THROW(meter.measure("x", Phase::train, 1, [] {}), EnergyBackendError);
  const auto s = meter.measure_reported("ext", Phase::predict, 10, [] { return 12.5; });
  EXPECT_EQ(s.energy_j, 12.5);
  EXPECT_EQ(s.backend, EnergyBackend::manual);
  EXPECT_THROW(meter.measure_reported("bad", Phase::train, 1, [] { return -1.0; }), ValidationError);
}

TEST(EnergyMeter, BackendNamesAndCsv) {
  EXPECT_EQ(to_string(EnergyBackend::power_model), "power-model");
  EXPECT_EQ(parse_energy_backend("rapl"), EnergyBackend::rapl);
  EXPECT_THROW(parse_energy_backend("wattmeter"), ValidationError);
  EXPECT_THROW(EnergyMeter{power_model(0.0)}, ValidationError);

  TempDir dir;
  CostSample s;
  s.stage = "simon";
  s.duration_s = 0.5;
  s.energy_j = 22.5;
  s.n_instances = 5;
  write_cost_csv({s}, dir / "c.csv");
  EXPECT_EQ(ecotext::testing::read_file(dir / "c.csv"),
            cost_csv_header() + "\nsimon,train,power-model,0.5,22.5,5,0.1,1.25e-06\n");
}
