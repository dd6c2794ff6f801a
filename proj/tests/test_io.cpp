#include "hinav/csv_io.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "hinav/config.hpp"
#include "hinav/so3.hpp"

using namespace hinav;
namespace fs = std::filesystem;

namespace {

std::mt19937 rng(55);

class TempDir : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("hinav_io_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& f) const { return (dir_ / f).string(); }
  fs::path dir_;
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
}

SimData small_sim(bool noisy = true) {
  SimConfig cfg;
  cfg.duration = 1.0;
  if (noisy) {
    NoiseSpec ns;
    ns.cov_omega = 1e-4 * Mat3::Identity();
    ns.cov_accel = 1e-2 * Mat3::Identity();
    ns.cov_landmark = 1e-2 * Mat3::Identity();
    ns.seed = 5;
    cfg.noise = ns;
  }
  const LandmarkSet lm =
      generate_landmarks(25, Vec3(-10, -10, 0), Vec3(10, 10, 0), 8);
  return simulate(cfg, lm);
}

} // namespace

using IoTest = TempDir;

TEST(FormatDouble, BitExactRoundTrip) {
  std::uniform_real_distribution<double> d(-1e6, 1e6);
  std::vector<double> xs = {0.0, 0.1, 1.0 / 3.0, -9.81, M_PI, 1e-17, 6.02e23};
  for (int k = 0; k < 1000; ++k) xs.push_back(d(rng));
  for (double x : xs) {
    const double back = std::strtod(format_double(x).c_str(), nullptr);
    EXPECT_EQ(back, x);
  }
}

TEST(Quaternion, RoundTripAndCanonicalSign) {
  for (int k = 0; k < 100; ++k) {
    std::uniform_real_distribution<double> d(-M_PI, M_PI);
    const Mat3 R = so3::exp(Vec3(d(rng), d(rng), d(rng)));
    const Eigen::Vector4d q = quat_from_rotation(R);
    EXPECT_GE(q(0), 0.0);
    EXPECT_NEAR(q.norm(), 1.0, 1e-12);
    EXPECT_LT((rotation_from_quat(q) - R).norm(), 1e-12);
  }
}

TEST_F(IoTest, ImuRoundTripIsBitExact) {
  const SimData data = small_sim();
  write_imu_csv(path("imu.csv"), data.imu);
  const auto back = read_imu_csv(path("imu.csv"));
  ASSERT_EQ(back.size(), data.imu.size());
  for (std::size_t k = 0; k < back.size(); ++k) {
    EXPECT_EQ(back[k].t, data.imu[k].t);
    EXPECT_EQ(back[k].omega, data.imu[k].omega);
    EXPECT_EQ(back[k].accel, data.imu[k].accel);
  }
}

TEST_F(IoTest, LandmarkAndMeasRoundTrip) {
  const SimData data = small_sim();
  write_landmarks_csv(path("landmarks.csv"), data.landmarks);
  write_meas_csv(path("meas.csv"), data);
  const LandmarkSet lm = read_landmarks_csv(path("landmarks.csv"));
  ASSERT_EQ(lm.size(), data.landmarks.size());
  for (std::size_t i = 0; i < lm.size(); ++i) {
    EXPECT_EQ(lm.positions[i], data.landmarks.positions[i]);
  }
  const auto meas = read_meas_csv(path("meas.csv"));
  EXPECT_EQ(meas.size(), data.measurement_count());
  std::size_t idx = 0;
  for (std::size_t k = 0; k < data.meas.size(); ++k) {
    if (!data.meas[k]) continue;
    ASSERT_LT(idx, meas.size());
    EXPECT_EQ(meas[idx].t, data.meas[k]->t);
    ASSERT_EQ(meas[idx].values.size(), data.meas[k]->values.size());
    for (std::size_t i = 0; i < meas[idx].values.size(); ++i) {
      EXPECT_EQ(meas[idx].values[i].second, data.meas[k]->values[i].second);
    }
    ++idx;
  }
}

TEST_F(IoTest, GtRoundTripPreservesPose) {
  const SimData data = small_sim(false);
  write_gt_csv(path("gt.csv"), data.truth);
  const auto back = read_gt_csv(path("gt.csv"));
  ASSERT_EQ(back.size(), data.truth.size());
  for (std::size_t k = 0; k < back.size(); k += 37) {
    EXPECT_EQ(back[k].p, data.truth[k].p);   // exact
    EXPECT_EQ(back[k].v, data.truth[k].v);   // exact
    EXPECT_LT((back[k].R - data.truth[k].R).norm(), 1e-12); // via quaternion
  }
}

TEST_F(IoTest, WeightsRenormalizedOnLoad) {
  write_text(path("lm.csv"),
             "id,px,py,pz,weight\n"
             "0,1,0,0,2\n"
             "1,0,1,0,2\n"
             "2,0,0,1,2\n");
  const LandmarkSet lm = read_landmarks_csv(path("lm.csv"));
  for (double w : lm.weights) EXPECT_NEAR(w, 1.0 / 3.0, 1e-15);
}

TEST_F(IoTest, MalformedInputsRaise) {
  write_text(path("imu.csv"), "t,wx,wy,wz,ax,ay,az\n0,0,0,0,0,0,oops\n");
  EXPECT_THROW(read_imu_csv(path("imu.csv")), MalformedRow);

  write_text(path("imu2.csv"),
             "t,wx,wy,wz,ax,ay,az\n0,0,0,0,0,0,0\n0,0,0,0,0,0,0\n");
  EXPECT_THROW(read_imu_csv(path("imu2.csv")), NonMonotoneTime);

  write_text(path("imu3.csv"), "wrong,header\n");
  EXPECT_THROW(read_imu_csv(path("imu3.csv")), MalformedRow);

  write_text(path("imu4.csv"), "t,wx,wy,wz,ax,ay,az\n0,1,2\n");
  EXPECT_THROW(read_imu_csv(path("imu4.csv")), MalformedRow);

  EXPECT_THROW(read_imu_csv(path("missing.csv")), IoError);

  // row numbers are reported
  try {
    write_text(path("imu5.csv"),
               "t,wx,wy,wz,ax,ay,az\n0,0,0,0,0,0,0\nbad,0,0,0,0,0,0\n");
    read_imu_csv(path("imu5.csv"));
    FAIL() << "expected MalformedRow";
  } catch (const MalformedRow& e) {
    EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos);
  }
}

TEST_F(IoTest, ReplayAssemblyChecks) {
  const SimData data = small_sim();
  write_imu_csv(path("imu.csv"), data.imu);
  write_landmarks_csv(path("landmarks.csv"), data.landmarks);
  write_meas_csv(path("meas.csv"), data);

  auto imu = read_imu_csv(path("imu.csv"));
  auto lm = read_landmarks_csv(path("landmarks.csv"));
  auto meas = read_meas_csv(path("meas.csv"));

  const SimData rebuilt = assemble_replay(imu, meas, lm, {}, data.gravity);
  EXPECT_EQ(rebuilt.measurement_count(), data.measurement_count());
  EXPECT_TRUE(rebuilt.truth.empty());

  // unknown landmark id
  auto bad = meas;
  bad[0].values[0].first = 999;
  EXPECT_THROW(assemble_replay(imu, bad, lm, {}, data.gravity),
               UnknownLandmarkId);

  // off-grid timestamp
  auto off = meas;
  off[0].t += 1e-4;
  EXPECT_THROW(assemble_replay(imu, off, lm, {}, data.gravity), MalformedRow);
}

TEST_F(IoTest, SimulateReplayEstimatesAreBitExact) {
  const SimData data = small_sim();
  ObserverConfig cfg;
  cfg.variant = Variant::FixedKnownG;
  const ObserverState init =
      default_init(cfg, so3::angle_axis(0.1 * M_PI, Vec3(1, 1, 1).normalized()));
  const RunResult direct = run(data, cfg, init);

  write_imu_csv(path("imu.csv"), data.imu);
  write_landmarks_csv(path("landmarks.csv"), data.landmarks);
  write_meas_csv(path("meas.csv"), data);
  const SimData rebuilt =
      assemble_replay(read_imu_csv(path("imu.csv")),
                      read_meas_csv(path("meas.csv")),
                      read_landmarks_csv(path("landmarks.csv")), {},
                      data.gravity);
  const RunResult replayed = run(rebuilt, cfg, init);

  ASSERT_EQ(direct.steps.size(), replayed.steps.size());
  for (std::size_t k = 0; k < direct.steps.size(); ++k) {
    EXPECT_EQ(direct.steps[k].p_hat, replayed.steps[k].p_hat);
    EXPECT_EQ(direct.steps[k].v_hat, replayed.steps[k].v_hat);
    EXPECT_EQ(direct.steps[k].R_hat, replayed.steps[k].R_hat);
    EXPECT_EQ(direct.steps[k].eta, replayed.steps[k].eta);
  }
}

TEST(Config, ParseAndDefaults) {
  const ConfigMap m = ConfigMap::parse_string(
      "# comment\n"
      "[run]\n"
      "variant = var_est_g\n"
      "duration = 12.5\n"
      "[gains]\n"
      "k_R = 2.0  # trailing comment\n"
      "[world]\n"
      "gravity = 0 0 -9.8\n");
  const RunConfig cfg = RunConfig::from_map(m);
  EXPECT_EQ(cfg.variant, Variant::VarEstG);
  EXPECT_DOUBLE_EQ(cfg.duration, 12.5);
  EXPECT_DOUBLE_EQ(cfg.k_R, 2.0);
  EXPECT_DOUBLE_EQ(cfg.k_p, 0.5); // default
  EXPECT_EQ(cfg.gravity, Vec3(0, 0, -9.8));
}

TEST(Config, Errors) {
  EXPECT_THROW(ConfigMap::parse_string("[run]\nnonsense line\n"), ConfigError);
  EXPECT_THROW(ConfigMap::parse_string("[run]\nx = 1\nx = 2\n"), ConfigError);
  EXPECT_THROW(ConfigMap::parse_string("[run\n"), ConfigError);
  EXPECT_THROW(
      RunConfig::from_map(ConfigMap::parse_string("[run]\nvariant = bogus\n")),
      ConfigError);
  EXPECT_THROW(
      RunConfig::from_map(ConfigMap::parse_string("[run]\ndt = -1\n")),
      ConfigError);
  EXPECT_THROW(RunConfig::from_map(
                   ConfigMap::parse_string("[world]\ngravity = 1 2\n")),
               ConfigError);
  // error message carries the line number
  try {
    ConfigMap::parse_string("[run]\n\nbroken\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos);
  }
}

TEST(Config, ResolvedEchoRoundTrips) {
  RunConfig cfg;
  cfg.variant = Variant::VarKnownG;
  cfg.duration = 42.0;
  cfg.seed = 1234;
  cfg.noise_enabled = true;
  cfg.tau0 = 0.05;
  const std::string echo = cfg.resolved_text();
  const RunConfig back =
      RunConfig::from_map(ConfigMap::parse_string(echo, "<echo>"));
  EXPECT_EQ(back.resolved_text(), echo);
  EXPECT_EQ(back.variant, cfg.variant);
  EXPECT_EQ(back.seed, cfg.seed);
  EXPECT_EQ(back.duration, cfg.duration);
  ASSERT_TRUE(back.tau0.has_value());
  EXPECT_EQ(*back.tau0, *cfg.tau0);
}
