#pragma once

#include <string>
#include <vector>

#include "hinav/metrics.hpp"
#include "hinav/observer.hpp"
#include "hinav/world.hpp"

namespace hinav {

/// Round-trip-exact decimal rendering of a double (17 significant digits).
std::string format_double(double x);

/// Scalar-first unit quaternion (w, x, y, z) with w >= 0, normalized.
Eigen::Vector4d quat_from_rotation(const Mat3& R);
Mat3 rotation_from_quat(const Eigen::Vector4d& q);

// CSV schemas (headers mandatory, '.' decimal, time in seconds):
//   imu.csv       t,wx,wy,wz,ax,ay,az
//   landmarks.csv id,px,py,pz,weight
//   meas.csv      t,id,yx,yy,yz            (one row per event and landmark)
//   gt.csv        t,qw,qx,qy,qz,px,py,pz,vx,vy,vz
//   est.csv       gt schema + ex,ey,ez (eta) [+ gx,gy,gz when estimated]
//   errors.csv    t,rot_err,pos_err,vel_err,grav_err,event
//   diag.csv      t,p_eig_min,p_eig_max,gain_norm

void write_imu_csv(const std::string& path, const std::vector<ImuSample>& imu);
void write_landmarks_csv(const std::string& path, const LandmarkSet& lm);
void write_meas_csv(const std::string& path, const SimData& data);
void write_gt_csv(const std::string& path, const std::vector<TrueState>& gt);
void write_est_csv(const std::string& path, const RunResult& result,
                   bool with_gravity);
void write_errors_csv(const std::string& path, const ErrorTrace& trace);
void write_diag_csv(const std::string& path, const RunResult& result);

std::vector<ImuSample> read_imu_csv(const std::string& path);
LandmarkSet read_landmarks_csv(const std::string& path); // renormalizes weights
std::vector<LandmarkMeasurement> read_meas_csv(const std::string& path);
std::vector<TrueState> read_gt_csv(const std::string& path);

/// Assembles a replay dataset: measurement timestamps must land on the IMU
/// grid and landmark ids must exist. Throws NonMonotoneTime,
/// UnknownLandmarkId or MalformedRow with the offending row.
SimData assemble_replay(std::vector<ImuSample> imu,
                        const std::vector<LandmarkMeasurement>& meas,
                        LandmarkSet lm, std::vector<TrueState> gt,
                        const Vec3& gravity);

/// Per-step error trace extracted from a run (requires ground truth).
ErrorTrace error_trace(const RunResult& result);

} // namespace hinav
