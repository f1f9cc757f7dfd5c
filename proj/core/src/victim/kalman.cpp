#include "rtia/victim/kalman.hpp"

#include <Eigen/Dense>
#include <cstdio>

namespace rtia::victim {

namespace {

using Mat8 = Eigen::Matrix<double, 8, 8>;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat48 = Eigen::Matrix<double, 4, 8>;
using Mat4 = Eigen::Matrix<double, 4, 4>;
using Vec4 = Eigen::Matrix<double, 4, 1>;

Mat8 transition(double dt) {
  Mat8 f = Mat8::Identity();
  for (int i = 0; i < 4; ++i) f(i, i + 4) = dt;
  return f;
}

Mat48 measurement_matrix() {
  Mat48 h = Mat48::Zero();
  for (int i = 0; i < 4; ++i) h(i, i) = 1.0;
  return h;
}

}  // namespace

KfStep kf_track(std::optional<TrackState> track, const std::optional<BBox>& box, double dt,
                const KfConfig& cfg) {
  KfStep out;
  if (!track && !box) return out;

  if (!track) {
    TrackState t;
    t.mean = {box->cx, box->cy, box->w, box->h, 0, 0, 0, 0};
    Eigen::Map<Mat8> p(t.cov.data());
    p.setZero();
    for (int i = 0; i < 4; ++i) p(i, i) = cfg.init_pos_var;
    for (int i = 4; i < 8; ++i) p(i, i) = cfg.init_vel_var;
    t.age = 1;
    t.class_id = box->class_id;
    out.track = t;
    out.box = t.box(box->conf);
    return out;
  }

  TrackState t = *track;
  Eigen::Map<Vec8> x(t.mean.data());
  Eigen::Map<Mat8> p(t.cov.data());

  const Mat8 f = transition(dt);
  x = (f * x).eval();
  p = (f * p * f.transpose()).eval();
  p += cfg.process_noise * Mat8::Identity();

  if (box) {
    const Mat48 h = measurement_matrix();
    Vec4 z;
    z << box->cx, box->cy, box->w, box->h;
    const Vec4 innov = z - h * x;
    const Mat4 s = h * p * h.transpose() + cfg.measurement_noise * Mat4::Identity();
    const Eigen::Matrix<double, 8, 4> k = p * h.transpose() * s.inverse();
    x += k * innov;
    p = ((Mat8::Identity() - k * h) * p).eval();
    t.misses = 0;
    t.class_id = box->class_id;
  } else {
    ++t.misses;
  }
  ++t.age;

  // keep the covariance symmetric; floor eigenvalues if definiteness is lost
  p = (0.5 * (p + p.transpose())).eval();
  Eigen::LLT<Mat8> llt(p);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Mat8> eig(p);
    Vec8 d = eig.eigenvalues().cwiseMax(1e-9);
    p = eig.eigenvectors() * d.asDiagonal() * eig.eigenvectors().transpose();
    out.floored_covariance = true;
    std::fprintf(stderr, "kf_track: covariance lost positive definiteness; eigenvalues floored\n");
  }

  out.track = t;
  out.box = t.box(box ? box->conf : 1.0);
  return out;
}

}  // namespace rtia::victim
