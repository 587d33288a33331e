#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>

#include "crn/markov.hpp"

namespace crn::tracking {

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;
using Vec2d = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;

// State layout: [x, y, vx, vy, omega] (km, km/s, rad/s). The CV model pins
// omega at zero; the CT model propagates a coordinated turn and estimates
// the rate through the EKF linearization. Measurements are positions (nodes)
// or position+velocity pairs (fusion center).

struct KalmanState {
    Vec5 x = Vec5::Zero();
    Mat5 P = Mat5::Identity();
};

namespace detail {

// coordinated-turn propagation of [x y vx vy omega]
inline Vec5 ct_propagate(const Vec5& s, double dt) {
    const double w = s(4);
    Vec5 out = s;
    if (std::abs(w) < 1e-9) {
        out(0) += s(2) * dt;
        out(1) += s(3) * dt;
        return out;
    }
    const double sw = std::sin(w * dt), cw = std::cos(w * dt);
    out(0) = s(0) + (s(2) * sw - s(3) * (1.0 - cw)) / w;
    out(1) = s(1) + (s(2) * (1.0 - cw) + s(3) * sw) / w;
    out(2) = s(2) * cw - s(3) * sw;
    out(3) = s(2) * sw + s(3) * cw;
    return out;
}

inline Mat5 ct_jacobian(const Vec5& s, double dt) {
    const double w = s(4);
    Mat5 f = Mat5::Identity();
    if (std::abs(w) < 1e-9) {
        f(0, 2) = dt;
        f(1, 3) = dt;
        // d(position)/d(omega) in the w -> 0 limit
        f(0, 4) = -0.5 * s(3) * dt * dt;
        f(1, 4) = 0.5 * s(2) * dt * dt;
        f(2, 4) = -s(3) * dt;
        f(3, 4) = s(2) * dt;
        return f;
    }
    const double sw = std::sin(w * dt), cw = std::cos(w * dt);
    f(0, 2) = sw / w;
    f(0, 3) = -(1.0 - cw) / w;
    f(1, 2) = (1.0 - cw) / w;
    f(1, 3) = sw / w;
    f(2, 2) = cw;
    f(2, 3) = -sw;
    f(3, 2) = sw;
    f(3, 3) = cw;
    const double vx = s(2), vy = s(3);
    f(0, 4) = (vx * (w * dt * cw - sw) + vy * (w * dt * sw - (1.0 - cw))) / (w * w);
    f(1, 4) = (vx * ((1.0 - cw) - w * dt * sw) + vy * (w * dt * cw - sw)) / (w * w);
    f(2, 4) = -dt * (vx * sw + vy * cw);
    f(3, 4) = dt * (vx * cw - vy * sw);
    return f;
}

inline Mat5 process_noise(double dt, double sigma_a, double sigma_w) {
    const double qa = sigma_a * sigma_a;
    const double dt2 = dt * dt, dt3 = dt2 * dt, dt4 = dt3 * dt;
    Mat5 Q = Mat5::Zero();
    Q(0, 0) = Q(1, 1) = qa * dt4 / 4.0;
    Q(2, 2) = Q(3, 3) = qa * dt2;
    Q(0, 2) = Q(2, 0) = qa * dt3 / 2.0;
    Q(1, 3) = Q(3, 1) = qa * dt3 / 2.0;
    Q(4, 4) = sigma_w * sigma_w * dt2;
    return Q;
}

}  // namespace detail

struct ImmConfig {
    double dt = 1.0;
    double sigma_a_cv_kmps2 = 0.001;   // CV white-acceleration level (1 m/s^2)
    double sigma_a_ct_kmps2 = 0.003;   // CT acceleration level
    double sigma_omega_ct = 0.20;      // CT turn-rate random walk, rad/s per step
    double init_vel_var = 9e-4;        // (0.03 km/s)^2 speed prior
    double init_omega_var = 0.25;      // (0.5 rad/s)^2 turn-rate prior
};

// Two-model IMM: constant velocity and a coordinated turn whose rate lives
// in the state and is estimated by the EKF. The model-transition prior is
// supplied by the caller.
class ImmFilter {
public:
    ImmFilter() = default;

    ImmFilter(const ImmConfig& cfg, const Vec2d& z0, double meas_var) : cfg_(cfg) {
        for (auto& m : models_) {
            m.x << z0(0), z0(1), 0.0, 0.0, 0.0;
            m.P = Mat5::Zero();
            m.P(0, 0) = m.P(1, 1) = meas_var;
            m.P(2, 2) = m.P(3, 3) = cfg.init_vel_var;
            m.P(4, 4) = cfg.init_omega_var;
        }
        models_[0].P(4, 4) = 1e-6;  // CV model carries no turn rate
        mu_ = {0.5, 0.5};
    }

    // Velocity from the first two detections; rebuilds the velocity block
    // (cross terms included, or stale correlations break definiteness).
    void two_point_init(const Vec2d& z_prev, const Vec2d& z_now, double dt, double meas_var) {
        const Vec2d v = (z_now - z_prev) / dt;
        for (auto& m : models_) {
            m.x(2) = v(0);
            m.x(3) = v(1);
            const double vv = 2.0 * meas_var / (dt * dt);
            for (int i = 0; i < 5; ++i) {
                m.P(2, i) = m.P(i, 2) = 0.0;
                m.P(3, i) = m.P(i, 3) = 0.0;
            }
            m.P(2, 2) = m.P(3, 3) = vv;
        }
    }

    // Predict-only step (missed detection): no mixing, no probability update.
    void predict() {
        step_model_(models_[0], /*ct=*/false);
        step_model_(models_[1], /*ct=*/true);
    }

    // Full IMM cycle with a position measurement.
    void update(const Vec2d& z, double meas_var, const dynamics::TransitionMatrix& prior) {
        mix_(prior);
        predict();
        std::array<double, 2> lik{};
        for (int i = 0; i < 2; ++i) {
            Eigen::Matrix<double, 2, 5> H = Eigen::Matrix<double, 2, 5>::Zero();
            H(0, 0) = H(1, 1) = 1.0;
            const Mat2 R = Mat2::Identity() * meas_var;
            lik[i] = correct_(models_[i], H, R, Vec2d(z(0), z(1)));
        }
        reweigh_(lik);
    }

    // Full-state measurement (position plus a reported velocity estimate);
    // used by the fusion center, whose inputs are node state estimates.
    void update_with_velocity(const Vec4& z, double pos_var, double vel_var,
                              const dynamics::TransitionMatrix& prior) {
        mix_(prior);
        predict();
        std::array<double, 2> lik{};
        for (int i = 0; i < 2; ++i) {
            Eigen::Matrix<double, 4, 5> H = Eigen::Matrix<double, 4, 5>::Zero();
            H(0, 0) = H(1, 1) = H(2, 2) = H(3, 3) = 1.0;
            Eigen::Matrix4d R = Eigen::Matrix4d::Zero();
            R(0, 0) = R(1, 1) = pos_var;
            R(2, 2) = R(3, 3) = vel_var;
            lik[i] = correct_(models_[i], H, R, z);
        }
        reweigh_(lik);
    }

    // Covariance inflation after a missed detection; widens the association
    // gate so a maneuvering target is re-acquired instead of re-initiated.
    void inflate(double factor) {
        for (auto& m : models_) m.P *= factor;
    }

    // Adopt an externally supplied mode estimate (the fusion center trusts
    // the reporting node's motion-state call over its own sparse evidence).
    void set_model_probabilities(double mu_cv) {
        mu_[0] = mu_cv;
        mu_[1] = 1.0 - mu_cv;
    }

    Vec2d position() const {
        const Vec5 x = state();
        return {x(0), x(1)};
    }
    Vec2d velocity() const {
        const Vec5 x = state();
        return {x(2), x(3)};
    }

    Vec5 state() const {
        Vec5 x = Vec5::Zero();
        for (int i = 0; i < 2; ++i) x += mu_[i] * models_[i].x;
        return x;
    }

    Mat5 covariance() const {
        const Vec5 xc = state();
        Mat5 P = Mat5::Zero();
        for (int i = 0; i < 2; ++i) {
            const Vec5 d = models_[i].x - xc;
            P += mu_[i] * (models_[i].P + d * d.transpose());
        }
        return P;
    }

    dynamics::MotionModel estimated_model() const {
        return mu_[0] >= mu_[1] ? dynamics::MotionModel::ConstantVelocity
                                : dynamics::MotionModel::ConstantTurn;
    }

    const std::array<double, 2>& model_probabilities() const { return mu_; }
    double turn_rate_estimate() const { return models_[1].x(4); }

    Vec2d predicted_position() const {
        Vec2d p = Vec2d::Zero();
        const Vec5 x0 = models_[0].x + Vec5(models_[0].x(2), models_[0].x(3), 0, 0, 0) * cfg_.dt;
        const Vec5 x1 = detail::ct_propagate(models_[1].x, cfg_.dt);
        p(0) = mu_[0] * x0(0) + mu_[1] * x1(0);
        p(1) = mu_[0] * x0(1) + mu_[1] * x1(1);
        return p;
    }

    Mat2 predicted_position_cov() const {
        Mat2 S = Mat2::Zero();
        for (int i = 0; i < 2; ++i) {
            const Mat5 F = i == 0 ? cv_jac_() : detail::ct_jacobian(models_[1].x, cfg_.dt);
            const Mat5 Q = noise_(i == 1);
            const Mat5 P = F * models_[i].P * F.transpose() + Q;
            S(0, 0) += mu_[i] * P(0, 0);
            S(0, 1) += mu_[i] * P(0, 1);
            S(1, 0) += mu_[i] * P(1, 0);
            S(1, 1) += mu_[i] * P(1, 1);
        }
        return S;
    }

private:
    Mat5 cv_jac_() const {
        Mat5 f = Mat5::Identity();
        f(0, 2) = cfg_.dt;
        f(1, 3) = cfg_.dt;
        f(4, 4) = 0.0;  // CV pins omega at zero
        return f;
    }

    Mat5 noise_(bool ct) const {
        return ct ? detail::process_noise(cfg_.dt, cfg_.sigma_a_ct_kmps2, cfg_.sigma_omega_ct)
                  : detail::process_noise(cfg_.dt, cfg_.sigma_a_cv_kmps2, 1e-6);
    }

    void step_model_(KalmanState& m, bool ct) {
        const Mat5 F = ct ? detail::ct_jacobian(m.x, cfg_.dt) : cv_jac_();
        m.x = ct ? detail::ct_propagate(m.x, cfg_.dt)
                 : Vec5(m.x(0) + m.x(2) * cfg_.dt, m.x(1) + m.x(3) * cfg_.dt, m.x(2), m.x(3), 0.0);
        m.P = F * m.P * F.transpose() + noise_(ct);
    }

    template <int K>
    double correct_(KalmanState& m, const Eigen::Matrix<double, K, 5>& H,
                    const Eigen::Matrix<double, K, K>& R, const Eigen::Matrix<double, K, 1>& z) {
        const Eigen::Matrix<double, K, 1> innov = z - H * m.x;
        const Eigen::Matrix<double, K, K> S = H * m.P * H.transpose() + R;
        const Eigen::Matrix<double, K, K> Sinv = S.inverse();
        const Eigen::Matrix<double, 5, K> Kg = m.P * H.transpose() * Sinv;
        m.x += Kg * innov;
        const Mat5 ikh = Mat5::Identity() - Kg * H;
        m.P = ikh * m.P * ikh.transpose() + Kg * R * Kg.transpose();
        m.P = 0.5 * (m.P + m.P.transpose()).eval();
        const double md2 = innov.dot(Sinv * innov);
        const double norm = std::pow(2.0 * M_PI, K / 2.0) *
                            std::sqrt(std::max(S.determinant(), 1e-300));
        return std::exp(-0.5 * std::max(md2, 0.0)) / norm;
    }

    void reweigh_(const std::array<double, 2>& lik) {
        double norm = 0.0;
        for (int i = 0; i < 2; ++i) {
            mu_[i] = std::max(c_[i] * lik[i], 1e-300);
            norm += mu_[i];
        }
        for (auto& m : mu_) m /= norm;
    }

    // standard IMM interaction step
    void mix_(const dynamics::TransitionMatrix& prior) {
        std::array<Vec5, 2> x0;
        std::array<Mat5, 2> p0;
        for (int i = 0; i < 2; ++i) {
            c_[i] = prior(0, i) * mu_[0] + prior(1, i) * mu_[1];
            std::array<double, 2> w{};
            double wsum = 0.0;
            for (int j = 0; j < 2; ++j) {
                w[j] = prior(j, i) * mu_[j];
                wsum += w[j];
            }
            if (wsum <= 0.0) {
                w = {mu_[0], mu_[1]};
                wsum = mu_[0] + mu_[1];
            }
            for (auto& v : w) v /= wsum;
            if (c_[i] < 1e-300) c_[i] = 1e-300;

            Vec5 xm = Vec5::Zero();
            for (int j = 0; j < 2; ++j) xm += w[j] * models_[j].x;
            Mat5 pm = Mat5::Zero();
            for (int j = 0; j < 2; ++j) {
                const Vec5 d = models_[j].x - xm;
                pm += w[j] * (models_[j].P + d * d.transpose());
            }
            x0[i] = xm;
            p0[i] = pm;
        }
        for (int i = 0; i < 2; ++i) {
            models_[i].x = x0[i];
            models_[i].P = p0[i];
        }
        // the CV model never holds a turn rate
        models_[0].x(4) = 0.0;
    }

    ImmConfig cfg_;
    std::array<KalmanState, 2> models_;
    std::array<double, 2> mu_{0.5, 0.5};
    std::array<double, 2> c_{0.5, 0.5};
};

}  // namespace crn::tracking
