#include "monokin/filters.hpp"

#include <cmath>

#include "monokin/error.hpp"

namespace monokin {

namespace {

struct Biquad {
    double b0, b1, b2, a1, a2;
};

// 2nd-order Butterworth low-pass via bilinear transform with prewarping.
Biquad butterworth2(double cutoff_hz, double frame_rate) {
    const double wc = std::tan(M_PI * cutoff_hz / frame_rate);
    const double k1 = std::sqrt(2.0) * wc;
    const double k2 = wc * wc;
    const double norm = 1.0 / (1.0 + k1 + k2);
    Biquad q;
    q.b0 = k2 * norm;
    q.b1 = 2.0 * q.b0;
    q.b2 = q.b0;
    q.a1 = 2.0 * (k2 - 1.0) * norm;
    q.a2 = (1.0 - k1 + k2) * norm;
    return q;
}

// One pass with filter memory pre-charged to the first sample's steady
// state, so constants pass through untouched.
void run(const Biquad& q, std::vector<double>& x) {
    if (x.empty()) return;
    double xm1 = x[0], xm2 = x[0], ym1 = x[0], ym2 = x[0];
    for (double& s : x) {
        const double in = s;
        const double out = q.b0 * in + q.b1 * xm1 + q.b2 * xm2 - q.a1 * ym1 - q.a2 * ym2;
        xm2 = xm1;
        xm1 = in;
        ym2 = ym1;
        ym1 = out;
        s = out;
    }
}

}  // namespace

std::vector<double> lowpass(const std::vector<double>& signal, double cutoff_hz,
                            double frame_rate) {
    if (!(frame_rate > 0)) throw ValidationError("frame rate must be positive");
    if (!(cutoff_hz > 0) || cutoff_hz >= 0.5 * frame_rate)
        throw ValidationError("filter cutoff must lie in (0, frame_rate/2)");
    const Biquad q = butterworth2(cutoff_hz, frame_rate);
    std::vector<double> y = signal;
    run(q, y);
    std::reverse(y.begin(), y.end());
    run(q, y);
    std::reverse(y.begin(), y.end());
    return y;
}

std::vector<Eigen::VectorXd> lowpass_trajectory(
    const std::vector<Eigen::VectorXd>& trajectory, double cutoff_hz,
    double frame_rate) {
    if (trajectory.empty()) return {};
    const int dim = static_cast<int>(trajectory[0].size());
    std::vector<Eigen::VectorXd> out(trajectory.size(), Eigen::VectorXd(dim));
    std::vector<double> channel(trajectory.size());
    for (int d = 0; d < dim; ++d) {
        for (size_t f = 0; f < trajectory.size(); ++f) channel[f] = trajectory[f][d];
        const auto filtered = lowpass(channel, cutoff_hz, frame_rate);
        for (size_t f = 0; f < trajectory.size(); ++f) out[f][d] = filtered[f];
    }
    return out;
}

std::vector<std::vector<Eigen::Vector3d>> lowpass_points(
    const std::vector<std::vector<Eigen::Vector3d>>& frames, double cutoff_hz,
    double frame_rate) {
    if (frames.empty()) return {};
    const size_t pts = frames[0].size();
    std::vector<std::vector<Eigen::Vector3d>> out(
        frames.size(), std::vector<Eigen::Vector3d>(pts));
    std::vector<double> channel(frames.size());
    for (size_t p = 0; p < pts; ++p) {
        for (int axis = 0; axis < 3; ++axis) {
            for (size_t f = 0; f < frames.size(); ++f) channel[f] = frames[f][p][axis];
            const auto filtered = lowpass(channel, cutoff_hz, frame_rate);
            for (size_t f = 0; f < frames.size(); ++f) out[f][p][axis] = filtered[f];
        }
    }
    return out;
}

}  // namespace monokin
