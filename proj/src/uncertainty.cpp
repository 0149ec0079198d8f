#include "helios/uncertainty.hpp"

#include <algorithm>
#include <stdexcept>

namespace helios {

std::string to_string(UncertaintyMode mode) {
    switch (mode) {
        case UncertaintyMode::kUnperturbed: return "unp";
        case UncertaintyMode::kState: return "st";
        case UncertaintyMode::kObservation: return "obs";
        case UncertaintyMode::kControl: return "ctr";
        case UncertaintyMode::kSingleMte: return "mte1";
        case UncertaintyMode::kMultiMte: return "mte2";
    }
    throw std::logic_error("unknown uncertainty mode");
}

UncertaintyMode parse_mode(const std::string& label) {
    if (label == "unp") return UncertaintyMode::kUnperturbed;
    if (label == "st") return UncertaintyMode::kState;
    if (label == "obs") return UncertaintyMode::kObservation;
    if (label == "ctr") return UncertaintyMode::kControl;
    if (label == "mte1") return UncertaintyMode::kSingleMte;
    if (label == "mte2") return UncertaintyMode::kMultiMte;
    throw std::invalid_argument("unknown uncertainty mode '" + label +
                                "' (expected unp/st/obs/ctr/mte1/mte2)");
}

void UncertaintyConfig::validate() const {
    if (sigma_r_km < 0 || sigma_v_kms < 0 || sigma_phi_deg < 0 ||
        sigma_theta_deg < 0 || sigma_psi_deg < 0 || sigma_u < 0) {
        throw std::invalid_argument("UncertaintyConfig: sigmas must be non-negative");
    }
    if (!(p_mte >= 0.0 && p_mte < 1.0)) {
        throw std::invalid_argument("UncertaintyConfig: p_mte must lie in [0, 1)");
    }
    if (n_mte < 1) throw std::invalid_argument("UncertaintyConfig: n_mte must be >= 1");
}

StateNoise sample_state_noise(RngStream& stream, double sigma_r, double sigma_v) {
    StateNoise n;
    for (int i = 0; i < 3; ++i) n.dr[i] = sigma_r * stream.gaussian();
    for (int i = 0; i < 3; ++i) n.dv[i] = sigma_v * stream.gaussian();
    return n;
}

StateNoise sample_obs_noise(RngStream& stream, double sigma_r, double sigma_v) {
    return sample_state_noise(stream, sigma_r, sigma_v);
}

Eigen::Matrix3d small_angle_rotation(double dphi, double dtheta, double dpsi) {
    Eigen::Matrix3d a;
    a << 1.0, -dpsi, dtheta,
         dpsi, 1.0, -dphi,
         -dtheta, dphi, 1.0;
    return a;
}

Vec3 control_execution(const Vec3& commanded, RngStream& stream,
                       const ControlSigmas& sigmas) {
    const double dphi = sigmas.phi_rad * stream.gaussian();
    const double dtheta = sigmas.theta_rad * stream.gaussian();
    const double dpsi = sigmas.psi_rad * stream.gaussian();
    const double du = sigmas.magnitude * stream.gaussian();
    return (1.0 + du) * (small_angle_rotation(dphi, dtheta, dpsi) * commanded);
}

bool MteSchedule::blocks(int k) const {
    return std::find(blocked.begin(), blocked.end(), k) != blocked.end();
}

namespace {

void append_event(MteSchedule& s, RngStream& stream, int N, double p_mte,
                  int n_mte, int start) {
    int duration = 1;
    while (duration < n_mte && stream.uniform01() < p_mte) ++duration;
    if (s.start < 0) {
        s.start = start;
        s.duration = duration;
    }
    for (int k = start; k < std::min(start + duration, N); ++k) {
        s.blocked.push_back(k);
    }
}

}  // namespace

MteSchedule mte_schedule(RngStream& stream, int N, double p_mte, int n_mte,
                         bool force_one, bool recurrence) {
    MteSchedule s;
    if (!force_one && stream.uniform01() >= p_mte) return s;
    const int start = stream.uniform_int(N);
    append_event(s, stream, N, p_mte, n_mte, start);
    if (recurrence) {
        const int resume = s.blocked.empty() ? N : s.blocked.back() + 1;
        if (resume < N && stream.uniform01() < p_mte) {
            append_event(s, stream, N, p_mte, n_mte,
                         resume + stream.uniform_int(N - resume));
        }
    }
    return s;
}

}  // namespace helios
