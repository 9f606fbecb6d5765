#pragma once

#include <cmath>

#include "qws/errors.hpp"

namespace qws {

/// Physical parameters of the linearly dragged harmonic oscillator and its
/// two-stage drive.  The well minimum moves as x_c(t) = u * t.  The system is
/// prepared thermal at t = -pre_time, evolves to t = 0, and work is counted
/// over the second stage t in [0, duration].
struct DriveProtocol {
    double mass = 1.0;       ///< particle mass m
    double omega = 1.0;      ///< trap frequency
    double drag_speed = 1.0; ///< well-minimum velocity u
    double pre_time = 1.0;   ///< first-stage duration tau' (>= 0)
    double duration = 2.0;   ///< work-stage duration tau (> 0)
    double beta = 1.0;       ///< inverse temperature
    double hbar = 1.0;       ///< Planck constant

    void validate() const {
        if (!(mass > 0.0) || !std::isfinite(mass))
            throw DomainError("DriveProtocol: mass must be positive");
        if (!(omega > 0.0) || !std::isfinite(omega))
            throw DomainError("DriveProtocol: omega must be positive");
        if (!(beta > 0.0) || !std::isfinite(beta))
            throw DomainError("DriveProtocol: beta must be positive");
        if (!(hbar > 0.0) || !std::isfinite(hbar))
            throw DomainError("DriveProtocol: hbar must be positive");
        if (!(pre_time >= 0.0) || !std::isfinite(pre_time))
            throw DomainError("DriveProtocol: pre_time must be >= 0");
        if (!(duration > 0.0) || !std::isfinite(duration))
            throw DomainError("DriveProtocol: duration must be positive");
        if (!std::isfinite(drag_speed))
            throw DomainError("DriveProtocol: drag_speed must be finite");
    }

    /// Well-center position at time t.
    double center(double t) const { return drag_speed * t; }

    /// Level spacing hbar * omega of the static oscillator.
    double quantum() const { return hbar * omega; }

    /// Quantum partition function of the (undisplaced) oscillator,
    /// 1 / (2 sinh(beta hbar omega / 2)).
    double quantum_partition() const {
        return 1.0 / (2.0 * std::sinh(0.5 * beta * hbar * omega));
    }

    /// Classical partition function 2 pi / (beta omega).
    double classical_partition() const {
        return 2.0 * M_PI / (beta * omega);
    }

    /// Phase-space center of the state at the end of the first stage:
    /// x = -(u/omega) sin(omega tau'), p = m u (1 - cos(omega tau')).
    double coherent_center_x() const {
        return -(drag_speed / omega) * std::sin(omega * pre_time);
    }
    double coherent_center_p() const {
        return mass * drag_speed * (1.0 - std::cos(omega * pre_time));
    }
};

} // namespace qws
