#pragma once

#include "aeroloop/dynamics.hpp"
#include "aeroloop/mission.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aeroloop {

/// Numeric failure codes fed to the decision policy. The values are part
/// of the prompt wire format and must not change. 1 and 2 are reserved
/// but undefined, and are never emitted.
enum class FailureCode : int {
    NoIssue = 0,
    FlyingTooHigh = 3,
    FlyingTooLow = 4,
    PosErrorPositiveY = 5,
    PosErrorNegativeY = 6,
    PosErrorPositiveX = 7,
    PosErrorNegativeX = 8,
};

struct FailureReport {
    std::vector<FailureCode> codes; // ascending; exactly [0] when clean
    std::string info;
};

/// Per-axis tracking-error thresholds in meters.
struct Thresholds {
    double x = 0.10;
    double y = 0.10;
    double z = 0.10;
};

enum class Axis { X = 0, Y = 1, Z = 2 };

char axis_label(Axis axis);

struct OscillationReport {
    Axis axis = Axis::Y;
    double frequency = 0.0; // Hz
    double amplitude = 0.0; // m
};

struct SpectralBand {
    double f_min = 0.2; // Hz
    double f_max = 2.0; // Hz
};

/// Compares the tracking error p - p_ref against the thresholds and
/// produces codes (ascending) plus the info string "{axis} error is
/// {e:.2f}, " per triggered axis in z, y, x order, followed by `extra`.
FailureReport check_failures(const VehicleState& state, const ReferencePoint& ref,
                             const Thresholds& thresholds, std::string_view extra = {});

/// Spectral peak scan over a buffer of position samples (typically the
/// tracking residual). Per axis: mean removal, Hann window, radix-2 FFT,
/// peak pick within the band, log-parabolic refinement of the peak
/// frequency and amplitude. Returns the strongest axis whose amplitude
/// exceeds amp_threshold, or nothing. Buffers that are too short (or not
/// yet filled to a power-of-two length) yield no report.
std::optional<OscillationReport> detect_oscillation(std::span<const Vec3> buffer,
                                                    double sample_dt, SpectralBand band,
                                                    double amp_threshold);

/// Fixed-capacity ring of position samples, oldest-first snapshots.
/// Written by the control loop, snapshotted at decision time.
class SampleBuffer {
public:
    explicit SampleBuffer(std::size_t capacity);

    void push(const Vec3& sample);
    bool full() const { return size_ == capacity_; }
    std::size_t size() const { return size_; }
    std::vector<Vec3> snapshot() const;

private:
    std::vector<Vec3> data_;
    std::size_t capacity_;
    std::size_t head_ = 0;
    std::size_t size_ = 0;
};

} // namespace aeroloop
