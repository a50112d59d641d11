#include "aeroloop/monitor.hpp"

#include "aeroloop/fft.hpp"
#include "aeroloop/textfmt.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace aeroloop {

char axis_label(Axis axis) {
    switch (axis) {
        case Axis::X: return 'x';
        case Axis::Y: return 'y';
        case Axis::Z: return 'z';
    }
    return '?';
}

FailureReport check_failures(const VehicleState& state, const ReferencePoint& ref,
                             const Thresholds& thresholds, std::string_view extra) {
    const Vec3 e = state.position_w - ref.position_ref;

    FailureReport report;
    std::string info;
    auto trigger = [&](FailureCode code, char axis, double value) {
        report.codes.push_back(code);
        info += axis;
        info += " error is " + fixed(value, 2) + ", ";
    };

    // info order is z, y, x; codes are sorted ascending afterwards
    if (e.z() > thresholds.z) trigger(FailureCode::FlyingTooHigh, 'z', e.z());
    else if (e.z() < -thresholds.z) trigger(FailureCode::FlyingTooLow, 'z', e.z());
    if (e.y() > thresholds.y) trigger(FailureCode::PosErrorPositiveY, 'y', e.y());
    else if (e.y() < -thresholds.y) trigger(FailureCode::PosErrorNegativeY, 'y', e.y());
    if (e.x() > thresholds.x) trigger(FailureCode::PosErrorPositiveX, 'x', e.x());
    else if (e.x() < -thresholds.x) trigger(FailureCode::PosErrorNegativeX, 'x', e.x());

    std::sort(report.codes.begin(), report.codes.end());
    if (report.codes.empty()) report.codes.push_back(FailureCode::NoIssue);

    info += extra;
    report.info = std::move(info);
    return report;
}

namespace {

struct Peak {
    double frequency = 0.0;
    double amplitude = 0.0;
};

// Single-axis spectral peak within [band.f_min, band.f_max].
std::optional<Peak> axis_peak(std::span<const Vec3> buffer, int axis,
                              double sample_dt, SpectralBand band) {
    const std::size_t n = buffer.size();

    double mean = 0.0;
    for (const Vec3& v : buffer) mean += v[axis];
    mean /= static_cast<double>(n);

    // periodic Hann window; coherent gain is exactly 1/2
    std::vector<std::complex<double>> spectrum(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / n));
        spectrum[i] = w * (buffer[i][axis] - mean);
    }
    fft_radix2(spectrum);

    const double bin_hz = 1.0 / (sample_dt * static_cast<double>(n));
    auto amplitude_of = [&](std::size_t k) {
        // single-sided tone amplitude: 2 |X_k| / (N * window gain)
        return 4.0 * std::abs(spectrum[k]) / static_cast<double>(n);
    };

    const std::size_t k_lo = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(band.f_min / bin_hz)));
    const std::size_t k_hi = std::min<std::size_t>(n / 2 - 1, static_cast<std::size_t>(std::floor(band.f_max / bin_hz)));
    if (k_lo > k_hi) return std::nullopt;

    std::size_t k_peak = k_lo;
    double peak_amp = amplitude_of(k_lo);
    for (std::size_t k = k_lo + 1; k <= k_hi; ++k) {
        const double a = amplitude_of(k);
        if (a > peak_amp) {
            peak_amp = a;
            k_peak = k;
        }
    }
    if (!(peak_amp > 0.0)) return std::nullopt;

    // log-parabolic refinement over the peak and its neighbours; the
    // Hann mainlobe is close to a parabola in dB, which recovers most of
    // the off-bin scalloping loss in both frequency and amplitude.
    Peak peak{k_peak * bin_hz, peak_amp};
    const double alpha = amplitude_of(k_peak - 1);
    const double gamma = amplitude_of(k_peak + 1);
    if (alpha > 0.0 && gamma > 0.0) {
        const double la = std::log(alpha);
        const double lb = std::log(peak_amp);
        const double lg = std::log(gamma);
        const double denom = la - 2.0 * lb + lg;
        if (denom < 0.0) {
            double delta = 0.5 * (la - lg) / denom;
            delta = std::clamp(delta, -0.5, 0.5);
            peak.frequency = (static_cast<double>(k_peak) + delta) * bin_hz;
            peak.amplitude = std::exp(lb - 0.25 * (la - lg) * delta);
        }
    }
    return peak;
}

} // namespace

std::optional<OscillationReport> detect_oscillation(std::span<const Vec3> buffer,
                                                    double sample_dt, SpectralBand band,
                                                    double amp_threshold) {
    if (!(sample_dt > 0.0)) throw std::invalid_argument("detect_oscillation: sample_dt must be > 0");
    if (!(band.f_min > 0.0 && band.f_min < band.f_max))
        throw std::invalid_argument("detect_oscillation: bad band");
    const std::size_t n = buffer.size();
    if (n < 16 || !is_power_of_two(n)) return std::nullopt; // not enough data yet

    std::optional<OscillationReport> best;
    for (int axis = 0; axis < 3; ++axis) {
        const auto peak = axis_peak(buffer, axis, sample_dt, band);
        if (!peak || !(peak->amplitude > amp_threshold)) continue;
        if (!best || peak->amplitude > best->amplitude)
            best = OscillationReport{static_cast<Axis>(axis), peak->frequency, peak->amplitude};
    }
    return best;
}

SampleBuffer::SampleBuffer(std::size_t capacity)
    : data_(capacity), capacity_(capacity) {
    if (!is_power_of_two(capacity))
        throw std::invalid_argument("SampleBuffer: capacity must be a power of two");
}

void SampleBuffer::push(const Vec3& sample) {
    data_[head_] = sample;
    head_ = (head_ + 1) % capacity_;
    if (size_ < capacity_) ++size_;
}

std::vector<Vec3> SampleBuffer::snapshot() const {
    std::vector<Vec3> out;
    out.reserve(size_);
    const std::size_t start = (head_ + capacity_ - size_) % capacity_;
    for (std::size_t i = 0; i < size_; ++i)
        out.push_back(data_[(start + i) % capacity_]);
    return out;
}

} // namespace aeroloop
