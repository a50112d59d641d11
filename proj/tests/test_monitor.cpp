#include "aeroloop/monitor.hpp"

#include "aeroloop/fft.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

using namespace aeroloop;

namespace {

VehicleState state_with_error(const Vec3& error) {
    VehicleState state;
    state.position_w = error; // reference at the origin
    return state;
}

std::vector<Vec3> tone_buffer(int n, double sample_hz, double freq, double amp, int axis,
                              double phase = 0.0) {
    std::vector<Vec3> buffer(n, Vec3::Zero());
    for (int i = 0; i < n; ++i)
        buffer[i][axis] = amp * std::sin(2.0 * M_PI * freq * i / sample_hz + phase);
    return buffer;
}

// direct O(N^2) DFT amplitude at bin k of a mean-removed, Hann-windowed
// series: the oracle the fast path is checked against
double dft_bin_amplitude(const std::vector<double>& x, int k) {
    const int n = static_cast<int>(x.size());
    double mean = 0.0;
    for (const double v : x) mean += v;
    mean /= n;
    std::complex<double> acc(0.0, 0.0);
    for (int i = 0; i < n; ++i) {
        const double w = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / n));
        acc += w * (x[i] - mean) * std::exp(std::complex<double>(0.0, -2.0 * M_PI * k * i / n));
    }
    return 4.0 * std::abs(acc) / n;
}

} // namespace

TEST_CASE("check_failures reproduces the recorded report strings") {
    const Thresholds thr;
    const ReferencePoint origin;

    SUBCASE("low and negative-y") {
        const FailureReport report =
            check_failures(state_with_error({0.03, -0.44, -0.14}), origin, thr);
        CHECK(report.codes == std::vector<FailureCode>{FailureCode::FlyingTooLow,
                                                       FailureCode::PosErrorNegativeY});
        CHECK(report.info == "z error is -0.14, y error is -0.44, ");
    }
    SUBCASE("low with positive x and y") {
        const FailureReport report =
            check_failures(state_with_error({0.12, 0.15, -0.30}), origin, thr);
        CHECK(report.codes == std::vector<FailureCode>{FailureCode::FlyingTooLow,
                                                       FailureCode::PosErrorPositiveY,
                                                       FailureCode::PosErrorPositiveX});
        CHECK(report.info == "z error is -0.30, y error is 0.15, x error is 0.12, ");
    }
    SUBCASE("clean state reports [0] with empty info") {
        const FailureReport report = check_failures(state_with_error({0.0, 0.0, 0.0}), origin, thr);
        CHECK(report.codes == std::vector<FailureCode>{FailureCode::NoIssue});
        CHECK(report.info.empty());
    }
    SUBCASE("extra text is appended after the axis parts") {
        const FailureReport report =
            check_failures(state_with_error({-0.28, -0.65, 0.0}), origin, thr, "NOTE.");
        CHECK(report.codes == std::vector<FailureCode>{FailureCode::PosErrorNegativeY,
                                                       FailureCode::PosErrorNegativeX});
        CHECK(report.info == "y error is -0.65, x error is -0.28, NOTE.");
    }
}

TEST_CASE("code/string consistency and threshold monotonicity") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> err(-0.5, 0.5);
    const ReferencePoint origin;

    for (int trial = 0; trial < 200; ++trial) {
        const Vec3 e{err(rng), err(rng), err(rng)};
        const Thresholds thr{0.1, 0.1, 0.1};
        const FailureReport report = check_failures(state_with_error(e), origin, thr);

        // every code's axis appears in the info string and vice versa
        const bool has_x = report.info.find("x error") != std::string::npos;
        const bool has_y = report.info.find("y error") != std::string::npos;
        const bool has_z = report.info.find("z error") != std::string::npos;
        auto has_code = [&](FailureCode a, FailureCode b) {
            return std::find(report.codes.begin(), report.codes.end(), a) != report.codes.end() ||
                   std::find(report.codes.begin(), report.codes.end(), b) != report.codes.end();
        };
        CHECK(has_x == has_code(FailureCode::PosErrorPositiveX, FailureCode::PosErrorNegativeX));
        CHECK(has_y == has_code(FailureCode::PosErrorPositiveY, FailureCode::PosErrorNegativeY));
        CHECK(has_z == has_code(FailureCode::FlyingTooHigh, FailureCode::FlyingTooLow));
        CHECK(std::is_sorted(report.codes.begin(), report.codes.end()));

        // enlarging thresholds never adds codes
        const Thresholds wide{0.2, 0.2, 0.2};
        const FailureReport relaxed = check_failures(state_with_error(e), origin, wide);
        for (const FailureCode code : relaxed.codes) {
            if (code == FailureCode::NoIssue) continue;
            CHECK(std::find(report.codes.begin(), report.codes.end(), code) != report.codes.end());
        }
    }
}

TEST_CASE("fft satisfies Parseval's identity") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<std::complex<double>> data(256);
    double time_energy = 0.0;
    for (auto& v : data) {
        v = {gauss(rng), gauss(rng)};
        time_energy += std::norm(v);
    }
    auto spectrum = data;
    fft_radix2(spectrum);
    double freq_energy = 0.0;
    for (const auto& v : spectrum) freq_energy += std::norm(v);
    freq_energy /= data.size();
    CHECK(std::abs(freq_energy - time_energy) / time_energy < 1e-9);
}

TEST_CASE("fft rejects non-power-of-two sizes") {
    std::vector<std::complex<double>> data(100);
    CHECK_THROWS_AS(fft_radix2(data), std::invalid_argument);
}

TEST_CASE("single tones on bin centers recover amplitude within 5%") {
    const double sample_hz = 20.0;
    const int n = 256;
    const SpectralBand band{0.2, 2.0};
    for (const double amp : {0.01, 0.05, 0.2, 1.0}) {
        // bin 8 center: 8 * 20 / 256 = 0.625 Hz
        const auto buffer = tone_buffer(n, sample_hz, 0.625, amp, 1);
        const auto report = detect_oscillation(buffer, 1.0 / sample_hz, band, amp * 0.5);
        REQUIRE(report.has_value());
        CHECK(report->axis == Axis::Y);
        CHECK(report->amplitude >= 0.95 * amp);
        CHECK(report->amplitude <= 1.05 * amp);
        CHECK(std::abs(report->frequency - 0.625) < 0.01);
    }
}

TEST_CASE("the recorded 0.67 Hz / 0.19 m tone is measured to tolerance") {
    const auto buffer = tone_buffer(256, 20.0, 0.67, 0.19, 1, 0.3);
    const auto report = detect_oscillation(buffer, 0.05, {0.25, 2.0}, 0.1);
    REQUIRE(report.has_value());
    CHECK(report->axis == Axis::Y);
    CHECK(std::abs(report->frequency - 0.67) <= 0.1);
    CHECK(std::abs(report->amplitude - 0.19) <= 0.019);
}

TEST_CASE("constant buffers produce no report") {
    std::vector<Vec3> buffer(256, Vec3{0.3, -0.2, 1.0});
    CHECK(!detect_oscillation(buffer, 0.05, {0.2, 2.0}, 0.01).has_value());
}

TEST_CASE("short buffers produce no report") {
    std::vector<Vec3> buffer(8, Vec3::Zero());
    CHECK(!detect_oscillation(buffer, 0.05, {0.2, 2.0}, 0.1).has_value());
    buffer.resize(200); // not a power of two either
    CHECK(!detect_oscillation(buffer, 0.05, {0.2, 2.0}, 0.1).has_value());
}

TEST_CASE("two-tone input reports the stronger tone, against a direct DFT oracle") {
    const double sample_hz = 20.0;
    const int n = 256;
    std::vector<Vec3> buffer(n, Vec3::Zero());
    std::vector<double> series(n);
    for (int i = 0; i < n; ++i) {
        const double t = i / sample_hz;
        series[i] = 0.05 * std::sin(2.0 * M_PI * 0.5 * t) + 0.15 * std::sin(2.0 * M_PI * 1.0 * t);
        buffer[i][0] = series[i];
    }

    // oracle: scan band bins with the direct DFT and find the peak
    const double bin_hz = sample_hz / n;
    int best_k = 0;
    double best_amp = 0.0;
    for (int k = static_cast<int>(std::ceil(0.2 / bin_hz)); k <= static_cast<int>(2.0 / bin_hz); ++k) {
        const double amp = dft_bin_amplitude(series, k);
        if (amp > best_amp) {
            best_amp = amp;
            best_k = k;
        }
    }
    CHECK(std::abs(best_k * bin_hz - 1.0) < 2.0 * bin_hz); // oracle picks the 1 Hz tone

    const auto report = detect_oscillation(buffer, 1.0 / sample_hz, {0.2, 2.0}, 0.02);
    REQUIRE(report.has_value());
    CHECK(report->axis == Axis::X);
    CHECK(std::abs(report->frequency - 1.0) < 0.05);
    CHECK(std::abs(report->amplitude - 0.15) / 0.15 < 0.1);
}

TEST_CASE("sample buffer snapshots oldest-first once full") {
    SampleBuffer ring(16);
    CHECK(!ring.full());
    for (int i = 0; i < 40; ++i) ring.push(Vec3{static_cast<double>(i), 0.0, 0.0});
    CHECK(ring.full());
    const auto snap = ring.snapshot();
    REQUIRE(snap.size() == 16);
    CHECK(snap.front().x() == 24.0);
    CHECK(snap.back().x() == 39.0);
    CHECK_THROWS_AS(SampleBuffer(100), std::invalid_argument);
}
