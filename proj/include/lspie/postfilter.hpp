#pragma once

#include <vector>

namespace lspie {

enum class FilterMode { zero_phase, causal };

/// Lowpass Butterworth filter parameters. cutoff is a fraction of the
/// sampling rate, strictly inside (0, 0.5); order is capped at 8 for the
/// stability of the cascaded biquads.
struct FilterSpec {
    int order = 4;
    double cutoff = 0.1;
    FilterMode mode = FilterMode::zero_phase;
};

/// One second-order section, a0 normalised to 1.
struct Biquad {
    double b0, b1, b2, a1, a2;
};

/// Design a lowpass Butterworth as cascaded second-order sections via the
/// bilinear transform with frequency prewarping. Every section has DC gain
/// exactly 1. Throws std::invalid_argument for order outside [1, 8] or
/// cutoff outside (0, 0.5).
std::vector<Biquad> design_butterworth(int order, double cutoff);

/// Magnitude of the cascade's frequency response at frequency f
/// (fraction of the sampling rate).
double sos_gain(const std::vector<Biquad>& sections, double f);

/// Filter a signal. zero_phase runs the cascade forward then backward over
/// a reflection-padded copy (pad length 3 x order), giving zero phase
/// distortion and the squared magnitude response; causal is a single
/// forward pass. Requires signal length > 3 x order.
std::vector<double> apply_filter(const std::vector<double>& signal, const FilterSpec& spec);

}  // namespace lspie
