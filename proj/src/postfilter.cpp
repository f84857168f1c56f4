#include "lspie/postfilter.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace lspie {

namespace {

void validate(int order, double cutoff) {
    if (order < 1 || order > 8)
        throw std::invalid_argument("butterworth: order must be in [1, 8], got " +
                                    std::to_string(order));
    if (!(cutoff > 0.0) || !(cutoff < 0.5))
        throw std::invalid_argument("butterworth: cutoff must be in (0, 0.5), got " +
                                    std::to_string(cutoff));
}

/// One pass of a section in transposed direct form II. The filter state is
/// seeded at the steady state for a constant input x[0], so constant
/// signals pass through bit-near-exactly and edge transients stay small.
void run_section(const Biquad& s, std::vector<double>& x) {
    const double x0 = x.empty() ? 0.0 : x.front();
    double s1 = x0 * (1.0 - s.b0);
    double s2 = x0 * (s.b2 - s.a2);
    for (double& v : x) {
        const double in = v;
        const double out = s.b0 * in + s1;
        s1 = s.b1 * in - s.a1 * out + s2;
        s2 = s.b2 * in - s.a2 * out;
        v = out;
    }
}

void run_cascade(const std::vector<Biquad>& sections, std::vector<double>& x) {
    for (const Biquad& s : sections) run_section(s, x);
}

}  // namespace

std::vector<Biquad> design_butterworth(int order, double cutoff) {
    validate(order, cutoff);
    constexpr double pi = std::numbers::pi;
    const double warped = 2.0 * std::tan(pi * cutoff);  // prewarped analog cutoff

    std::vector<Biquad> sections;
    // Conjugate pole pairs of the analog prototype, scaled to the warped
    // cutoff, mapped by the bilinear transform s = 2 (z - 1)/(z + 1).
    for (int k = 0; k < order / 2; ++k) {
        const double theta = pi * (2.0 * k + order + 1.0) / (2.0 * order);
        const std::complex<double> p = warped * std::complex<double>(std::cos(theta), std::sin(theta));
        const std::complex<double> zp = (2.0 + p) / (2.0 - p);
        const double a1 = -2.0 * zp.real();
        const double a2 = std::norm(zp);
        const double g = (1.0 + a1 + a2) / 4.0;  // DC gain exactly 1
        sections.push_back({g, 2.0 * g, g, a1, a2});
    }
    if (order % 2 == 1) {
        const double zp = (2.0 - warped) / (2.0 + warped);  // real pole at -warped
        const double a1 = -zp;
        const double g = (1.0 + a1) / 2.0;
        sections.push_back({g, g, 0.0, a1, 0.0});
    }
    return sections;
}

double sos_gain(const std::vector<Biquad>& sections, double f) {
    const std::complex<double> zinv = std::exp(std::complex<double>(0.0, -2.0 * std::numbers::pi * f));
    std::complex<double> h = 1.0;
    for (const Biquad& s : sections)
        h *= (s.b0 + s.b1 * zinv + s.b2 * zinv * zinv) / (1.0 + s.a1 * zinv + s.a2 * zinv * zinv);
    return std::abs(h);
}

std::vector<double> apply_filter(const std::vector<double>& signal, const FilterSpec& spec) {
    const auto sections = design_butterworth(spec.order, spec.cutoff);
    const int pad = 3 * spec.order;
    const int n = static_cast<int>(signal.size());
    if (n <= pad)
        throw std::invalid_argument("apply_filter: signal length " + std::to_string(n) +
                                    " must exceed 3 x order = " + std::to_string(pad));

    if (spec.mode == FilterMode::causal) {
        std::vector<double> out = signal;
        run_cascade(sections, out);
        return out;
    }

    // Odd reflection about both endpoints suppresses boundary transients of
    // the forward-backward pass.
    std::vector<double> ext;
    ext.reserve(static_cast<std::size_t>(n) + 2 * pad);
    for (int i = pad; i >= 1; --i) ext.push_back(2.0 * signal.front() - signal[i]);
    ext.insert(ext.end(), signal.begin(), signal.end());
    for (int i = n - 2; i >= n - 1 - pad; --i) ext.push_back(2.0 * signal.back() - signal[i]);

    run_cascade(sections, ext);
    std::reverse(ext.begin(), ext.end());
    run_cascade(sections, ext);
    std::reverse(ext.begin(), ext.end());

    return {ext.begin() + pad, ext.begin() + pad + n};
}

}  // namespace lspie
