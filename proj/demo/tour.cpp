// Walks through the example operators in specs/: Fredholm verdict for each,
// then the essential spectrum where one is defined.

#include "perigraph/perigraph.hpp"

#include <iomanip>
#include <iostream>

using namespace perigraph;

int main(int argc, char** argv) {
    const std::filesystem::path dir = argc > 1 ? argv[1] : PERIGRAPH_DEMO_SPECS;
    const char* names[] = {"identity.json",           "sio_degenerate.json",    "sio_periodic.json",
                           "convolution_shifted.json", "gaussian_convolution.json", "arctan_coefficient.json",
                           "honeycomb_sio.json"};
    std::cout << std::left << std::setw(28) << "operator" << std::setw(14) << "verdict"
              << "essential spectrum (real range)\n";
    for (const char* name : names) {
        try {
            const auto s = load_operator(dir / name);
            const auto report = check_fredholm_spec(s);
            std::cout << std::setw(28) << name << std::setw(14) << to_string(report.verdict);
            const auto fibers = spec_fibers(s, spec_mesh(s));
            const auto est = essential_spectrum(fibers.families, SpectrumConfig{s.graph->rank() == 1 ? 256 : 24},
                                                fibers.names);
            double lo = std::numeric_limits<double>::infinity(), hi = -lo, im = 0.0;
            for (const auto& p : est.points) {
                lo = std::min(lo, p.lambda.real());
                hi = std::max(hi, p.lambda.real());
                im = std::max(im, std::abs(p.lambda.imag()));
            }
            std::cout << "[" << lo << ", " << hi << "], max |Im| " << im << "\n";
        } catch (const Error& e) {
            std::cout << "(" << e.what() << ")\n";
        }
    }
    return 0;
}
