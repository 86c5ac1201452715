// Benchmark the OpenMP verifier kernels against the serial reference and
// check that both produce identical verdicts.

#include <chrono>
#include <cstdio>
#include <string>

#include "plc/analysis.hpp"

using Clock = std::chrono::steady_clock;

namespace {

double seconds(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

plc::Instance worked_example(std::uint64_t seed) {
    return plc::Instance::make(
        5, {{1, 0, 1, 1}, {0, 1, 1, 1}},
        {{1, 0, 0, 1}, {1, 1, 0, 0}, {2, 1, 0, 1}}, 0,
        {{1, 0, 1, 0}, {0, 1, 0, 1}}, seed);
}

plc::Instance tiny_privacy(std::uint64_t seed) {
    return plc::Instance::make(3, {{1, 1}}, {{1, 0}, {0, 1}}, 0, {}, seed);
}

} // namespace

int main(int argc, char** argv) {
    std::size_t trials = 512;
    if (argc > 1) trials = std::stoul(argv[1]);

    plc::Instance inst = worked_example(7);

    auto t0 = Clock::now();
    auto serial = plc::verify_recovery(inst, trials, plc::Exec::Serial);
    auto t1 = Clock::now();
    auto parallel = plc::verify_recovery(inst, trials, plc::Exec::Parallel);
    auto t2 = Clock::now();
    double ts = seconds(t0, t1), tp = seconds(t1, t2);
    std::printf("recovery   trials=%zu  serial %.3fs  parallel %.3fs  speedup %.2fx  agree=%s\n",
                trials, ts, tp, tp > 0 ? ts / tp : 0.0,
                serial.pass == parallel.pass ? "yes" : "NO");

    plc::Instance tiny = tiny_privacy(7);
    t0 = Clock::now();
    auto es = plc::verify_privacy_exhaustive(tiny, 1ULL << 24, plc::Exec::Serial);
    t1 = Clock::now();
    auto ep = plc::verify_privacy_exhaustive(tiny, 1ULL << 24, plc::Exec::Parallel);
    t2 = Clock::now();
    ts = seconds(t0, t1);
    tp = seconds(t1, t2);
    std::printf("privacy    states=%llu  serial %.3fs  parallel %.3fs  speedup %.2fx  agree=%s\n",
                static_cast<unsigned long long>(es.states), ts, tp, tp > 0 ? ts / tp : 0.0,
                (es.pass == ep.pass && es.tv == ep.tv) ? "yes" : "NO");

    bool ok = serial.pass && parallel.pass && es.pass && ep.pass;
    return ok ? 0 : 1;
}
