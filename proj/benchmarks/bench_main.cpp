// Microbenchmarks for the hot paths: static measurement over realistic
// image sizes, dynamic event digests, log appends, and full-chain
// verification.
#include <benchmark/benchmark.h>

#include <random>

#include "pdrima/attest.hpp"
#include "pdrima/measure.hpp"
#include "pdrima/sml.hpp"

using namespace pdrima;

namespace {

std::vector<std::uint8_t> pseudo_random_bytes(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::uint8_t> out(n);
    for (auto& b : out) b = std::uint8_t(rng());
    return out;
}

void bm_measure_kernel_image(benchmark::State& state) {
    std::vector<measure::Segment> segs = {
        {"image", pseudo_random_bytes(std::size_t(state.range(0)), 1)}};
    for (auto _ : state)
        benchmark::DoNotOptimize(measure::measure_segments(segs));
    state.SetBytesProcessed(std::int64_t(state.iterations()) * state.range(0));
}
BENCHMARK(bm_measure_kernel_image)->Arg(64 << 10)->Arg(305 * 1024)->Arg(1 << 20);

void bm_measure_segmented(benchmark::State& state) {
    std::vector<measure::Segment> segs;
    for (int i = 0; i < state.range(0); ++i)
        segs.push_back({"seg" + std::to_string(i),
                        pseudo_random_bytes(4096, std::uint64_t(i))});
    for (auto _ : state)
        benchmark::DoNotOptimize(measure::measure_segments(segs));
}
BENCHMARK(bm_measure_segmented)->Arg(4)->Arg(16)->Arg(64);

void bm_measure_syscall(benchmark::State& state) {
    measure::SyscallRecord rec;
    rec.d1_metadata.event = policy::EventType::Syscall;
    rec.d1_metadata.syscall_number = 4;
    rec.d1_metadata.timestamp_ms = 123456;
    rec.d2_parameters = pseudo_random_bytes(std::size_t(state.range(0)), 2);
    for (auto _ : state)
        benchmark::DoNotOptimize(measure::measure_syscall(rec));
}
BENCHMARK(bm_measure_syscall)->Arg(16)->Arg(256)->Arg(4096);

void bm_sml_append(benchmark::State& state) {
    sml::DynamicEventData ed;
    ed.metadata.event = policy::EventType::Syscall;
    ed.metadata.syscall_number = 4;
    ed.measured = hash(std::string{"m"});
    auto encoded = sml::encode_event_data(ed);

    for (auto _ : state) {
        state.PauseTiming();
        sml::Sml log(std::uint32_t(state.range(0)));
        sml::VpcrBank bank;
        state.ResumeTiming();
        for (int i = 0; i < state.range(0); ++i)
            log.append(bank, 3, policy::EventType::Syscall, encoded, ed.measured);
    }
    state.SetItemsProcessed(std::int64_t(state.iterations()) * state.range(0));
}
BENCHMARK(bm_sml_append)->Arg(64)->Arg(1024);

void bm_verify_chain(benchmark::State& state) {
    sml::Sml log(std::uint32_t(state.range(0)));
    sml::VpcrBank bank;
    sml::DynamicEventData ed;
    ed.metadata.event = policy::EventType::Syscall;
    ed.measured = hash(std::string{"m"});
    auto encoded = sml::encode_event_data(ed);
    for (int i = 0; i < state.range(0); ++i)
        log.append(bank, 3, policy::EventType::Syscall, encoded, ed.measured);

    for (auto _ : state)
        benchmark::DoNotOptimize(sml::verify_chain(log.entries()));
    state.SetItemsProcessed(std::int64_t(state.iterations()) * state.range(0));
}
BENCHMARK(bm_verify_chain)->Arg(64)->Arg(1024);

void bm_quote_roundtrip(benchmark::State& state) {
    KeyPair kp = generate_keypair(KeyRole::Attest, 1);
    sml::Sml log(16);
    sml::VpcrBank bank;
    sml::StaticEventData ed;
    ed.measured = hash(std::string{"m"});
    log.append(bank, 2, policy::EventType::UserTaLoad,
               sml::encode_event_data(ed), ed.measured);
    auto challenge = attest::Challenge::fresh();

    for (auto _ : state) {
        auto resp = attest::device_respond(challenge, log, bank, kp);
        benchmark::DoNotOptimize(
            verify(kp.public_key, hash(resp.evidence_bytes).bytes,
                   resp.quote.signature));
    }
}
BENCHMARK(bm_quote_roundtrip);

} // namespace

BENCHMARK_MAIN();
